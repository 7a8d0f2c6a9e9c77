#include <cmath>
#include <optional>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "evl/model.hpp"
#include "evl/sweep.hpp"

using Catch::Matchers::WithinAbs;

namespace {

// Ratio of the responses as a function of axial length, at fixed m and d.
double ratio_at(double al, double m, double d) {
  const evl::Responses r = evl::responses(al, m, d);
  return evl::evl_ratio(r.accommodative, r.convergence);
}

// Independent root finder for ratio_at(al) = 1 - theta. The ratio increases
// in al, so the root is bracketed once the upper end clears the target.
std::optional<double> bisect_crossing(double m, double d, double theta) {
  const double target = 1.0 - theta;
  if (ratio_at(0.0, m, d) >= target) return std::nullopt;
  double lo = 0.0, hi = 1.0;
  while (ratio_at(hi, m, d) < target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (ratio_at(mid, m, d) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

evl::AgeGroupBaseline random_baseline(std::mt19937& rng) {
  std::uniform_real_distribution<double> al0(15.0, 30.0);
  std::uniform_real_distribution<double> p0(2.0, 8.0);
  std::uniform_real_distribution<double> m0(20.0, 60.0);
  std::uniform_real_distribution<double> w0(40.0, 60.0);
  return {8, 16, al0(rng), p0(rng), m0(rng), w0(rng)};
}

evl::NearWorkObservation random_observation(std::mt19937& rng) {
  std::uniform_real_distribution<double> coeff(0.5, 3.0);
  std::uniform_real_distribution<double> minutes(0.0, 240.0);
  std::uniform_real_distribution<double> lux(100.0, 2000.0);
  std::uniform_real_distribution<double> pupil(2.0, 10.0);
  std::uniform_real_distribution<double> distance(0.2, 0.6);
  std::uniform_real_distribution<double> aberr(40.0, 70.0);
  evl::NearWorkObservation obs;
  obs.near_work = coeff(rng);
  obs.duration_min = minutes(rng);
  obs.lux = lux(rng);
  obs.pupil_mm = pupil(rng);
  obs.distance_m = distance(rng);
  obs.aberrations = aberr(rng);
  return obs;
}

}  // namespace

TEST_CASE("closed-form balance crossing agrees with bisection") {
  std::mt19937 rng(424242u);
  std::uniform_real_distribution<double> m_dist(0.5, 100.0);
  std::uniform_real_distribution<double> d_dist(0.0, 0.9);
  std::uniform_real_distribution<double> theta_dist(0.01, 0.9);

  int done = 0;
  while (done < 1000) {
    const double m = m_dist(rng);
    const double d = d_dist(rng);
    const double theta = theta_dist(rng);
    // Skip triples sitting numerically on the existence boundary, where the
    // two methods may legitimately disagree about none vs. some.
    if (std::abs(2.0 * d - theta * (1.0 + d)) < 1e-4) continue;
    ++done;

    const auto closed = evl::balance_crossing_axial_length(m, d, theta);
    const auto numeric = bisect_crossing(m, d, theta);
    REQUIRE(closed.has_value() == numeric.has_value());
    if (closed) CHECK_THAT(*closed, WithinAbs(*numeric, 1e-9));
  }
}

TEST_CASE("the ratio rises strictly with near-work duration") {
  std::mt19937 rng(1337u);
  std::uniform_real_distribution<double> minutes(0.0, 240.0);
  for (int i = 0; i < 2000; ++i) {
    const evl::AgeGroupBaseline baseline = random_baseline(rng);
    evl::NearWorkObservation obs = random_observation(rng);
    double t1 = minutes(rng), t2 = minutes(rng);
    if (t1 > t2) std::swap(t1, t2);
    if (t2 - t1 < 1e-6) continue;

    obs.duration_min = t1;
    const double o1 = evl::evaluate_observation(baseline, obs).ratio;
    obs.duration_min = t2;
    const double o2 = evl::evaluate_observation(baseline, obs).ratio;
    REQUIRE(o2 > o1);
  }
}

TEST_CASE("the ratio falls strictly with distance at fixed axial length") {
  std::mt19937 rng(9001u);
  std::uniform_real_distribution<double> al_dist(5.0, 50.0);
  std::uniform_real_distribution<double> m_dist(20.0, 60.0);
  std::uniform_real_distribution<double> d_dist(0.0, 0.95);
  for (int i = 0; i < 2000; ++i) {
    const double al = al_dist(rng);
    const double m = m_dist(rng);
    double d1 = d_dist(rng), d2 = d_dist(rng);
    if (d1 > d2) std::swap(d1, d2);
    if (d2 - d1 < 1e-6) continue;
    REQUIRE(ratio_at(al, m, d1) > ratio_at(al, m, d2));
  }
}

TEST_CASE("finite differences confirm the analytic ratio derivatives") {
  std::mt19937 rng(5150u);
  std::uniform_real_distribution<double> al_dist(5.0, 50.0);
  std::uniform_real_distribution<double> m_dist(20.0, 60.0);
  std::uniform_real_distribution<double> d_dist(0.2, 0.6);
  const double h = 1e-5;

  for (int i = 0; i < 100; ++i) {
    const double al = al_dist(rng);
    const double m = m_dist(rng);
    const double d = d_dist(rng);
    const double vr = al + m * (1.0 + d);
    const double ar = al + m * (1.0 - d);

    // d(ratio)/d(al) = 2 m d / vr^2 > 0
    const double dal_analytic = 2.0 * m * d / (vr * vr);
    const double dal_numeric = (ratio_at(al + h, m, d) - ratio_at(al - h, m, d)) / (2.0 * h);
    CHECK(dal_analytic > 0.0);
    CHECK_THAT(dal_numeric / dal_analytic, WithinAbs(1.0, 1e-6));

    // d(ratio)/d(d) = -m (ar + vr) / vr^2 < 0
    const double dd_analytic = -m * (ar + vr) / (vr * vr);
    const double dd_numeric = (ratio_at(al, m, d + h) - ratio_at(al, m, d - h)) / (2.0 * h);
    CHECK(dd_analytic < 0.0);
    CHECK_THAT(dd_numeric / dd_analytic, WithinAbs(1.0, 1e-6));
  }
}

TEST_CASE("valid positive-domain inputs never classify above the band") {
  std::mt19937 rng(31415u);
  for (int i = 0; i < 2000; ++i) {
    const evl::AgeGroupBaseline baseline = random_baseline(rng);
    const evl::NearWorkObservation obs = random_observation(rng);
    const evl::OcularEvaluation e = evl::evaluate_observation(baseline, obs);
    REQUIRE(e.ratio <= 1.0);
    REQUIRE(e.balance != evl::BalanceClass::ImbalancedHigh);
  }
}

TEST_CASE("crossing time marks the classification flip along a duration sweep") {
  std::mt19937 rng(2718u);
  evl::ModelConfig cfg;
  for (int i = 0; i < 200; ++i) {
    const evl::AgeGroupBaseline baseline = random_baseline(rng);
    evl::NearWorkObservation obs = random_observation(rng);
    const auto t_star = evl::balance_crossing_time(baseline, obs, cfg);
    if (!t_star || *t_star == 0.0) continue;

    obs.duration_min = *t_star * 0.999;
    const evl::OcularEvaluation before = evl::evaluate_observation(baseline, obs, cfg);
    obs.duration_min = *t_star * 1.001;
    const evl::OcularEvaluation after = evl::evaluate_observation(baseline, obs, cfg);
    REQUIRE(before.balance == evl::BalanceClass::ImbalancedLow);
    REQUIRE(after.balance == evl::BalanceClass::Balanced);
  }
}

TEST_CASE("sweeps space their points linearly over the closed range") {
  evl::SweepSpec spec;
  spec.variable = evl::SweepVariable::Time;
  spec.start = 0.0;
  spec.stop = 120.0;
  spec.steps = 13;
  spec.age = 9.0;
  spec.fixed.near_work = 1.0;
  spec.fixed.lux = 987.0;
  spec.fixed.pupil_mm = 8.0;
  spec.fixed.distance_m = 0.1;
  spec.fixed.aberrations = 53.0;

  const evl::SweepResult result = evl::run_sweep(evl::builtin_baselines(), spec, {}, true);
  REQUIRE(result.points.size() == 13);
  CHECK(result.points.front().value == 0.0);
  CHECK(result.points.back().value == 120.0);
  CHECK_THAT(result.points[1].value, WithinAbs(10.0, 1e-12));
  for (std::size_t i = 1; i < result.points.size(); ++i)
    CHECK(result.points[i].eval.ratio > result.points[i - 1].eval.ratio);

  REQUIRE(result.t_star.has_value());
  CHECK_THAT(*result.t_star, WithinAbs(24.143824260845531, 1e-9));
  REQUIRE(result.al_star.has_value());

  // The swept variable names the first CSV column downstream.
  CHECK(evl::to_string(result.variable) == "t_min");
}

TEST_CASE("sweep specs reject empty or reversed ranges") {
  evl::SweepSpec spec;
  spec.variable = evl::SweepVariable::Distance;
  spec.start = 0.0;
  spec.stop = 0.0;
  spec.steps = 5;
  spec.age = 9.0;
  try {
    evl::run_sweep(evl::builtin_baselines(), spec, {});
    FAIL("expected an invalid-sweep-spec error");
  } catch (const evl::Error& e) {
    CHECK(e.code() == evl::errc::invalid_sweep_spec);
  }

  spec.stop = 0.5;
  spec.steps = 1;
  try {
    evl::run_sweep(evl::builtin_baselines(), spec, {});
    FAIL("expected an invalid-sweep-spec error");
  } catch (const evl::Error& e) {
    CHECK(e.code() == evl::errc::invalid_sweep_spec);
  }
}

TEST_CASE("lighting sweeps hold the refraction fixed when aberrations sit at baseline") {
  evl::SweepSpec spec;
  spec.variable = evl::SweepVariable::Lighting;
  spec.start = 207.0;
  spec.stop = 987.0;
  spec.steps = 9;
  spec.age = 9.0;
  spec.fixed.near_work = 1.0;
  spec.fixed.duration_min = 30.0;
  spec.fixed.pupil_mm = 6.0;      // equals the group's baseline pupil
  spec.fixed.distance_m = 0.1;
  spec.fixed.aberrations = 48.0;  // equals the group's baseline aberrations

  const evl::SweepResult result = evl::run_sweep(evl::builtin_baselines(), spec, {});
  for (const evl::SweepPoint& p : result.points) CHECK(p.eval.refraction == 55.0);
}
