#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evl/cohort.hpp"
#include "evl/errors.hpp"
#include "evl/model.hpp"

namespace evl {

/// Which observation input a sweep varies.
enum class SweepVariable { Time, Distance, Lighting };

/// Column name the swept value is reported under.
inline std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::Time: return "t_min";
    case SweepVariable::Distance: return "distance_m";
    case SweepVariable::Lighting: return "lux";
  }
  return "?";
}

/// Short flag spellings: t, d, L.
inline SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "t") return SweepVariable::Time;
  if (name == "d") return SweepVariable::Distance;
  if (name == "L") return SweepVariable::Lighting;
  throw Error(errc::invalid_sweep_spec,
              "sweep variable must be one of t, d, L; got '" + std::string(name) + "'");
}

/// A linear scan of one input with everything else held fixed. `fixed`
/// supplies every non-swept input; its value for the swept field is ignored.
struct SweepSpec {
  SweepVariable variable = SweepVariable::Time;
  double start = 0.0;
  double stop = 0.0;
  int steps = 0;
  double age = 0.0;
  NearWorkObservation fixed;
};

inline void validate(const SweepSpec& spec) {
  if (!(spec.start < spec.stop))
    throw Error(errc::invalid_sweep_spec, "sweep start must be below stop");
  if (spec.steps < 2) throw Error(errc::invalid_sweep_spec, "sweep needs at least 2 steps");
}

struct SweepPoint {
  double value = 0.0;
  OcularEvaluation eval;
};

struct SweepResult {
  SweepVariable variable = SweepVariable::Time;
  std::vector<SweepPoint> points;
  // Crossing markers derived from the fixed inputs, present only when
  // requested and when a crossing exists.
  std::optional<double> al_star;
  std::optional<double> t_star;
};

/// Evaluates the model at `steps` linearly spaced values spanning
/// [start, stop] inclusive. Points come back in ascending swept order.
inline SweepResult run_sweep(const BaselineTable& baselines, const SweepSpec& spec,
                             const ModelConfig& cfg, bool mark_crossing = false) {
  validate(spec);
  const AgeGroupBaseline baseline = baselines.lookup(spec.age);

  SweepResult result;
  result.variable = spec.variable;
  result.points.reserve(static_cast<std::size_t>(spec.steps));
  for (int i = 0; i < spec.steps; ++i) {
    const double value =
        spec.start + (spec.stop - spec.start) * (static_cast<double>(i) / (spec.steps - 1));
    NearWorkObservation obs = spec.fixed;
    switch (spec.variable) {
      case SweepVariable::Time: obs.duration_min = value; break;
      case SweepVariable::Distance: obs.distance_m = value; break;
      case SweepVariable::Lighting: obs.lux = value; break;
    }
    result.points.push_back({value, evaluate_observation(baseline, obs, cfg)});
  }

  if (mark_crossing) {
    // Markers describe the sweep's starting configuration; for a time sweep
    // they are independent of the swept value entirely.
    NearWorkObservation at_start = spec.fixed;
    switch (spec.variable) {
      case SweepVariable::Time: at_start.duration_min = spec.start; break;
      case SweepVariable::Distance: at_start.distance_m = spec.start; break;
      case SweepVariable::Lighting: at_start.lux = spec.start; break;
    }
    const double m = refractive_error(baseline.m0, at_start.near_work, at_start.aberrations,
                                      baseline.w0, at_start.pupil_mm, baseline.p0, at_start.lux);
    result.al_star = balance_crossing_axial_length(m, at_start.distance_m, cfg.theta);
    result.t_star = balance_crossing_time(baseline, at_start, cfg);
  }
  return result;
}

}  // namespace evl
