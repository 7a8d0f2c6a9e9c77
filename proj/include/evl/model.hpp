#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "evl/errors.hpp"

namespace evl {

/// Classification of the EVL ratio O against the band [1-theta, 1+theta].
/// Boundaries are inclusive: O == 1-theta and O == 1+theta are Balanced.
enum class BalanceClass { Balanced, ImbalancedLow, ImbalancedHigh };

/// Coefficient applied to the elongation increment. Literal multiplies by
/// the near-work coefficient n; UnitCoefficient replaces it with 1.
enum class ElongationMode { Literal, UnitCoefficient };

inline const char* to_string(BalanceClass c) {
  switch (c) {
    case BalanceClass::Balanced: return "Balanced";
    case BalanceClass::ImbalancedLow: return "ImbalancedLow";
    case BalanceClass::ImbalancedHigh: return "ImbalancedHigh";
  }
  return "?";
}

inline const char* to_string(ElongationMode m) {
  return m == ElongationMode::Literal ? "literal" : "unit";
}

/// Initial ocular state of one age group: axial length (mm), pupil size
/// (mm), refractive error (diopter), aberration count.
struct AgeGroupBaseline {
  int age_lo = 0;
  int age_hi = 0;
  double al0 = 0.0;
  double p0 = 0.0;
  double m0 = 0.0;
  double w0 = 0.0;

  bool operator==(const AgeGroupBaseline&) const = default;
};

/// One measured near-work session. Field names follow the observation file
/// schema: near_work is the type coefficient n (reading 1, writing 1.5,
/// phone 2, arbitrary positive values accepted for sweeps).
struct NearWorkObservation {
  double near_work = 1.0;
  double duration_min = 0.0;
  double lux = 0.0;
  double pupil_mm = 0.0;
  double distance_m = 0.0;
  double aberrations = 0.0;
  std::optional<double> ser;

  bool operator==(const NearWorkObservation&) const = default;
};

/// Threshold and calibration knobs. l0_levels are the preset ambient-light
/// levels housed for experiment configuration; no equation consumes them.
struct ModelConfig {
  double theta = 0.1;
  ElongationMode elongation_mode = ElongationMode::Literal;
  std::vector<double> l0_levels{189.0, 527.0, 892.0};
  double luminance_gain = 1974.0;
  double luminance_offset = 0.0;
};

/// Full derived record for one observation. All intermediates are kept.
struct OcularEvaluation {
  double refraction = 0.0;               // M
  double rest_accommodation = 0.0;       // A = M/(1-d)
  double rest_convergence = 0.0;         // V = M/(1+d)
  double axial_length = 0.0;             // AL
  double accommodative_response = 0.0;   // AR = AL + M(1-d)
  double convergence_response = 0.0;     // VR = AL + M(1+d)
  double ratio = 0.0;                    // O = AR/VR
  BalanceClass balance = BalanceClass::Balanced;
};

struct RestingPoints {
  double accommodation = 0.0;
  double convergence = 0.0;
};

struct Responses {
  double accommodative = 0.0;
  double convergence = 0.0;
};

inline void validate(const AgeGroupBaseline& b) {
  if (!(b.age_lo < b.age_hi))
    throw Error(errc::invalid_domain, "baseline requires age_lo < age_hi");
  if (!std::isfinite(b.al0) || !std::isfinite(b.p0) || !std::isfinite(b.m0) ||
      !std::isfinite(b.w0))
    throw Error(errc::invalid_domain, "baseline values must be finite");
  if (!(b.al0 > 0.0)) throw Error(errc::invalid_domain, "al0 must be positive");
  if (!(b.p0 > 0.0)) throw Error(errc::invalid_domain, "p0 must be positive");
  if (!(b.w0 >= 0.0)) throw Error(errc::invalid_domain, "w0 must be non-negative");
}

inline void validate(const NearWorkObservation& o) {
  if (!std::isfinite(o.near_work) || !std::isfinite(o.duration_min) || !std::isfinite(o.lux) ||
      !std::isfinite(o.pupil_mm) || !std::isfinite(o.distance_m) || !std::isfinite(o.aberrations))
    throw Error(errc::invalid_domain, "observation values must be finite");
  if (!(o.near_work > 0.0))
    throw Error(errc::invalid_domain, "near-work coefficient must be positive");
  if (!(o.duration_min >= 0.0))
    throw Error(errc::invalid_domain, "duration must be non-negative");
  if (!(o.lux > 0.0)) throw Error(errc::nonpositive_lighting, "lighting must be positive");
  if (!(o.pupil_mm > 0.0)) throw Error(errc::invalid_domain, "pupil size must be positive");
  if (o.distance_m == 1.0 || o.distance_m == -1.0)
    throw Error(errc::degenerate_distance, "viewing distance of exactly 1 m is degenerate");
  if (!(o.distance_m >= 0.0 && o.distance_m < 1.0))
    throw Error(errc::invalid_domain, "viewing distance must lie in [0, 1)");
  if (!(o.aberrations >= 0.0))
    throw Error(errc::invalid_domain, "aberration count must be non-negative");
}

inline void validate(const ModelConfig& c) {
  if (!(std::isfinite(c.theta) && c.theta > 0.0 && c.theta < 1.0))
    throw Error(errc::invalid_threshold, "theta must lie in (0, 1)");
  for (double l0 : c.l0_levels)
    if (!(std::isfinite(l0) && l0 > 0.0))
      throw Error(errc::invalid_domain, "l0_levels must all be positive");
}

/// Resting points of accommodation and convergence: A = M/(1-d), V = M/(1+d).
inline RestingPoints resting_points(double m, double d) {
  if (d == 1.0 || d == -1.0)
    throw Error(errc::degenerate_distance, "resting-point denominator is zero at d = " +
                                               std::to_string(d));
  return {m / (1.0 - d), m / (1.0 + d)};
}

/// Axial length after t minutes of near work: AL = AL0 + coeff * t * (A/V),
/// where coeff is n (Literal) or 1 (UnitCoefficient).
inline double axial_length(double al0, double n, double t, double a, double v,
                           ElongationMode mode = ElongationMode::Literal) {
  if (v == 0.0) throw Error(errc::degenerate_convergence, "resting convergence is zero");
  if (!(t >= 0.0)) throw Error(errc::invalid_domain, "duration must be non-negative");
  const double coeff = mode == ElongationMode::Literal ? n : 1.0;
  return al0 + coeff * t * (a / v);
}

/// Lighting model: M = M0 + n * (W - W0) * (P - P0) / L.
inline double refractive_error(double m0, double n, double w, double w0, double p, double p0,
                               double l) {
  if (!(l > 0.0)) throw Error(errc::nonpositive_lighting, "lighting must be positive");
  return m0 + n * (w - w0) * (p - p0) / l;
}

/// Accommodative and convergence responses: AR = AL + M(1-d), VR = AL + M(1+d).
inline Responses responses(double al, double m, double d) {
  return {al + m * (1.0 - d), al + m * (1.0 + d)};
}

/// EVL ratio O = AR/VR.
inline double evl_ratio(double ar, double vr) {
  if (vr == 0.0)
    throw Error(errc::degenerate_convergence_response, "convergence response is zero");
  return ar / vr;
}

inline BalanceClass classify(double o, double theta) {
  if (!(std::isfinite(theta) && theta > 0.0 && theta < 1.0))
    throw Error(errc::invalid_threshold, "theta must lie in (0, 1)");
  if (o < 1.0 - theta) return BalanceClass::ImbalancedLow;
  if (o > 1.0 + theta) return BalanceClass::ImbalancedHigh;
  return BalanceClass::Balanced;
}

/// The whole pipeline for one observation, in dataflow order:
/// M, then (A, V), then AL, then (AR, VR), then O, then the class.
inline OcularEvaluation evaluate_observation(const AgeGroupBaseline& baseline,
                                             const NearWorkObservation& obs,
                                             const ModelConfig& cfg = {}) {
  validate(cfg);
  validate(baseline);
  validate(obs);

  OcularEvaluation e;
  e.refraction = refractive_error(baseline.m0, obs.near_work, obs.aberrations, baseline.w0,
                                  obs.pupil_mm, baseline.p0, obs.lux);
  const RestingPoints rp = resting_points(e.refraction, obs.distance_m);
  e.rest_accommodation = rp.accommodation;
  e.rest_convergence = rp.convergence;
  e.axial_length = axial_length(baseline.al0, obs.near_work, obs.duration_min, rp.accommodation,
                                rp.convergence, cfg.elongation_mode);
  const Responses r = responses(e.axial_length, e.refraction, obs.distance_m);
  e.accommodative_response = r.accommodative;
  e.convergence_response = r.convergence;
  e.ratio = evl_ratio(r.accommodative, r.convergence);
  e.balance = classify(e.ratio, cfg.theta);
  return e;
}

/// Axial length AL* at which O(AL) reaches the lower boundary 1-theta:
/// AL* = M * (2d - theta(1+d)) / theta. O < 1-theta below AL*, O >= 1-theta
/// at and above it. No crossing exists (O >= 1-theta for every AL >= 0)
/// when 2d <= theta(1+d); then nullopt.
inline std::optional<double> balance_crossing_axial_length(double m, double d, double theta) {
  if (!(std::isfinite(theta) && theta > 0.0 && theta < 1.0))
    throw Error(errc::invalid_threshold, "theta must lie in (0, 1)");
  if (!(std::isfinite(m) && m > 0.0))
    throw Error(errc::invalid_domain, "refractive error must be positive");
  if (!(std::isfinite(d) && d >= 0.0 && d < 1.0))
    throw Error(errc::invalid_domain, "viewing distance must lie in [0, 1)");
  if (2.0 * d <= theta * (1.0 + d)) return std::nullopt;
  return m * (2.0 * d - theta * (1.0 + d)) / theta;
}

/// Near-work time t* at which the evaluation crosses into the balanced band.
/// O increases with t under the literal formulas, so the crossing runs
/// imbalance -> balance. Returns 0 when the initial axial length is already
/// past AL* (balanced from the start), and nullopt when no crossing exists
/// for any duration (always balanced).
inline std::optional<double> balance_crossing_time(const AgeGroupBaseline& baseline,
                                                   const NearWorkObservation& obs,
                                                   const ModelConfig& cfg = {}) {
  validate(cfg);
  validate(baseline);
  validate(obs);

  const double m = refractive_error(baseline.m0, obs.near_work, obs.aberrations, baseline.w0,
                                    obs.pupil_mm, baseline.p0, obs.lux);
  const std::optional<double> al_star = balance_crossing_axial_length(m, obs.distance_m, cfg.theta);
  if (!al_star) return std::nullopt;
  const RestingPoints rp = resting_points(m, obs.distance_m);
  const double coeff = cfg.elongation_mode == ElongationMode::Literal ? obs.near_work : 1.0;
  const double rate = coeff * (rp.accommodation / rp.convergence);
  return std::max(0.0, (*al_star - baseline.al0) / rate);
}

}  // namespace evl
