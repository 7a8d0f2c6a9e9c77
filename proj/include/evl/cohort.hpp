#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evl/errors.hpp"
#include "evl/model.hpp"

namespace evl {

/// Age-group baselines over disjoint, ascending ranges. Ranges are half-open
/// [lo, hi), except the final group which is closed at its upper bound.
struct BaselineTable {
  std::vector<AgeGroupBaseline> groups;

  const AgeGroupBaseline& lookup(double age) const {
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const AgeGroupBaseline& g = groups[i];
      const bool last = i + 1 == groups.size();
      if (age >= g.age_lo && (age < g.age_hi || (last && age == g.age_hi))) return g;
    }
    throw Error(errc::out_of_range_age,
                "no baseline covers age " + std::to_string(age));
  }

  bool operator==(const BaselineTable&) const = default;
};

/// Sorts the groups and enforces the disjointness invariant.
inline BaselineTable make_baseline_table(std::vector<AgeGroupBaseline> groups) {
  for (const AgeGroupBaseline& g : groups) validate(g);
  std::sort(groups.begin(), groups.end(),
            [](const AgeGroupBaseline& a, const AgeGroupBaseline& b) { return a.age_lo < b.age_lo; });
  for (std::size_t i = 1; i < groups.size(); ++i) {
    if (groups[i].age_lo < groups[i - 1].age_hi)
      throw Error(errc::overlapping_ranges,
                  "age ranges " + std::to_string(groups[i - 1].age_lo) + "-" +
                      std::to_string(groups[i - 1].age_hi) + " and " +
                      std::to_string(groups[i].age_lo) + "-" + std::to_string(groups[i].age_hi) +
                      " overlap");
  }
  return BaselineTable{std::move(groups)};
}

/// The four built-in age-group baselines (initialization values per group).
inline BaselineTable builtin_baselines() {
  return BaselineTable{{
      {8, 10, 20.0, 6.0, 55.0, 48.0},
      {10, 12, 20.0, 5.0, 61.0, 52.0},
      {12, 14, 22.0, 3.0, 68.0, 51.0},
      {14, 16, 23.0, 5.0, 52.0, 47.0},
  }};
}

struct CohortRecord {
  std::string subject_id;
  double age = 0.0;
  NearWorkObservation obs;
};

struct CohortEvaluation {
  std::string subject_id;
  OcularEvaluation eval;
};

struct CohortError {
  std::string subject_id;
  errc code;
  std::string message;
};

struct CohortResult {
  std::vector<CohortEvaluation> evaluations;  // input order
  std::vector<CohortError> errors;            // input order
};

/// Evaluates every record; a failing record is reported under its subject id
/// and does not abort the batch.
inline CohortResult evaluate_cohort(const std::vector<CohortRecord>& records,
                                    const BaselineTable& table, const ModelConfig& cfg = {}) {
  CohortResult out;
  for (const CohortRecord& rec : records) {
    try {
      const AgeGroupBaseline& baseline = table.lookup(rec.age);
      out.evaluations.push_back({rec.subject_id, evaluate_observation(baseline, rec.obs, cfg)});
    } catch (const Error& e) {
      out.errors.push_back({rec.subject_id, e.code(), e.what()});
    }
  }
  return out;
}

// --- reference-table consistency checking ---------------------------------

/// One transcribed row of the reference data table: the raw inputs plus the
/// printed values of every computed column.
struct ReferenceTableRow {
  double age = 0.0;
  double n = 0.0;
  double t = 0.0;
  double l = 0.0;
  double p = 0.0;
  double m_printed = 0.0;
  double d = 0.0;
  double w = 0.0;
  double ar_printed = 0.0;
  double vr_printed = 0.0;
  double o_printed = 0.0;
  std::optional<double> ser;
};

enum class ReportColumn { M, AR, VR, O };

inline const char* to_string(ReportColumn c) {
  switch (c) {
    case ReportColumn::M: return "M";
    case ReportColumn::AR: return "AR";
    case ReportColumn::VR: return "VR";
    case ReportColumn::O: return "O";
  }
  return "?";
}

/// Per-column Match tolerances, sized to absorb the table's 2-3 significant
/// figure rounding while still exposing genuine formula mismatches.
struct ColumnTolerances {
  double m = 0.02;
  double ar = 0.05;
  double vr = 0.05;
  double o = 0.005;
};

struct ConsistencyEntry {
  std::size_t row = 0;  // 1-based row index in the input table
  ElongationMode mode = ElongationMode::Literal;
  ReportColumn column = ReportColumn::M;
  double recomputed = 0.0;
  double printed = 0.0;
  double deviation = 0.0;  // absolute
  bool match = false;
};

struct ConsistencyReport {
  std::vector<ConsistencyEntry> entries;  // rows x 2 modes x 4 columns
  ColumnTolerances tolerances;
};

/// Recomputes M, AR, VR, O for every row under both elongation modes and
/// flags each against its printed value. Deviations are findings, not
/// failures; model errors raised by a row propagate.
inline ConsistencyReport check_reference_table(const std::vector<ReferenceTableRow>& rows,
                                           const BaselineTable& table,
                                           const ColumnTolerances& tol = {},
                                           const ModelConfig& cfg = {}) {
  ConsistencyReport report;
  report.tolerances = tol;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ReferenceTableRow& row = rows[i];
    const AgeGroupBaseline& baseline = table.lookup(row.age);
    NearWorkObservation obs;
    obs.near_work = row.n;
    obs.duration_min = row.t;
    obs.lux = row.l;
    obs.pupil_mm = row.p;
    obs.distance_m = row.d;
    obs.aberrations = row.w;
    for (ElongationMode mode : {ElongationMode::Literal, ElongationMode::UnitCoefficient}) {
      ModelConfig mode_cfg = cfg;
      mode_cfg.elongation_mode = mode;
      const OcularEvaluation e = evaluate_observation(baseline, obs, mode_cfg);
      const auto add = [&](ReportColumn col, double recomputed, double printed, double t) {
        const double dev = std::abs(recomputed - printed);
        report.entries.push_back({i + 1, mode, col, recomputed, printed, dev, dev <= t});
      };
      add(ReportColumn::M, e.refraction, row.m_printed, tol.m);
      add(ReportColumn::AR, e.accommodative_response, row.ar_printed, tol.ar);
      add(ReportColumn::VR, e.convergence_response, row.vr_printed, tol.vr);
      add(ReportColumn::O, e.ratio, row.o_printed, tol.o);
    }
  }
  return report;
}

// --- rank correlation ------------------------------------------------------

/// 1-based fractional ranks; tied values share the mid-rank.
inline std::vector<double> mid_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

/// Spearman rank correlation with mid-rank tie handling (Pearson correlation
/// of the rank vectors). Returns 0 when either rank vector is constant.
inline double spearman_rho(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw Error(errc::invalid_domain, "rank correlation needs equal-length inputs");
  if (x.size() < 2) throw Error(errc::invalid_domain, "rank correlation needs >= 2 pairs");
  const std::vector<double> rx = mid_ranks(x);
  const std::vector<double> ry = mid_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// --- trend association -----------------------------------------------------

struct TrendSample {
  double o = 0.0;
  double ser = 0.0;
  std::string group;  // optional grouping key, e.g. the age range
};

struct GroupTrendSummary {
  std::string group;
  std::size_t n = 0;
  double mean_o = 0.0;
  double mean_ser = 0.0;
};

struct TrendReport {
  std::size_t n_pairs = 0;
  double rho = 0.0;
  int direction = 0;  // sign of rho
  std::vector<GroupTrendSummary> groups;
};

/// Rank association between the EVL ratio and measured SER over all samples,
/// plus per-group means. Needs at least 3 pairs.
inline TrendReport trend_association(const std::vector<TrendSample>& samples) {
  if (samples.size() < 3)
    throw Error(errc::insufficient_data,
                "trend association needs >= 3 (O, SER) pairs, got " +
                    std::to_string(samples.size()));
  std::vector<double> o(samples.size()), ser(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    o[i] = samples[i].o;
    ser[i] = samples[i].ser;
  }
  TrendReport report;
  report.n_pairs = samples.size();
  report.rho = spearman_rho(o, ser);
  report.direction = (report.rho > 0.0) - (report.rho < 0.0);

  std::map<std::string, GroupTrendSummary> by_group;
  for (const TrendSample& s : samples) {
    GroupTrendSummary& g = by_group[s.group];
    g.group = s.group;
    ++g.n;
    g.mean_o += s.o;
    g.mean_ser += s.ser;
  }
  for (auto& [key, g] : by_group) {
    g.mean_o /= static_cast<double>(g.n);
    g.mean_ser /= static_cast<double>(g.n);
    report.groups.push_back(g);
  }
  return report;
}

}  // namespace evl
