#pragma once

#include <charconv>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evl/cohort.hpp"
#include "evl/errors.hpp"
#include "evl/model.hpp"

namespace evl {

/// Shortest round-trip-exact decimal form of a double. Candidates at every
/// precision compete on length, so 30.0 prints as "30" rather than "3e+01".
inline std::string format_double(double value) {
  std::string best;
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    double back = 0.0;
    const auto [ptr, ec] = std::from_chars(buf, buf + len, back);
    if (ec == std::errc{} && ptr == buf + len && back == value &&
        (best.empty() || static_cast<std::size_t>(len) < best.size()))
      best.assign(buf, static_cast<std::size_t>(len));
  }
  return best;
}

/// Near-work type names and their coefficients form a bijection:
/// reading <-> 1, writing <-> 1.5, phone <-> 2.
inline double near_work_coefficient(std::string_view name) {
  if (name == "reading") return 1.0;
  if (name == "writing") return 1.5;
  if (name == "phone") return 2.0;
  throw Error(errc::invalid_near_work_type, "unknown near-work type '" + std::string(name) + "'");
}

inline std::optional<std::string_view> near_work_name(double n) {
  if (n == 1.0) return "reading";
  if (n == 1.5) return "writing";
  if (n == 2.0) return "phone";
  return std::nullopt;
}

/// Accepts a named near-work type or a positive numeric coefficient.
inline double parse_near_work_token(std::string_view token) {
  if (token == "reading" || token == "writing" || token == "phone")
    return near_work_coefficient(token);
  double n = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), n);
  if (ec != std::errc{} || ptr != token.data() + token.size() || !(n > 0.0))
    throw Error(errc::invalid_near_work_type,
                "'" + std::string(token) + "' is neither a known type nor a positive coefficient");
  return n;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.emplace_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      lines.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

inline double parse_double(std::string_view field, std::size_t line, const std::string& column) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError(errc::bad_numeric, "'" + std::string(field) + "' is not a number", line,
                     column);
  return value;
}

inline int parse_int(std::string_view field, std::size_t line, const std::string& column) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size())
    throw ParseError(errc::bad_numeric, "'" + std::string(field) + "' is not an integer", line,
                     column);
  return value;
}

/// Maps required column names to their positions in the header line.
inline std::map<std::string, std::size_t> header_index(std::string_view header_line,
                                                       const std::vector<std::string>& required) {
  const std::vector<std::string> names = split_fields(header_line);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);
  for (const std::string& name : required)
    if (!index.count(name))
      throw ParseError(errc::missing_column, "header lacks column '" + name + "'", 1);
  return index;
}

inline std::vector<std::string> row_fields(std::string_view line, std::size_t line_no,
                                           std::size_t expected) {
  std::vector<std::string> fields = split_fields(line);
  if (fields.size() < expected)
    throw ParseError(errc::missing_column,
                     "row has " + std::to_string(fields.size()) + " fields, expected " +
                         std::to_string(expected),
                     line_no);
  return fields;
}

}  // namespace detail

/// One parsed observation-file row. near_work holds the resolved coefficient.
struct ObservationFileRow {
  std::string subject_id;
  double age = 0.0;
  double near_work = 1.0;
  double t_min = 0.0;
  std::optional<double> lux;
  std::optional<std::string> image_path;
  double pupil_mm = 0.0;
  double distance_m = 0.0;
  double aberrations = 0.0;
  std::optional<double> ser;

  bool operator==(const ObservationFileRow&) const = default;
};

inline constexpr std::string_view kObservationHeader =
    "subject_id,age,near_work_type,t_min,lux,image_path,pupil_mm,distance_m,aberrations,ser";

/// Parses the observation CSV. Validation failures carry the 1-based line
/// and the column name.
inline std::vector<ObservationFileRow> parse_observations(std::string_view text) {
  const std::vector<std::string_view> lines = detail::split_lines(text);
  if (lines.empty()) throw ParseError(errc::missing_column, "empty input, header expected", 1);
  const std::vector<std::string> required = {
      "subject_id", "age",        "near_work_type", "t_min",       "lux",
      "image_path", "pupil_mm",   "distance_m",     "aberrations", "ser"};
  const auto index = detail::header_index(lines[0], required);
  const auto col = [&](const std::vector<std::string>& fields, const char* name) -> const std::string& {
    return fields[index.at(name)];
  };

  std::vector<ObservationFileRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (detail::trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = detail::row_fields(lines[i], line_no, index.size());

    ObservationFileRow row;
    row.subject_id = col(fields, "subject_id");
    row.age = detail::parse_double(col(fields, "age"), line_no, "age");

    const std::string& work = col(fields, "near_work_type");
    try {
      row.near_work = parse_near_work_token(work);
    } catch (const Error&) {
      throw ParseError(errc::invalid_near_work_type,
                       "'" + work + "' is neither a known type nor a positive coefficient",
                       line_no, "near_work_type");
    }

    row.t_min = detail::parse_double(col(fields, "t_min"), line_no, "t_min");
    const std::string& lux_field = col(fields, "lux");
    const std::string& image_field = col(fields, "image_path");
    if (!lux_field.empty()) row.lux = detail::parse_double(lux_field, line_no, "lux");
    if (!image_field.empty()) row.image_path = image_field;
    if (row.lux.has_value() == row.image_path.has_value())
      throw ParseError(errc::conflicting_lighting_source,
                       "exactly one of lux and image_path must be given", line_no);
    row.pupil_mm = detail::parse_double(col(fields, "pupil_mm"), line_no, "pupil_mm");
    row.distance_m = detail::parse_double(col(fields, "distance_m"), line_no, "distance_m");
    row.aberrations = detail::parse_double(col(fields, "aberrations"), line_no, "aberrations");
    const std::string& ser_field = col(fields, "ser");
    if (!ser_field.empty()) row.ser = detail::parse_double(ser_field, line_no, "ser");
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Inverse of parse_observations: canonical header, canonical near-work
/// names where the coefficient has one, round-trip-exact numbers.
inline std::string serialize_observations(const std::vector<ObservationFileRow>& rows) {
  std::string out{kObservationHeader};
  out += '\n';
  for (const ObservationFileRow& row : rows) {
    out += row.subject_id;
    out += ',';
    out += format_double(row.age);
    out += ',';
    if (const auto name = near_work_name(row.near_work))
      out += *name;
    else
      out += format_double(row.near_work);
    out += ',';
    out += format_double(row.t_min);
    out += ',';
    if (row.lux) out += format_double(*row.lux);
    out += ',';
    if (row.image_path) out += *row.image_path;
    out += ',';
    out += format_double(row.pupil_mm);
    out += ',';
    out += format_double(row.distance_m);
    out += ',';
    out += format_double(row.aberrations);
    out += ',';
    if (row.ser) out += format_double(*row.ser);
    out += '\n';
  }
  return out;
}

/// Observation for rows whose lighting is already resolved to lux.
inline NearWorkObservation to_observation(const ObservationFileRow& row) {
  if (!row.lux)
    throw Error(errc::conflicting_lighting_source,
                "row '" + row.subject_id + "' carries an image path, not a lux value");
  NearWorkObservation obs;
  obs.near_work = row.near_work;
  obs.duration_min = row.t_min;
  obs.lux = *row.lux;
  obs.pupil_mm = row.pupil_mm;
  obs.distance_m = row.distance_m;
  obs.aberrations = row.aberrations;
  obs.ser = row.ser;
  return obs;
}

/// Baseline CSV with columns age_lo,age_hi,al0,p0,m0,w0.
inline BaselineTable parse_baselines(std::string_view text) {
  const std::vector<std::string_view> lines = detail::split_lines(text);
  if (lines.empty()) throw ParseError(errc::missing_column, "empty input, header expected", 1);
  const std::vector<std::string> required = {"age_lo", "age_hi", "al0", "p0", "m0", "w0"};
  const auto index = detail::header_index(lines[0], required);

  std::vector<AgeGroupBaseline> groups;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (detail::trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = detail::row_fields(lines[i], line_no, index.size());
    AgeGroupBaseline g;
    g.age_lo = detail::parse_int(fields[index.at("age_lo")], line_no, "age_lo");
    g.age_hi = detail::parse_int(fields[index.at("age_hi")], line_no, "age_hi");
    g.al0 = detail::parse_double(fields[index.at("al0")], line_no, "al0");
    g.p0 = detail::parse_double(fields[index.at("p0")], line_no, "p0");
    g.m0 = detail::parse_double(fields[index.at("m0")], line_no, "m0");
    g.w0 = detail::parse_double(fields[index.at("w0")], line_no, "w0");
    groups.push_back(g);
  }
  return make_baseline_table(std::move(groups));
}

inline constexpr std::string_view kReferenceTableHeader =
    "age,n,t_min,lux,pupil_mm,m_printed,distance_m,aberrations,ar_printed,vr_printed,o_printed,"
    "ser";

/// Transcribed reference table: raw inputs plus printed computed columns.
inline std::vector<ReferenceTableRow> parse_reference_table(std::string_view text) {
  const std::vector<std::string_view> lines = detail::split_lines(text);
  if (lines.empty()) throw ParseError(errc::missing_column, "empty input, header expected", 1);
  const std::vector<std::string> required = {"age",        "n",          "t_min",
                                             "lux",        "pupil_mm",   "m_printed",
                                             "distance_m", "aberrations", "ar_printed",
                                             "vr_printed", "o_printed",  "ser"};
  const auto index = detail::header_index(lines[0], required);

  std::vector<ReferenceTableRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (detail::trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = detail::row_fields(lines[i], line_no, index.size());
    const auto num = [&](const char* name) {
      return detail::parse_double(fields[index.at(name)], line_no, name);
    };
    ReferenceTableRow row;
    row.age = num("age");
    row.n = num("n");
    row.t = num("t_min");
    row.l = num("lux");
    row.p = num("pupil_mm");
    row.m_printed = num("m_printed");
    row.d = num("distance_m");
    row.w = num("aberrations");
    row.ar_printed = num("ar_printed");
    row.vr_printed = num("vr_printed");
    row.o_printed = num("o_printed");
    const std::string& ser_field = fields[index.at("ser")];
    if (!ser_field.empty()) row.ser = detail::parse_double(ser_field, line_no, "ser");
    rows.push_back(row);
  }
  return rows;
}

/// Flat key=value configuration. Recognized keys: theta, elongation_mode
/// (literal|unit), luminance_gain, luminance_offset, l0_levels (comma list).
/// Blank lines and lines starting with '#' are skipped.
inline ModelConfig parse_model_config(std::string_view text) {
  ModelConfig cfg;
  const std::vector<std::string_view> lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const std::string_view line = detail::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(errc::bad_config, "expected key=value", line_no);
    const std::string key{detail::trim(line.substr(0, eq))};
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (key == "theta") {
      cfg.theta = detail::parse_double(value, line_no, key);
    } else if (key == "elongation_mode") {
      if (value == "literal")
        cfg.elongation_mode = ElongationMode::Literal;
      else if (value == "unit")
        cfg.elongation_mode = ElongationMode::UnitCoefficient;
      else
        throw ParseError(errc::bad_config,
                         "elongation_mode must be 'literal' or 'unit', got '" +
                             std::string(value) + "'",
                         line_no);
    } else if (key == "luminance_gain") {
      cfg.luminance_gain = detail::parse_double(value, line_no, key);
    } else if (key == "luminance_offset") {
      cfg.luminance_offset = detail::parse_double(value, line_no, key);
    } else if (key == "l0_levels") {
      cfg.l0_levels.clear();
      for (const std::string& item : detail::split_fields(value))
        cfg.l0_levels.push_back(detail::parse_double(item, line_no, key));
    } else {
      throw ParseError(errc::bad_config, "unknown key '" + key + "'", line_no);
    }
  }
  validate(cfg);
  return cfg;
}

}  // namespace evl
