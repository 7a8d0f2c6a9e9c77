#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evl {

/// Every failure the library can raise, by name. The split between model
/// domain errors and input validation errors is what drives process exit
/// codes in the CLI (3 vs 2), see is_domain_error().
enum class errc {
  // model domain
  degenerate_distance,              // d in {1, -1}: resting-point denominator is zero
  degenerate_convergence,           // V = 0 in the elongation term
  nonpositive_lighting,             // L <= 0: lighting model divides by L
  degenerate_convergence_response,  // VR = 0 in the EVL ratio
  invalid_domain,                   // input outside the modelled domain
  empty_image,
  nonpositive_estimate,             // lux estimate must be positive
  insufficient_data,                // trend association needs >= 3 pairs
  // input validation
  invalid_threshold,  // theta outside (0, 1)
  out_of_range_age,
  missing_column,
  bad_numeric,
  invalid_near_work_type,
  conflicting_lighting_source,
  overlapping_ranges,
  bad_config,
  invalid_sweep_spec,
  bad_magic,
  truncated_data,
  bad_maxval,
};

inline const char* error_name(errc code) {
  switch (code) {
    case errc::degenerate_distance: return "DegenerateDistance";
    case errc::degenerate_convergence: return "DegenerateConvergence";
    case errc::nonpositive_lighting: return "NonpositiveLighting";
    case errc::degenerate_convergence_response: return "DegenerateConvergenceResponse";
    case errc::invalid_domain: return "InvalidDomain";
    case errc::empty_image: return "EmptyImage";
    case errc::nonpositive_estimate: return "NonpositiveEstimate";
    case errc::insufficient_data: return "InsufficientData";
    case errc::invalid_threshold: return "InvalidThreshold";
    case errc::out_of_range_age: return "OutOfRange";
    case errc::missing_column: return "MissingColumn";
    case errc::bad_numeric: return "BadNumeric";
    case errc::invalid_near_work_type: return "InvalidNearWorkType";
    case errc::conflicting_lighting_source: return "ConflictingLightingSource";
    case errc::overlapping_ranges: return "OverlappingRanges";
    case errc::bad_config: return "BadConfig";
    case errc::invalid_sweep_spec: return "InvalidSweepSpec";
    case errc::bad_magic: return "BadMagic";
    case errc::truncated_data: return "TruncatedData";
    case errc::bad_maxval: return "BadMaxval";
  }
  return "UnknownError";
}

/// True for errors raised by the model itself on inputs that are
/// syntactically fine but outside the equations' domain. False for
/// file/flag/config validation problems.
inline bool is_domain_error(errc code) {
  switch (code) {
    case errc::degenerate_distance:
    case errc::degenerate_convergence:
    case errc::nonpositive_lighting:
    case errc::degenerate_convergence_response:
    case errc::invalid_domain:
    case errc::empty_image:
    case errc::nonpositive_estimate:
    case errc::insufficient_data:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

/// Validation error with the 1-based input line and, when known, the column
/// name attached.
class ParseError : public Error {
 public:
  ParseError(errc code, const std::string& message, std::size_t line, std::string column = {})
      : Error(code, message + " (line " + std::to_string(line) +
                        (column.empty() ? std::string() : ", column '" + column + "'") + ")"),
        line_(line),
        column_(std::move(column)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::string column_;
};

}  // namespace evl
