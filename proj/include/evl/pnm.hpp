#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "evl/errors.hpp"
#include "evl/model.hpp"

namespace evl {

/// Decoded image reduced to relative luminance, one sample per pixel in [0, 1].
struct GrayscaleImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> samples;

  bool operator==(const GrayscaleImage&) const = default;
};

namespace pnm_detail {

// Rec. 709 luma weights; they sum to exactly 1, so a saturated white pixel
// maps to exactly 1.0 when each channel is normalized before weighting.
inline constexpr double kRedWeight = 0.2126;
inline constexpr double kGreenWeight = 0.7152;
inline constexpr double kBlueWeight = 0.0722;

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

/// Cursor over the ASCII header region. '#' starts a comment running to
/// end-of-line, which counts as whitespace.
struct Cursor {
  std::string_view data;
  std::size_t pos = 0;

  void skip_space_and_comments() {
    while (pos < data.size()) {
      if (is_space(data[pos])) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  }

  std::string_view next_token() {
    skip_space_and_comments();
    const std::size_t start = pos;
    while (pos < data.size() && !is_space(data[pos]) && data[pos] != '#') ++pos;
    if (pos == start) throw Error(errc::truncated_data, "header ended early");
    return data.substr(start, pos - start);
  }

  unsigned next_uint(const char* what) {
    const std::string_view tok = next_token();
    unsigned value = 0;
    for (const char c : tok) {
      if (c < '0' || c > '9')
        throw Error(errc::bad_numeric,
                    std::string(what) + " '" + std::string(tok) + "' is not a non-negative integer");
      const unsigned digit = static_cast<unsigned>(c - '0');
      if (value > (0xffffffffu - digit) / 10u)
        throw Error(errc::bad_numeric, std::string(what) + " overflows");
      value = value * 10u + digit;
    }
    return value;
  }
};

}  // namespace pnm_detail

/// Decodes PGM/PPM bytes (magic P2, P3, P5, or P6) into relative-luminance
/// samples. Binary payloads use one byte per channel value, or two
/// big-endian bytes when maxval exceeds 255.
inline GrayscaleImage decode_pnm(std::string_view bytes) {
  using pnm_detail::Cursor;
  if (bytes.size() < 2 || bytes[0] != 'P')
    throw Error(errc::bad_magic, "not a PNM stream");
  const char kind = bytes[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6')
    throw Error(errc::bad_magic, std::string("unsupported magic 'P") + kind + "'");
  const bool color = (kind == '3' || kind == '6');
  const bool binary = (kind == '5' || kind == '6');

  Cursor cur{bytes, 2};
  const std::size_t width = cur.next_uint("width");
  const std::size_t height = cur.next_uint("height");
  const unsigned maxval = cur.next_uint("maxval");
  if (maxval < 1 || maxval > 65535)
    throw Error(errc::bad_maxval, "maxval " + std::to_string(maxval) + " outside [1, 65535]");

  const std::size_t pixels = width * height;
  const std::size_t channels = color ? 3 : 1;
  const std::size_t values = pixels * channels;
  std::vector<double> raw;
  raw.reserve(values);

  if (binary) {
    // Exactly one whitespace byte separates the header from the payload.
    if (cur.pos >= bytes.size() || !pnm_detail::is_space(bytes[cur.pos]))
      throw Error(errc::truncated_data, "missing separator before binary payload");
    std::size_t at = cur.pos + 1;
    const std::size_t stride = maxval > 255 ? 2 : 1;
    if (bytes.size() - at < values * stride)
      throw Error(errc::truncated_data,
                  "payload holds " + std::to_string((bytes.size() - at) / stride) +
                      " values, expected " + std::to_string(values));
    for (std::size_t i = 0; i < values; ++i) {
      unsigned v = static_cast<std::uint8_t>(bytes[at]);
      if (stride == 2) v = (v << 8) | static_cast<std::uint8_t>(bytes[at + 1]);
      at += stride;
      if (v > maxval)
        throw Error(errc::bad_numeric,
                    "sample " + std::to_string(v) + " exceeds maxval " + std::to_string(maxval));
      raw.push_back(static_cast<double>(v));
    }
  } else {
    for (std::size_t i = 0; i < values; ++i) {
      const unsigned v = cur.next_uint("sample");
      if (v > maxval)
        throw Error(errc::bad_numeric,
                    "sample " + std::to_string(v) + " exceeds maxval " + std::to_string(maxval));
      raw.push_back(static_cast<double>(v));
    }
  }

  GrayscaleImage img;
  img.width = width;
  img.height = height;
  img.samples.reserve(pixels);
  const double scale = static_cast<double>(maxval);
  for (std::size_t p = 0; p < pixels; ++p) {
    if (color) {
      img.samples.push_back(pnm_detail::kRedWeight * (raw[3 * p] / scale) +
                            pnm_detail::kGreenWeight * (raw[3 * p + 1] / scale) +
                            pnm_detail::kBlueWeight * (raw[3 * p + 2] / scale));
    } else {
      img.samples.push_back(raw[p] / scale);
    }
  }
  return img;
}

/// Linear illuminance estimate from mean image luminance:
/// lux = gain * mean(samples) + offset. The estimate must land positive to
/// be usable as a lighting level downstream. Samples are summed in sorted
/// order so the estimate is exactly invariant under pixel permutation.
inline double estimate_lux(const GrayscaleImage& img, const ModelConfig& cfg) {
  if (img.samples.empty()) throw Error(errc::empty_image, "image has no pixels");
  if (!(cfg.luminance_gain > 0.0))
    throw Error(errc::invalid_domain, "luminance gain must be positive");
  std::vector<double> ordered = img.samples;
  std::sort(ordered.begin(), ordered.end());
  double sum = 0.0;
  for (const double s : ordered) sum += s;
  const double mean = sum / static_cast<double>(ordered.size());
  const double lux = cfg.luminance_gain * mean + cfg.luminance_offset;
  if (!(lux > 0.0))
    throw Error(errc::nonpositive_estimate,
                "estimated illuminance " + std::to_string(lux) + " lux is not positive");
  return lux;
}

}  // namespace evl
