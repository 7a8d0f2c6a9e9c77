#include <random>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "evl/pnm.hpp"

using Catch::Matchers::WithinRel;

namespace {

std::string bytes(std::initializer_list<unsigned> values) {
  std::string out;
  for (unsigned v : values) out.push_back(static_cast<char>(v));
  return out;
}

}  // namespace

TEST_CASE("ascii grayscale decoding is exact") {
  const evl::GrayscaleImage img = evl::decode_pnm("P2\n2 2\n255\n0 255\n128 64\n");
  CHECK(img.width == 2);
  CHECK(img.height == 2);
  REQUIRE(img.samples.size() == 4);
  CHECK(img.samples[0] == 0.0);
  CHECK(img.samples[1] == 1.0);
  CHECK(img.samples[2] == 128.0 / 255.0);
  CHECK(img.samples[3] == 64.0 / 255.0);
}

TEST_CASE("binary grayscale decoding matches the ascii form bit for bit") {
  const evl::GrayscaleImage ascii = evl::decode_pnm("P2\n2 2\n255\n0 255 128 64\n");
  const evl::GrayscaleImage binary =
      evl::decode_pnm("P5\n2 2\n255\n" + bytes({0, 255, 128, 64}));
  CHECK(ascii == binary);
}

TEST_CASE("color decoding applies the luminance weights to normalized channels") {
  // white, red, green, blue
  const evl::GrayscaleImage img = evl::decode_pnm(
      "P3\n2 2\n255\n"
      "255 255 255  255 0 0\n"
      "0 255 0  0 0 255\n");
  REQUIRE(img.samples.size() == 4);
  CHECK(img.samples[0] == 1.0);  // weights sum to exactly 1
  CHECK(img.samples[1] == 0.2126);
  CHECK(img.samples[2] == 0.7152);
  CHECK(img.samples[3] == 0.0722);

  const evl::GrayscaleImage binary = evl::decode_pnm(
      "P6\n2 2\n255\n" + bytes({255, 255, 255, 255, 0, 0, 0, 255, 0, 0, 0, 255}));
  CHECK(img == binary);
}

TEST_CASE("wide samples use two big-endian bytes per value") {
  const evl::GrayscaleImage img =
      evl::decode_pnm("P5\n2 1\n65535\n" + bytes({0xff, 0xff, 0x01, 0x00}));
  REQUIRE(img.samples.size() == 2);
  CHECK(img.samples[0] == 1.0);
  CHECK(img.samples[1] == 256.0 / 65535.0);

  // The same values in ascii decode identically.
  const evl::GrayscaleImage ascii = evl::decode_pnm("P2\n2 1\n65535\n65535 256\n");
  CHECK(img == ascii);
}

TEST_CASE("header comments are whitespace") {
  const evl::GrayscaleImage img =
      evl::decode_pnm("P2 # magic\n# a comment line\n2 1 # size\n255\n10 20\n");
  CHECK(img.width == 2);
  CHECK(img.samples[0] == 10.0 / 255.0);
}

TEST_CASE("malformed streams are rejected by kind") {
  const auto code_of = [](const std::string& data) {
    try {
      evl::decode_pnm(data);
      return evl::errc{};
    } catch (const evl::Error& e) {
      return e.code();
    }
  };
  CHECK(code_of("P7\n1 1\n255\n0\n") == evl::errc::bad_magic);
  CHECK(code_of("X5\n1 1\n255\n0\n") == evl::errc::bad_magic);
  CHECK(code_of("") == evl::errc::bad_magic);
  CHECK(code_of("P2\n2 2\n0\n0 0 0 0\n") == evl::errc::bad_maxval);
  CHECK(code_of("P2\n2 2\n70000\n0 0 0 0\n") == evl::errc::bad_maxval);
  CHECK(code_of("P2\n2 2\n255\n0 0 0\n") == evl::errc::truncated_data);      // missing sample
  CHECK(code_of("P5\n2 2\n255\n" + bytes({0, 0, 0})) == evl::errc::truncated_data);
  CHECK(code_of("P2\n2 2\n255\n0 0 0 300\n") == evl::errc::bad_numeric);     // above maxval
  CHECK(code_of("P2\n2 2\n255\n0 0 0 -3\n") == evl::errc::bad_numeric);
  CHECK(code_of("P2\n2 2\n") == evl::errc::truncated_data);                  // header cut short
}

TEST_CASE("illuminance estimation is affine in the mean sample") {
  evl::ModelConfig cfg;
  cfg.luminance_gain = 1000.0;
  cfg.luminance_offset = 7.0;
  const evl::GrayscaleImage img{2, 2, {0.0, 0.5, 0.25, 0.25}};
  CHECK_THAT(evl::estimate_lux(img, cfg), WithinRel(1000.0 * 0.25 + 7.0, 1e-15));
}

TEST_CASE("illuminance estimation rejects empty or degenerate inputs") {
  evl::ModelConfig cfg;
  try {
    evl::estimate_lux(evl::GrayscaleImage{}, cfg);
    FAIL("expected an empty-image error");
  } catch (const evl::Error& e) {
    CHECK(e.code() == evl::errc::empty_image);
  }

  cfg.luminance_gain = -1.0;
  try {
    evl::estimate_lux(evl::GrayscaleImage{1, 1, {0.5}}, cfg);
    FAIL("expected an invalid-domain error");
  } catch (const evl::Error& e) {
    CHECK(e.code() == evl::errc::invalid_domain);
  }

  // An all-black image maps to zero lux, which the model cannot consume.
  cfg = evl::ModelConfig{};
  try {
    evl::estimate_lux(evl::GrayscaleImage{2, 1, {0.0, 0.0}}, cfg);
    FAIL("expected a nonpositive-estimate error");
  } catch (const evl::Error& e) {
    CHECK(e.code() == evl::errc::nonpositive_estimate);
  }
}

TEST_CASE("illuminance estimation ignores pixel order") {
  std::mt19937 rng(77031u);
  std::uniform_real_distribution<double> sample(0.0, 1.0);
  evl::ModelConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    evl::GrayscaleImage img;
    img.width = 16;
    img.height = 16;
    for (std::size_t i = 0; i < img.width * img.height; ++i)
      img.samples.push_back(sample(rng));
    const double reference = evl::estimate_lux(img, cfg);
    for (int shuffle = 0; shuffle < 4; ++shuffle) {
      std::shuffle(img.samples.begin(), img.samples.end(), rng);
      CHECK(evl::estimate_lux(img, cfg) == reference);
    }
  }
}
