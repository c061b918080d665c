#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rdc/digest.hpp"
#include "rdc/render.hpp"
#include "support.hpp"

#include <cmath>
#include <fstream>

using namespace rdc;
using rdc::testing::Rng;

namespace {

SimState64 random_state(Rng& rng, int w, int h) {
  const OregonatorParams p;
  SimState64 s = quiescent_state(Field64(w, h, p.phi_active), p);
  for (double& x : s.u.values()) x = testing::uniform_real(rng, -0.2, 1.2);
  for (double& x : s.v.values()) x = testing::uniform_real(rng, -0.2, 1.2);
  return s;
}

SubstrateMask random_mask(Rng& rng, int w, int h) {
  SubstrateMask m(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (testing::uniform_int(rng, 0, 2) == 0) m.apply_stroke({StrokeKind::freehand, {{x, y}}, 1, StrokeMode::add});
    }
  }
  return m;
}

}  // namespace

TEST_CASE("intensity") {
  CHECK(intensity(0.0) == 0);
  CHECK(intensity(1.0) == 255);
  CHECK(intensity(-0.3) == 0);
  CHECK(intensity(7.0) == 255);
  CHECK(intensity(0.5) == 128);
  CHECK(intensity(0.2) == 51);
  CHECK(intensity(std::nextafter(0.5 / 255.0, 0.0)) == 0);
  CHECK(intensity(0.5 / 255.0 + 1e-12) == 1);
}

TEST_CASE("snapshot colours") {
  const OregonatorParams p;
  SimState64 s = quiescent_state(Field64(3, 3, p.phi_active), p);
  s.u(0, 0) = 1.0;
  s.v(0, 0) = 0.0;
  s.u(1, 0) = 0.0;
  s.v(1, 0) = 1.0;
  s.u(2, 0) = 0.0;
  s.v(2, 0) = 0.0;
  SubstrateMask m(3, 3);
  m.apply_stroke({StrokeKind::freehand, {{2, 0}}, 1, StrokeMode::add});
  const RGBImage img = render_snapshot(s, m);
  const std::vector<std::uint8_t> want{255, 0, 0, 0, 0, 255, 0, 255, 0};
  CHECK(std::vector<std::uint8_t>(img.bytes().begin(), img.bytes().begin() + 9) == want);
}

TEST_CASE("property: snapshot is a per-pixel function of u, v, mask") {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const int w = testing::uniform_int(rng, 3, 20), h = testing::uniform_int(rng, 3, 20);
    const SimState64 s = random_state(rng, w, h);
    const SubstrateMask m = random_mask(rng, w, h);
    const SimState64 copy = s;
    const RGBImage img = render_snapshot(s, m);
    CHECK(s == copy);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::uint8_t* px = img.pixel(x, y);
        CHECK(px[0] == intensity(s.u(x, y)));
        CHECK(px[1] == (m.at(x, y) ? 255 : 0));
        CHECK(px[2] == intensity(s.v(x, y)));
      }
    }
  }
}

TEST_CASE("timelapse examples") {
  const OregonatorParams p;
  SUBCASE("a single record equals the snapshot's red channel") {
    SimState64 s = quiescent_state(Field64(3, 3, p.phi_active), p);
    s.u(1, 1) = 0.8;
    TimelapseAccumulator acc(3, 3);
    acc.record(s);
    const RGBImage img = render_timelapse(acc, SubstrateMask(3, 3));
    const RGBImage snap = render_snapshot(s, SubstrateMask(3, 3));
    for (int y = 0; y < 3; ++y) {
      for (int x = 0; x < 3; ++x) {
        CHECK(img.pixel(x, y)[0] == snap.pixel(x, y)[0]);
        CHECK(img.pixel(x, y)[2] == 0);
      }
    }
  }
  SUBCASE("maximum survives a later lower value") {
    SimState64 s = quiescent_state(Field64(3, 3, p.phi_active), p);
    TimelapseAccumulator acc(3, 3);
    s.u(0, 0) = 0.9;
    acc.record(s);
    s.u(0, 0) = 0.1;
    acc.record(s);
    CHECK(acc.max_u()(0, 0) == 0.9);
    CHECK(acc.samples_taken() == 2);
  }
  SUBCASE("negative first sample is kept") {
    SimState64 s = quiescent_state(Field64(3, 3, p.phi_active), p);
    s.u(0, 0) = -0.05;
    TimelapseAccumulator acc(3, 3);
    acc.record(s);
    CHECK(acc.max_u()(0, 0) == -0.05);
  }
  SUBCASE("mismatched extents and stride") {
    TimelapseAccumulator acc(3, 3);
    CHECK_THROWS_AS(acc.record(quiescent_state(Field64(4, 3, p.phi_active), p)), ValidationError);
    CHECK_THROWS_AS(TimelapseAccumulator(3, 3, 0), ValidationError);
  }
}

TEST_CASE("property: timelapse equals the brute-force maximum") {
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    const int w = testing::uniform_int(rng, 3, 16), h = testing::uniform_int(rng, 3, 16);
    const int n = testing::uniform_int(rng, 1, 12);
    std::vector<SimState64> states;
    TimelapseAccumulator acc(w, h);
    for (int k = 0; k < n; ++k) {
      states.push_back(random_state(rng, w, h));
      acc.record(states.back());
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double best = states[0].u(x, y);
        for (const SimState64& s : states) best = std::max(best, s.u(x, y));
        CHECK(acc.max_u()(x, y) == best);
      }
    }
    // Order does not matter.
    TimelapseAccumulator reversed(w, h);
    for (auto it = states.rbegin(); it != states.rend(); ++it) reversed.record(*it);
    CHECK(reversed.max_u() == acc.max_u());
  }
}

TEST_CASE("upscale") {
  RGBImage img(2, 1);
  img.pixel(0, 0)[0] = 10;
  img.pixel(1, 0)[2] = 20;
  const RGBImage big = upscale(img, 2);
  REQUIRE(big.width() == 4);
  REQUIRE(big.height() == 2);
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 4; ++x) {
      const std::uint8_t* src = img.pixel(x / 2, 0);
      CHECK(std::equal(src, src + 3, big.pixel(x, y)));
    }
  }
  CHECK(upscale(img, 1) == img);
  CHECK_THROWS_AS(upscale(img, 0), ValidationError);
}

TEST_CASE("PNG round trip and stable bytes") {
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const int w = testing::uniform_int(rng, 1, 40), h = testing::uniform_int(rng, 1, 40);
    RGBImage img(w, h);
    for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(testing::uniform_int(rng, 0, 255));
    const auto png = encode_png(img);
    CHECK(decode_png(png) == img);
    CHECK(encode_png(img) == png);
  }
  CHECK_THROWS(decode_png({1, 2, 3, 4}));
}

TEST_CASE("PNG files") {
  testing::TempDir dir("render");
  RGBImage img(5, 4);
  img.pixel(3, 2)[1] = 200;
  const auto path = dir.path() / "a.png";
  write_png(img, path);
  CHECK(read_png(path) == img);
  std::ifstream in(path, std::ios::binary);
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
  CHECK(bytes == encode_png(img));
  CHECK(sha256_file(path) == sha256_hex(encode_png(img)));
}

TEST_CASE("image file names") {
  CHECK(image_file_name("ab12", 300, ImageKind::snapshot) == "ab12-300-snapshot.png");
  CHECK(image_file_name("ab12", 0, ImageKind::timelapse) == "ab12-0-timelapse.png");
}

TEST_CASE("digests") {
  CHECK(sha256_hex(std::string_view("abc")) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex(std::string_view("")) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const OregonatorParams p;
  SimState32 a = quiescent_state(Field32(4, 4, 0.05f), p);
  SimState32 b = a;
  CHECK(field_checksum(a) == field_checksum(b));
  b.v(3, 3) = std::nextafter(b.v(3, 3), 1.0f);
  CHECK(field_checksum(a) != field_checksum(b));
  b = a;
  b.step = 99;
  CHECK(field_checksum(a) == field_checksum(b));
}
