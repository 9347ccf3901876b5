#include <doctest.h>

#include <random>

#include "keymps/error.hpp"
#include "keymps/perception.hpp"
#include "support.hpp"

using namespace keymps;
using keymps::testing::rectangle_image;

namespace {

bool within(const BoundingBox& got, const BoundingBox& want, int tol) {
  return std::abs(got.x - want.x) <= tol && std::abs(got.y - want.y) <= tol &&
         std::abs(got.x + got.w - want.x - want.w) <= tol && std::abs(got.y + got.h - want.y - want.h) <= tol;
}

GrayImage inverted(GrayImage img) {
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(255 - p);
  return img;
}

}  // namespace

TEST_CASE("uniform image has no object") {
  try {
    detect_object(GrayImage(64, 48, 128));
    FAIL("expected NoObjectFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoObjectFound);
  }
}

TEST_CASE("rectangle fixture is found within two pixels") {
  const GrayImage img = rectangle_image(100, 100, 200, 40, 35, 20, 30, 50);
  const Detection d = detect_object(img, {.threshold_delta = 30, .blur_sigma = 1.0});
  CHECK(within(d.box, {40, 35, 20, 30}, 2));
  CHECK(d.background == 200);
}

TEST_CASE("no blur recovers the exact box") {
  const GrayImage img = rectangle_image(100, 80, 200, 12, 7, 33, 21, 60);
  const Detection d = detect_object(img, {.threshold_delta = 30, .blur_sigma = 0.0});
  CHECK(d.box == BoundingBox{12, 7, 33, 21});
  CHECK(d.area == 33 * 21);
}

TEST_CASE("largest blob wins") {
  GrayImage img = rectangle_image(120, 120, 200, 10, 10, 20, 25, 40);  // 500 px
  for (int y = 80; y < 88; ++y) {
    for (int x = 80; x < 90; ++x) img.at(x, y) = 40;  // 80 px
  }
  const Detection d = detect_object(img, {.blur_sigma = 0.0});
  CHECK(d.box == BoundingBox{10, 10, 20, 25});
}

TEST_CASE("diagonal neighbours join one component") {
  GrayImage img(40, 40, 200);
  for (int i = 0; i < 20; ++i) img.at(10 + i, 10 + i) = 0;
  const Detection d = detect_object(img, {.blur_sigma = 0.0, .min_area = 10});
  CHECK(d.box == BoundingBox{10, 10, 20, 20});
  CHECK(d.area == 20);
}

TEST_CASE("components below min_area are ignored") {
  const GrayImage img = rectangle_image(50, 50, 200, 5, 5, 4, 4, 0);
  CHECK_THROWS_AS(detect_object(img, {.blur_sigma = 0.0, .min_area = 25}), Error);
  CHECK_NOTHROW(detect_object(img, {.blur_sigma = 0.0, .min_area = 16}));
}

TEST_CASE("crop matches the box and the source pixels") {
  GrayImage img = rectangle_image(90, 70, 180, 20, 15, 30, 25, 30);
  for (int y = 15; y < 40; ++y) {
    for (int x = 20; x < 50; ++x) img.at(x, y) = static_cast<std::uint8_t>(20 + (x * 7 + y * 3) % 40);
  }
  const Detection d = detect_object(img);
  REQUIRE(d.crop.width == d.box.w);
  REQUIRE(d.crop.height == d.box.h);
  for (int y = 0; y < d.box.h; ++y) {
    for (int x = 0; x < d.box.w; ++x) REQUIRE(d.crop.at(x, y) == img.at(d.box.x + x, d.box.y + y));
  }
}

TEST_CASE("inversion and translation leave the box consistent") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> pos(5, 60);
  std::uniform_int_distribution<int> side(8, 30);
  for (int trial = 0; trial < 25; ++trial) {
    const int x = pos(rng), y = pos(rng), w = side(rng), h = side(rng);
    const GrayImage img = rectangle_image(100, 100, 190, x, y, w, h, 70);
    const Detection base = detect_object(img);
    CHECK(detect_object(inverted(img)).box == base.box);

    const int dx = 3, dy = -4;
    const GrayImage moved = rectangle_image(100, 100, 190, x + dx, y + dy, w, h, 70);
    const BoundingBox shifted = detect_object(moved).box;
    CHECK(shifted.x == base.box.x + dx);
    CHECK(shifted.y == base.box.y + dy);
    CHECK(shifted.w == base.box.w);
    CHECK(shifted.h == base.box.h);
  }
}

TEST_CASE("histogram mode prefers the lower intensity on ties") {
  const std::vector<float> values{10.f, 10.f, 12.f, 12.f, 200.f};
  CHECK(histogram_mode(values) == 10);
  const std::vector<float> rounded{9.6f, 10.4f, 11.0f};
  CHECK(histogram_mode(rounded) == 10);
}

TEST_CASE("blur keeps a constant image constant") {
  const auto out = gaussian_blur(GrayImage(16, 9, 77), 2.0);
  for (float v : out) CHECK(v == doctest::Approx(77.0f));
}

TEST_CASE("invalid configurations are rejected") {
  const GrayImage img = rectangle_image(30, 30, 200, 5, 5, 10, 10, 0);
  CHECK_THROWS_AS(detect_object(img, {.threshold_delta = -1.0}), Error);
  CHECK_THROWS_AS(detect_object(img, {.blur_sigma = -0.5}), Error);
  CHECK_THROWS_AS(detect_object(GrayImage()), Error);
  CHECK_THROWS_AS(crop(img, {25, 25, 10, 10}), Error);
}
