#include <doctest.h>

#include "keymps/error.hpp"
#include "keymps/perception.hpp"
#include "keymps/primitives.hpp"
#include "keymps/scenario.hpp"

using namespace keymps;

namespace {

Scenario eggplant(double length, int cuts) {
  Scenario s;
  s.id = "t";
  s.object = "eggplant";
  s.size = {length, 0.06, 0.05};
  s.instruction = "cut it";
  s.pattern = PatternKind::VerticalCuts;
  s.count = cuts;
  return s;
}

}  // namespace

TEST_CASE("vertical cuts are evenly spaced from the near edge") {
  const Scenario s = eggplant(0.20, 3);
  const auto segs = expand_pattern(s);
  REQUIRE(segs.size() == 3);
  const double near = s.object_min().x();
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(segs[i].first.x() - near == doctest::Approx(0.05 * (i + 1)).epsilon(1e-12));
    CHECK(segs[i].second.x() == segs[i].first.x());
    CHECK(segs[i].second.y() - segs[i].first.y() == doctest::Approx(0.06));
  }
}

TEST_CASE("a single vertical cut sits mid-length") {
  for (double length : {0.08, 0.13, 0.25}) {
    const Scenario s = eggplant(length, 1);
    const auto segs = expand_pattern(s);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].first.x() == doctest::Approx(s.object_center().x()));
  }
}

TEST_CASE("pie cuts are diameters through the centre") {
  Scenario s = eggplant(0.16, 8);
  s.shape = ObjectShape::Round;
  s.size = {0.16, 0.16, 0.02};
  s.pattern = PatternKind::PieCuts;
  const auto segs = expand_pattern(s);
  REQUIRE(segs.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const Vec2 mid = (segs[i].first + segs[i].second) / 2.0;
    CHECK((mid - s.object_center()).norm() < 1e-12);
    const Vec2 d = segs[i].second - segs[i].first;
    CHECK(d.norm() == doctest::Approx(0.16));
    CHECK(std::atan2(d.y(), d.x()) == doctest::Approx(std::numbers::pi / 4.0 * static_cast<double>(i)));
  }
}

TEST_CASE("ground truth params apply the height rule") {
  const Scenario s = eggplant(0.20, 3);
  const auto params = ground_truth_params(s, {.margin = 0.02});
  REQUIRE(params.size() == 3);
  for (const auto& p : params) {
    CHECK(p.y0.z() == doctest::Approx(0.07));
    CHECK(p.y_goal.z() == 0.0);
  }
}

TEST_CASE("inconsistent scenarios are rejected") {
  auto expect_bad = [](const Scenario& s) {
    try {
      s.validate();
      FAIL("expected BadScenario");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadScenario);
    }
  };
  Scenario s = eggplant(0.20, 0);
  expect_bad(s);
  s = eggplant(-0.1, 2);
  expect_bad(s);
  s = eggplant(0.40, 2);  // longer than the board
  expect_bad(s);
  s = eggplant(0.2, 2);
  s.pattern = PatternKind::Custom;
  expect_bad(s);
}

TEST_CASE("builtin catalog is valid and round trips") {
  const auto catalog = builtin_catalog();
  CHECK(catalog.size() == 15);
  for (const auto& s : catalog) CHECK_NOTHROW(s.validate());
  CHECK(find_scenario(catalog, "7").size.x() == doctest::Approx(0.20));
  CHECK(find_scenario(catalog, "7").count == 3);
  CHECK_THROWS_AS(find_scenario(catalog, "99"), Error);
  const auto back = catalog_from_json(catalog_to_json(catalog));
  CHECK(catalog_to_json(back) == catalog_to_json(catalog));
  CHECK_THROWS_AS(catalog_from_json("{\"cases\": 1}"), Error);
}

TEST_CASE("ground truth starts at home and visits every cut") {
  const Scenario s = eggplant(0.20, 3);
  const PrimitiveDictionary dict = build_builtin_dictionary(20);
  const Trajectory gt = generate_ground_truth(s, dict.at("straight"));
  CHECK((gt.points.front() - default_home(s.board)).norm() < 1e-12);
  const auto params = ground_truth_params(s);
  for (const auto& p : params) {
    double best = 1e9;
    for (const auto& q : gt.points) best = std::min(best, (q - p.y_goal).norm());
    CHECK(best < 1e-3);
  }
}

TEST_CASE("fixture detection recovers the footprint") {
  const Scenario s = eggplant(0.20, 3);
  const GrayImage img = render_fixture(s, 2000.0);
  CHECK(img.width == 600);
  CHECK(img.height == 360);
  const Detection d = detect_object(img);
  CHECK(std::abs(d.box.w - 400) <= 2);
  CHECK(std::abs(d.box.h - 120) <= 2);
  CHECK(std::abs(d.box.x - 100) <= 2);
}
