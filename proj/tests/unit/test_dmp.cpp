#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "keymps/dmp.hpp"
#include "keymps/error.hpp"
#include "keymps/primitives.hpp"
#include "support.hpp"

using namespace keymps;

namespace {

Primitive zero_primitive(int n = 10) {
  Primitive p;
  p.keyword = "zero";
  p.basis = make_basis(n, p.gains.alpha_s, p.gains.tau);
  p.weights = WeightMatrix::Zero(n, 3);
  return p;
}

Trajectory one_axis_min_jerk(int samples = 1000) {
  Trajectory demo;
  demo.dt = 1.0 / (samples - 1);
  for (int i = 0; i < samples; ++i) demo.points.emplace_back(min_jerk(i * demo.dt), 0.0, 0.0);
  return demo;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a keymps::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("make_basis places centers exponentially in phase") {
  const BasisSet two = make_basis(2, 1.0, 1.0);
  CHECK(two.centers[0] == doctest::Approx(1.0));
  CHECK(two.centers[1] == doctest::Approx(0.3678794412).epsilon(1e-9));

  const BasisSet three = make_basis(3, 1.0, 1.0);
  const double c1 = std::exp(-0.5);
  const double c2 = std::exp(-1.0);
  CHECK(three.centers[1] == doctest::Approx(c1).epsilon(1e-14));
  CHECK(three.centers[2] == doctest::Approx(c2).epsilon(1e-14));
  CHECK(three.widths[0] == doctest::Approx(std::pow(3.0, 1.5)).epsilon(1e-14));
  CHECK(three.widths[2] == doctest::Approx(std::pow(3.0, 1.5) / (c2 * c2)).epsilon(1e-14));
  CHECK_NOTHROW(three.validate());

  CHECK(code_of([] { make_basis(1, 1.0, 1.0); }) == ErrorCode::InvalidBasisCount);
}

TEST_CASE("forcing term") {
  SUBCASE("zero weights give zero force") {
    const Primitive p = zero_primitive();
    for (double s : {1.0, 0.5, 1e-3}) CHECK(forcing(p, s).norm() == 0.0);
  }
  SUBCASE("single basis by hand") {
    Primitive p;
    p.basis.centers = {1.0};
    p.basis.widths = {1.0};
    p.weights = WeightMatrix::Zero(1, 3);
    p.weights(0, 0) = 2.0;
    const Vec3 f = forcing(p, 1.0);
    CHECK(f.x() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(f.y() == 0.0);
    CHECK(f.z() == 0.0);
  }
  SUBCASE("vanishes as the phase goes to zero") {
    const Primitive p = learn_from_demo(builtin_demo("sawing"), {}, 50, "sawing");
    CHECK(forcing(p, 1e-6).norm() < 1e-4 * forcing(p, 1.0).norm());
  }
}

TEST_CASE("learn_from_demo") {
  SUBCASE("stationary demo learns zero weights") {
    Trajectory demo;
    demo.dt = 0.01;
    demo.points.assign(100, Vec3(0.1, 0.2, 0.0));
    const Primitive p = learn_from_demo(demo, {}, 20, "still");
    CHECK(p.weights.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(p.gains.tau == doctest::Approx(0.99));
  }
  SUBCASE("too short") {
    Trajectory demo;
    demo.dt = 0.1;
    demo.points = {Vec3::Zero(), Vec3::Ones()};
    CHECK(code_of([&] { learn_from_demo(demo, {}, 10, "x"); }) == ErrorCode::DemoTooShort);
  }
  SUBCASE("overflowing derivatives are degenerate") {
    Trajectory demo;
    demo.dt = 1e-3;
    demo.points = {Vec3::Zero(), Vec3(1e308, 0, 0), Vec3(-1e308, 0, 0), Vec3::Zero()};
    CHECK(code_of([&] { learn_from_demo(demo, {}, 10, "x"); }) == ErrorCode::DegenerateDemo);
  }
  SUBCASE("min-jerk round trip within 2% of amplitude") {
    const Trajectory demo = one_axis_min_jerk();
    const Primitive p = learn_from_demo(demo, {}, 50, "mj");
    const Trajectory out = rollout(p, {demo.points.front(), demo.points.back()}, demo.dt);
    REQUIRE(out.size() == demo.size());
    CHECK(testing::rmse(out.points, demo.points, 0) < 0.02);
  }
  SUBCASE("a sine with non-zero start velocity is out of reach from rest") {
    // A DMP starts with z = 0, so a demo that leaves its start at speed cannot
    // be tracked closely at the beginning.
    Trajectory demo;
    demo.dt = 1.0 / 999;
    for (int i = 0; i < 1000; ++i) demo.points.emplace_back(std::sin(2 * std::numbers::pi * i * demo.dt), 0, 0);
    const Primitive p = learn_from_demo(demo, {}, 50, "sine");
    const Trajectory out = rollout(p, {demo.points.front(), demo.points.back()}, demo.dt);
    CHECK(testing::rmse(out.points, demo.points, 0) > 0.02 * 2.0);
  }
}

TEST_CASE("rollout of a zero-weight primitive matches the closed form") {
  const Primitive p = zero_primitive();
  const Trajectory out = rollout(p, {Vec3::Zero(), Vec3(0, 0, 1)}, 1e-3);
  REQUIRE(out.size() == 1001);
  CHECK(out.points.front() == Vec3::Zero());
  double worst = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double expected = testing::critically_damped(0.0, 1.0, 25.0, 1.0, i * 1e-3);
    worst = std::max(worst, std::abs(out.points[i].z() - expected));
  }
  CHECK(worst < 1e-6);
  CHECK((out.points.back() - Vec3(0, 0, 1)).norm() < 1e-3);
}

TEST_CASE("rollout fixed point and errors") {
  const Primitive p = zero_primitive();
  const Vec3 y(0.1, -0.2, 0.3);
  const Trajectory out = rollout(p, {y, y}, 1e-3);
  double dev = 0.0;
  for (const auto& q : out.points) dev = std::max(dev, (q - y).norm());
  CHECK(dev < 1e-12);

  CHECK(code_of([&] { rollout(p, {y, y}, 0.1); }) == ErrorCode::StepTooCoarse);
  CHECK(code_of([&] { rollout(p, {y, y}, 0.01, 0.1); }) == ErrorCode::StepTooCoarse);
  Primitive wild = p;
  wild.weights.setConstant(std::numeric_limits<double>::max());  // the basis sum overflows
  CHECK(code_of([&] { rollout(wild, {Vec3::Zero(), Vec3::Ones()}, 1e-3); }) == ErrorCode::NumericalDivergence);
}

TEST_CASE("goal convergence improves with a longer horizon") {
  const Primitive p = learn_from_demo(builtin_demo("sawing"), {}, 50, "sawing");
  const ScalingParams sc{Vec3(0.05, 0.02, 0.07), Vec3(0.05, 0.12, 0.0)};
  RolloutOptions one;
  RolloutOptions two;
  two.horizon = 2.0;
  const double r1 = (rollout(p, sc, 1e-3, one).points.back() - sc.y_goal).norm();
  const double r2 = (rollout(p, sc, 1e-3, two).points.back() - sc.y_goal).norm();
  CHECK(r2 <= 0.5 * r1);

  const Primitive z = zero_primitive();
  const ScalingParams far{Vec3::Zero(), Vec3(0.3, 0.1, -0.2)};
  CHECK((rollout(z, far, 1e-3).points.back() - far.y_goal).norm() < 1e-3 * (far.y_goal - far.y0).norm());
}

TEST_CASE("rollout is bit-for-bit deterministic") {
  const Primitive p = learn_from_demo(builtin_demo("forward"), {}, 30, "forward");
  const ScalingParams sc{Vec3(0.1, 0.05, 0.06), Vec3(0.2, 0.1, 0.0)};
  const Trajectory a = rollout(p, sc, 1e-3);
  const Trajectory b = rollout(p, sc, 1e-3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.points[i] == b.points[i]);
}

TEST_CASE("amplitude rescaling and alignment") {
  const Primitive straight = learn_from_demo(builtin_demo("straight"), {}, 50, "straight");

  SUBCASE("factors follow the endpoint ratio with a guard on flat axes") {
    const Vec3 f = amplitude_factors(straight, Vec3(0.2, 0.05, -0.14));
    CHECK(f.x() == doctest::Approx(2.0));
    CHECK(f.y() == 1.0);  // demo has no lateral travel
    CHECK(f.z() == doctest::Approx(2.0));
  }
  SUBCASE("yaw follows the pair direction, identity for point pairs") {
    CHECK(alignment_yaw(straight, {Vec3::Zero(), Vec3(0, 1, 0)}) == doctest::Approx(std::numbers::pi / 2));
    CHECK(alignment_yaw(straight, {Vec3(1, 1, 1), Vec3(1, 1, 0)}) == 0.0);
  }
  SUBCASE("scaled rollout reproduces the demo shape scaled per axis") {
    const Trajectory demo = builtin_demo("straight");
    const Trajectory out = rollout(straight, {Vec3(0, 0, 0.14), Vec3(0.2, 0, 0)}, demo.dt);
    for (std::size_t i = 0; i < demo.size(); i += 50) {
      CHECK(out.points[i].x() == doctest::Approx(2 * demo.points[i].x()).epsilon(0.02).scale(0.2));
      CHECK(out.points[i].z() == doctest::Approx(2 * demo.points[i].z()).epsilon(0.02).scale(0.14));
    }
  }
  SUBCASE("sawing oscillates along a diagonal cut") {
    const Primitive sawing = learn_from_demo(builtin_demo("sawing"), {}, 50, "sawing");
    const Vec3 a(0.05, 0.05, 0.07);
    const Vec3 b(0.15, 0.15, 0.0);
    const Trajectory out = rollout(sawing, {a, b}, 1e-3);
    const Vec2 dir = (b - a).head<2>().normalized();
    const Vec2 across(-dir.y(), dir.x());
    double lateral = 0.0;
    double backwards = 0.0;
    double furthest = 0.0;
    for (const auto& p : out.points) {
      const Vec2 d = (p - a).head<2>();
      lateral = std::max(lateral, std::abs(d.dot(across)));
      const double along = d.dot(dir);
      furthest = std::max(furthest, along);
      backwards = std::max(backwards, furthest - along);
    }
    CHECK(lateral < 1e-9);
    CHECK(backwards > 0.005);  // the stroke pulls back along the cut
  }
}
