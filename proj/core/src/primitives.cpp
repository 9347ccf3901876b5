#include "keymps/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "keymps/error.hpp"

namespace keymps {
namespace {

// Minimum-jerk ramp of t over [a, b].
double ramp(double t, double a, double b) { return min_jerk((t - a) / (b - a)); }

using Profile = std::function<Vec3(double)>;

Profile profile_for(std::string_view keyword, const DemoShape& d) {
  const double L = d.length;
  const double h = d.depth;
  if (keyword == "straight") {
    return [=](double t) { return Vec3(L * min_jerk(t), 0.0, h * (1.0 - min_jerk(t))); };
  }
  if (keyword == "downward") {
    return [=](double t) { return Vec3(L * min_jerk(t), 0.0, h * (1.0 - ramp(t, 0.0, 0.4))); };
  }
  if (keyword == "forward") {
    return [=](double t) { return Vec3(L * min_jerk(t), 0.0, h * (1.0 - ramp(t, 0.2, 1.0))); };
  }
  if (keyword == "sawing") {
    return [=](double t) {
      const double m = min_jerk(t);
      return Vec3(L * m + 0.012 * std::sin(6.0 * std::numbers::pi * m), 0.0, h * (1.0 - m));
    };
  }
  if (keyword == "line") {
    return [=](double t) {
      const double dip = 0.01 * (ramp(t, 0.0, 0.2) - ramp(t, 0.8, 1.0));
      return Vec3(L * ramp(t, 0.2, 0.8), 0.0, -dip);
    };
  }
  throw Error(ErrorCode::InvalidArgument, "no built-in demo named '" + std::string(keyword) + "'");
}

}  // namespace

double min_jerk(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

std::vector<std::string_view> builtin_keywords() { return {"straight", "downward", "forward", "sawing", "line"}; }

std::string_view builtin_description(std::string_view keyword) {
  if (keyword == "straight") return "one smooth slice from above the object down to the board";
  if (keyword == "downward") return "presses down through the object first, then finishes the stroke";
  if (keyword == "forward") return "pushes forward before descending, a slicing stroke for soft skins";
  if (keyword == "sawing") return "back-and-forth sawing along the cut, for hard or crusty objects";
  if (keyword == "line") return "glides along the surface at constant height, for icing or drawing";
  return {};
}

Trajectory builtin_demo(std::string_view keyword, const DemoShape& shape) {
  if (shape.samples < 3 || !(shape.duration > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "demo shape needs >= 3 samples and a positive duration");
  }
  const Profile profile = profile_for(keyword, shape);
  Trajectory demo;
  demo.dt = shape.duration / static_cast<double>(shape.samples - 1);
  demo.points.reserve(static_cast<std::size_t>(shape.samples));
  for (int i = 0; i < shape.samples; ++i) {
    demo.points.push_back(profile(static_cast<double>(i) / static_cast<double>(shape.samples - 1)));
  }
  return demo;
}

PrimitiveDictionary build_builtin_dictionary(int basis_count, const DmpGains& gains) {
  PrimitiveDictionary dictionary("cutting");
  for (auto keyword : builtin_keywords()) {
    Primitive p = learn_from_demo(builtin_demo(keyword), gains, basis_count, std::string(keyword));
    p.description = std::string(builtin_description(keyword));
    dictionary.insert(std::move(p));
  }
  return dictionary;
}

double round_trip_rmse(const Primitive& primitive, const Trajectory& demo) {
  const Trajectory out = rollout(primitive, {demo.points.front(), demo.points.back()}, demo.dt);
  const std::size_t n = std::min(out.size(), demo.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += (out.points[i] - demo.points[i]).squaredNorm();
  return std::sqrt(sum / static_cast<double>(n));
}

}  // namespace keymps
