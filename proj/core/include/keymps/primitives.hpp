#pragma once

#include <string_view>
#include <vector>

#include "keymps/dictionary.hpp"
#include "keymps/dmp.hpp"

namespace keymps {

// Shape parameters of the built-in demonstrations, local frame (x along the
// motion, y across it, z up).
struct DemoShape {
  double length = 0.10;  // m travelled along x
  double depth = 0.07;   // m descended by the cutting demos
  double duration = 1.0;  // s
  int samples = 1000;
};

// Minimum-jerk time profile on [0, 1], clamped outside.
double min_jerk(double t);

std::vector<std::string_view> builtin_keywords();
std::string_view builtin_description(std::string_view keyword);

// straight, downward, forward, sawing or line. InvalidArgument otherwise.
Trajectory builtin_demo(std::string_view keyword, const DemoShape& shape = {});

// Every built-in keyword learned with the given basis count.
PrimitiveDictionary build_builtin_dictionary(int basis_count = 50, const DmpGains& gains = {});

// Root-mean-square pointwise error of rollout(primitive) against its own demo,
// rolled out with the demo endpoints and dt.
double round_trip_rmse(const Primitive& primitive, const Trajectory& demo);

}  // namespace keymps
