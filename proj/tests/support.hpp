#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "keymps/dmp.hpp"
#include "keymps/image.hpp"

namespace keymps::testing {

// Closed-form response of tau*z' = a(b(g - y) - z), tau*y' = z with b = a/4
// (critically damped, double root -a/(2 tau)), starting at rest.
inline double critically_damped(double y0, double goal, double alpha_z, double tau, double t) {
  const double w = alpha_z / (2.0 * tau);
  return goal - (goal - y0) * (1.0 + w * t) * std::exp(-w * t);
}

// Exact minimum-sum assignment of every reference point to a distinct
// candidate, by dynamic programming over candidate subsets. Only for small m.
inline double brute_force_assignment(const std::vector<Vec3>& ref, const std::vector<Vec3>& cand) {
  const std::size_t n = ref.size();
  const std::size_t m = cand.size();
  const std::size_t full = std::size_t{1} << m;
  std::vector<double> best(full, std::numeric_limits<double>::infinity());
  best[0] = 0.0;
  double answer = std::numeric_limits<double>::infinity();
  for (std::size_t mask = 0; mask < full; ++mask) {
    if (!std::isfinite(best[mask])) continue;
    const auto i = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (i == n) {
      answer = std::min(answer, best[mask]);
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      const std::size_t next = mask | (std::size_t{1} << j);
      best[next] = std::min(best[next], best[mask] + (ref[i] - cand[j]).norm());
    }
  }
  return answer / static_cast<double>(n);
}

inline GrayImage rectangle_image(int w, int h, int background, int x, int y, int rw, int rh, int value) {
  GrayImage img(w, h, static_cast<std::uint8_t>(background));
  for (int yy = y; yy < y + rh; ++yy) {
    for (int xx = x; xx < x + rw; ++xx) img.at(xx, yy) = static_cast<std::uint8_t>(value);
  }
  return img;
}

inline double rmse(const std::vector<Vec3>& a, const std::vector<Vec3>& b, int axis) {
  const std::size_t n = std::min(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::pow(a[i][axis] - b[i][axis], 2);
  return std::sqrt(sum / static_cast<double>(n));
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("keymps_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace keymps::testing
