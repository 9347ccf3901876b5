#include "keymps/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "keymps/error.hpp"

namespace keymps {
namespace {

MatchReport finish(MatchReport report) {
  if (!report.distances.empty()) {
    report.mean = std::accumulate(report.distances.begin(), report.distances.end(), 0.0) /
                  static_cast<double>(report.distances.size());
  }
  return report;
}

void check_sizes(const std::vector<Vec3>& reference, const std::vector<Vec3>& candidates) {
  if (reference.empty()) throw Error(ErrorCode::InvalidArgument, "matching needs at least one reference point");
  if (candidates.size() < reference.size()) {
    throw Error(ErrorCode::InsufficientGenerated, "generated trajectory has " + std::to_string(candidates.size()) +
                                                      " points, fewer than the " + std::to_string(reference.size()) +
                                                      " ground-truth points");
  }
}

}  // namespace

Trajectory downsample(const Trajectory& trajectory, std::size_t n) {
  const std::size_t len = trajectory.points.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "downsample needs n >= 2");
  if (len < 2) throw Error(ErrorCode::InvalidArgument, "downsample needs a trajectory of at least 2 points");
  if (n > len) {
    throw Error(ErrorCode::UpsampleRefused,
                "cannot take " + std::to_string(n) + " samples from " + std::to_string(len) + " points");
  }
  Trajectory out;
  out.dt = trajectory.dt * static_cast<double>(len - 1) / static_cast<double>(n - 1);
  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = static_cast<double>(i) * static_cast<double>(len - 1) / static_cast<double>(n - 1);
    out.points.push_back(trajectory.points[static_cast<std::size_t>(std::llround(pos))]);
  }
  return out;
}

MatchReport match_greedy(const std::vector<Vec3>& reference, const std::vector<Vec3>& candidates) {
  check_sizes(reference, candidates);
  std::vector<bool> used(candidates.size(), false);
  MatchReport report;
  report.distances.reserve(reference.size());
  report.matched_indices.reserve(reference.size());
  for (const auto& m : reference) {
    std::size_t best = candidates.size();
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (used[j]) continue;
      const double d2 = (candidates[j] - m).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = j;
      }
    }
    used[best] = true;
    report.matched_indices.push_back(best);
    report.distances.push_back(std::sqrt(best_d2));
  }
  return finish(std::move(report));
}

// Hungarian algorithm with potentials, rows = reference (n), columns =
// candidates (m >= n). O(n^2 m).
MatchReport match_optimal(const std::vector<Vec3>& reference, const std::vector<Vec3>& candidates) {
  check_sizes(reference, candidates);
  const std::size_t n = reference.size();
  const std::size_t m = candidates.size();
  const double inf = std::numeric_limits<double>::infinity();
  auto cost = [&](std::size_t i, std::size_t j) { return (reference[i - 1] - candidates[j - 1]).norm(); };

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> done(m + 1, false);
    do {
      done[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (done[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (done[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  MatchReport report;
  report.matched_indices.assign(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) report.matched_indices[p[j] - 1] = j - 1;
  }
  report.distances.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    report.distances.push_back((reference[i] - candidates[report.matched_indices[i]]).norm());
  }
  return finish(std::move(report));
}

MatchReport discrepancy(const Trajectory& ground_truth, const Trajectory& generated, std::size_t n_gt,
                        MatchMode mode) {
  if (ground_truth.points.empty()) throw Error(ErrorCode::InvalidArgument, "ground truth trajectory is empty");
  if (generated.points.size() < n_gt) {
    throw Error(ErrorCode::InsufficientGenerated, "generated trajectory has " +
                                                      std::to_string(generated.points.size()) +
                                                      " points, fewer than n_gt = " + std::to_string(n_gt));
  }
  const bool shrink = n_gt >= 2 && ground_truth.points.size() > n_gt;
  const std::vector<Vec3> reference = shrink ? downsample(ground_truth, n_gt).points : ground_truth.points;
  return mode == MatchMode::Greedy ? match_greedy(reference, generated.points)
                                   : match_optimal(reference, generated.points);
}

}  // namespace keymps
