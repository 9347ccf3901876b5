#pragma once

#include <cstddef>
#include <vector>

#include "keymps/dmp.hpp"

namespace keymps {

// n samples at indices round(i*(len-1)/(n-1)); endpoints kept.
Trajectory downsample(const Trajectory& trajectory, std::size_t n);

enum class MatchMode {
  Greedy,   // ground-truth points in trajectory order, each takes its nearest unmatched point
  Optimal,  // minimum-sum assignment (Hungarian), for diagnostics
};

struct MatchReport {
  std::vector<double> distances;           // d_i per downsampled ground-truth point, meters
  double mean = 0.0;                       // D
  std::vector<std::size_t> matched_indices;  // generated index paired with each ground-truth point
};

// Closest-unpaired-point discrepancy. The ground truth is first downsampled to
// n_gt points (or kept whole when it is shorter); generated must have at least
// n_gt points.
MatchReport discrepancy(const Trajectory& ground_truth, const Trajectory& generated, std::size_t n_gt = 100,
                        MatchMode mode = MatchMode::Greedy);

// Point-set variants used by discrepancy(); no downsampling.
MatchReport match_greedy(const std::vector<Vec3>& reference, const std::vector<Vec3>& candidates);
MatchReport match_optimal(const std::vector<Vec3>& reference, const std::vector<Vec3>& candidates);

}  // namespace keymps
