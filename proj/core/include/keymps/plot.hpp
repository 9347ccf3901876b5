#pragma once

#include <span>
#include <string>

#include "keymps/dmp.hpp"
#include "keymps/geometry.hpp"
#include "keymps/image.hpp"

namespace keymps {

// The crop as an embedded PNG with each keypoint pair drawn as a red line and
// numbered in execution order.
std::string keypoint_overlay_svg(const GrayImage& crop, std::span<const KeypointPair> pairs);

// Top (x-y), front (x-z) and side (y-z) projections of the path, coloured by
// time from red through green to blue.
std::string path_projections_svg(const Trajectory& trajectory, std::size_t max_segments = 600);

}  // namespace keymps
