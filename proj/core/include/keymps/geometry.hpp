#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keymps/dmp.hpp"

namespace keymps {

// A VLM-proposed line segment in cropped-image pixel coordinates.
struct KeypointPair {
  Vec2 start = Vec2::Zero();
  Vec2 goal = Vec2::Zero();
};

// Pixel -> environment mapping. Image rows grow in the same direction as the
// environment y axis (no flip).
struct FrameSpec {
  Vec2 bbox_offset = Vec2::Zero();   // px
  Vec2 global_shift = Vec2::Zero();  // px
  Vec2 img_size{640.0, 480.0};       // px
  Vec2 env_size{0.30, 0.18};         // m

  void validate() const;
};

enum class HeightMode { BothAtHeight, StartAtHeight, EndAtHeight };

std::string_view to_string(HeightMode mode) noexcept;
HeightMode parse_height_mode(std::string_view text);

struct HeightSpec {
  double object_height = 0.0;  // m
  double margin = 0.0;         // m, added on top of the object
  HeightMode mode = HeightMode::StartAtHeight;
  double base_z = 0.0;  // support surface, m

  void validate() const;
  double high() const noexcept { return base_z + object_height + margin; }
};

Vec2 to_global_2d(const Vec2& p_local, const FrameSpec& frame);

// Whether a global point lies within [-guard, env + guard] on both axes.
bool in_environment(const Vec2& p_global, const FrameSpec& frame, double guard = 1e-9);

ScalingParams integrate_height(const Vec2& start, const Vec2& goal, const HeightSpec& spec);

struct PostProcessOptions {
  bool reject_out_of_workspace = true;
  double guard = 1e-9;  // m
};

// to_global_2d on both endpoints then integrate_height, order preserved.
// EmptyPairs on empty input; OutOfWorkspace carries the pair index.
std::vector<ScalingParams> post_process(std::span<const KeypointPair> pairs, const FrameSpec& frame,
                                        const HeightSpec& spec, const PostProcessOptions& options = {});

}  // namespace keymps
