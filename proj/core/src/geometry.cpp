#include "keymps/geometry.hpp"

#include <cmath>

#include "keymps/dictionary.hpp"
#include "keymps/error.hpp"

namespace keymps {

void FrameSpec::validate() const {
  if (!(img_size.x() > 0 && img_size.y() > 0 && env_size.x() > 0 && env_size.y() > 0) ||
      !img_size.allFinite() || !env_size.allFinite() || !bbox_offset.allFinite() || !global_shift.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "frame sizes must be positive and finite");
  }
}

std::string_view to_string(HeightMode mode) noexcept {
  switch (mode) {
    case HeightMode::BothAtHeight: return "both";
    case HeightMode::StartAtHeight: return "start";
    case HeightMode::EndAtHeight: return "end";
  }
  return "start";
}

HeightMode parse_height_mode(std::string_view text) {
  const std::string t = PrimitiveDictionary::normalize_keyword(text);
  if (t == "both" || t == "both_at_height") return HeightMode::BothAtHeight;
  if (t == "start" || t == "start_at_height") return HeightMode::StartAtHeight;
  if (t == "end" || t == "end_at_height") return HeightMode::EndAtHeight;
  throw Error(ErrorCode::ConfigError, "unknown height mode '" + std::string(text) + "' (both|start|end)");
}

void HeightSpec::validate() const {
  if (!(object_height >= 0.0) || !(margin >= 0.0) || !std::isfinite(object_height) || !std::isfinite(margin) ||
      !std::isfinite(base_z)) {
    throw Error(ErrorCode::InvalidArgument, "object height and margin must be finite and non-negative");
  }
}

Vec2 to_global_2d(const Vec2& p_local, const FrameSpec& frame) {
  const Vec2 translated = p_local + frame.bbox_offset + frame.global_shift;
  const Vec2 normalized{translated.x() / frame.img_size.x(), translated.y() / frame.img_size.y()};
  return {normalized.x() * frame.env_size.x(), normalized.y() * frame.env_size.y()};
}

bool in_environment(const Vec2& p, const FrameSpec& frame, double guard) {
  return p.x() >= -guard && p.y() >= -guard && p.x() <= frame.env_size.x() + guard &&
         p.y() <= frame.env_size.y() + guard;
}

ScalingParams integrate_height(const Vec2& start, const Vec2& goal, const HeightSpec& spec) {
  spec.validate();
  const double high = spec.high();
  const double low = spec.base_z;
  double z_start = high;
  double z_goal = high;
  switch (spec.mode) {
    case HeightMode::BothAtHeight: break;
    case HeightMode::StartAtHeight: z_goal = low; break;
    case HeightMode::EndAtHeight: z_start = low; break;
  }
  return {Vec3{start.x(), start.y(), z_start}, Vec3{goal.x(), goal.y(), z_goal}};
}

std::vector<ScalingParams> post_process(std::span<const KeypointPair> pairs, const FrameSpec& frame,
                                        const HeightSpec& spec, const PostProcessOptions& options) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyPairs, "no keypoint pairs to post-process");
  frame.validate();
  spec.validate();
  std::vector<ScalingParams> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Vec2 start = to_global_2d(pairs[i].start, frame);
    const Vec2 goal = to_global_2d(pairs[i].goal, frame);
    if (options.reject_out_of_workspace &&
        (!in_environment(start, frame, options.guard) || !in_environment(goal, frame, options.guard))) {
      throw Error(ErrorCode::OutOfWorkspace, "keypoint pair " + std::to_string(i) + " maps outside the environment",
                  {.index = i});
    }
    out.push_back(integrate_height(start, goal, spec));
  }
  return out;
}

}  // namespace keymps
