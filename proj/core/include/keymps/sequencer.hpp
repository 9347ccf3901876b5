#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "keymps/dictionary.hpp"
#include "keymps/dmp.hpp"

namespace keymps {

enum class SegmentKind { Translation, Primitive };

struct Segment {
  SegmentKind kind = SegmentKind::Translation;
  ScalingParams scaling;
  std::string keyword;  // empty for translations
};

// Alternating Translation / Primitive segments; each segment starts where the
// previous one ends.
struct MotionPlan {
  Vec3 home = Vec3::Zero();
  std::vector<Segment> segments;
};

// Axis-aligned box the end effector must stay inside, meters.
struct WorkspaceBounds {
  Vec3 lower{0.0, 0.0, 0.0};
  Vec3 upper{0.30, 0.18, 0.5};

  static WorkspaceBounds board(double width, double height, double z_max = 0.5);
  bool contains(const Vec3& p, double tolerance = 1e-9) const;
};

struct RenderSettings {
  double dt = 1e-3;
  double translation_speed = 0.2;  // m/s
  double min_translation_tau = 0.2;  // s
  // Translations integrate this many tau so they land on the next start.
  double translation_horizon = 2.5;
  std::optional<WorkspaceBounds> bounds = WorkspaceBounds{};
};

MotionPlan build_plan(std::span<const ScalingParams> pairs, std::string_view keyword, const Vec3& home);

// OutOfWorkspace, with the segment index, for the first endpoint outside the bounds.
void check_workspace(const MotionPlan& plan, const WorkspaceBounds& bounds);

// Zero-weight point-to-point attractor used for every translation segment.
Primitive make_translation_primitive(const DmpGains& gains = {});

double translation_tau(const ScalingParams& scaling, const RenderSettings& settings);

// One trajectory per plan segment. Segment k+1 starts at the last sample of
// segment k.
std::vector<Trajectory> render_segments(const MotionPlan& plan, const PrimitiveDictionary& dictionary,
                                        const Primitive& translation, const RenderSettings& settings);

// Joins segments, dropping each segment's first sample after the first segment.
Trajectory concatenate(std::span<const Trajectory> segments);

Trajectory render(const MotionPlan& plan, const PrimitiveDictionary& dictionary, const Primitive& translation,
                  const RenderSettings& settings);

}  // namespace keymps
