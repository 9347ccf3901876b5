#include "keymps/sequencer.hpp"

#include <algorithm>
#include <cmath>

#include "keymps/error.hpp"

namespace keymps {

WorkspaceBounds WorkspaceBounds::board(double width, double height, double z_max) {
  return WorkspaceBounds{Vec3{0.0, 0.0, 0.0}, Vec3{width, height, z_max}};
}

bool WorkspaceBounds::contains(const Vec3& p, double tolerance) const {
  for (int d = 0; d < 3; ++d) {
    if (!(p[d] >= lower[d] - tolerance && p[d] <= upper[d] + tolerance)) return false;
  }
  return true;
}

MotionPlan build_plan(std::span<const ScalingParams> pairs, std::string_view keyword, const Vec3& home) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyPlan, "no keypoint pairs to sequence");
  MotionPlan plan;
  plan.home = home;
  plan.segments.reserve(2 * pairs.size());
  Vec3 current = home;
  for (const auto& pair : pairs) {
    plan.segments.push_back({SegmentKind::Translation, {current, pair.y0}, {}});
    plan.segments.push_back({SegmentKind::Primitive, pair, std::string(keyword)});
    current = pair.y_goal;
  }
  return plan;
}

void check_workspace(const MotionPlan& plan, const WorkspaceBounds& bounds) {
  auto format = [](const Vec3& p) {
    return "(" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ", " + std::to_string(p.z()) + ")";
  };
  if (!bounds.contains(plan.home)) {
    throw Error(ErrorCode::OutOfWorkspace, "home position " + format(plan.home) + " is outside the workspace");
  }
  for (std::size_t i = 0; i < plan.segments.size(); ++i) {
    const auto& s = plan.segments[i].scaling;
    for (const Vec3* p : {&s.y0, &s.y_goal}) {
      if (!bounds.contains(*p)) {
        throw Error(ErrorCode::OutOfWorkspace,
                    "segment " + std::to_string(i) + " endpoint " + format(*p) + " is outside the workspace",
                    {.index = i});
      }
    }
  }
}

Primitive make_translation_primitive(const DmpGains& gains) {
  Primitive p;
  p.keyword = "translation";
  p.description = "point-to-point move between cuts";
  p.gains = gains;
  p.basis = make_basis(2, gains.alpha_s, gains.tau);
  p.weights = WeightMatrix::Zero(2, 3);
  return p;
}

double translation_tau(const ScalingParams& scaling, const RenderSettings& settings) {
  const double distance = (scaling.y_goal - scaling.y0).norm();
  return std::max(settings.min_translation_tau, distance / settings.translation_speed);
}

std::vector<Trajectory> render_segments(const MotionPlan& plan, const PrimitiveDictionary& dictionary,
                                        const Primitive& translation, const RenderSettings& settings) {
  if (plan.segments.empty()) throw Error(ErrorCode::EmptyPlan, "plan has no segments");
  if (settings.bounds) check_workspace(plan, *settings.bounds);

  std::vector<Trajectory> out;
  out.reserve(plan.segments.size());
  Vec3 current = plan.home;
  for (const auto& segment : plan.segments) {
    const ScalingParams scaling{current, segment.scaling.y_goal};
    if (segment.kind == SegmentKind::Translation) {
      RolloutOptions options;
      options.tau_override = translation_tau(scaling, settings);
      options.horizon = settings.translation_horizon;
      out.push_back(rollout(translation, scaling, settings.dt, options));
    } else {
      out.push_back(rollout(resolve(dictionary, segment.keyword), scaling, settings.dt));
    }
    current = out.back().points.back();
  }
  return out;
}

Trajectory concatenate(std::span<const Trajectory> segments) {
  Trajectory out;
  if (segments.empty()) return out;
  out.dt = segments.front().dt;
  std::size_t total = 0;
  for (const auto& s : segments) total += s.points.size();
  out.points.reserve(total);
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& pts = segments[k].points;
    auto first = pts.begin();
    if (k > 0 && !pts.empty()) ++first;
    out.points.insert(out.points.end(), first, pts.end());
  }
  return out;
}

Trajectory render(const MotionPlan& plan, const PrimitiveDictionary& dictionary, const Primitive& translation,
                  const RenderSettings& settings) {
  const auto segments = render_segments(plan, dictionary, translation, settings);
  return concatenate(segments);
}

}  // namespace keymps
