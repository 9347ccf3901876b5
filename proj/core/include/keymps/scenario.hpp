#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keymps/dmp.hpp"
#include "keymps/geometry.hpp"
#include "keymps/image.hpp"

namespace keymps {

enum class PatternKind { VerticalCuts, HorizontalCuts, PieCuts, TipCuts, Custom };
enum class ObjectShape { Box, Round };

std::string_view to_string(PatternKind kind) noexcept;
std::string_view to_string(ObjectShape shape) noexcept;

// A cutting task with a known answer. The board frame has x to the right and
// y down (same as image rows), origin at the board corner.
struct Scenario {
  std::string id;
  std::string object;  // label handed to the backend, e.g. "eggplant"
  ObjectShape shape = ObjectShape::Box;
  Vec3 size{0.10, 0.05, 0.05};  // length along x, width along y, height, m; round objects use length = width
  std::string instruction;
  std::string keyword = "straight";  // primitive used for the ground truth
  PatternKind pattern = PatternKind::VerticalCuts;
  int count = 1;  // cuts, or slices for PieCuts
  double tip_fraction = 0.1;
  std::vector<ScalingParams> custom;  // Custom pattern, already in 3D
  std::optional<Vec2> center;  // board centre when unset
  Vec2 board{0.30, 0.18};
  HeightMode height_mode = HeightMode::StartAtHeight;
  bool trained = true;
  int intensity = 60;  // fixture object grey level

  void validate() const;
  Vec2 object_center() const;
  Vec2 object_min() const;  // top-left corner of the footprint's bounding box
};

struct GroundTruthOptions {
  double margin = 0.02;
  double base_z = 0.0;
  double dt = 1e-3;
  std::optional<Vec3> home;  // default_home(board) when unset
};

Vec3 default_home(const Vec2& board);

// Cutting cases 1-15 with their ground-truth patterns.
std::vector<Scenario> builtin_catalog();
const Scenario& find_scenario(const std::vector<Scenario>& catalog, std::string_view id);

std::string catalog_to_json(const std::vector<Scenario>& catalog);
std::vector<Scenario> catalog_from_json(std::string_view text);
std::vector<Scenario> load_catalog(const std::filesystem::path& path);

// 2D board-frame segments of the pattern, meters, in cutting order.
std::vector<std::pair<Vec2, Vec2>> expand_pattern(const Scenario& scenario);

// Pattern with the height rule applied. BadScenario on inconsistent parameters.
std::vector<ScalingParams> ground_truth_params(const Scenario& scenario, const GroundTruthOptions& options = {});

// Pattern expanded, lifted to 3D and rendered through the sequencer with the
// given primitive, starting from the home position.
Trajectory generate_ground_truth(const Scenario& scenario, const Primitive& primitive,
                                 const GroundTruthOptions& options = {});

// Uniform board with the object's footprint drawn at pixels_per_meter.
GrayImage render_fixture(const Scenario& scenario, double pixels_per_meter = 2000.0, int background = 200);

}  // namespace keymps
