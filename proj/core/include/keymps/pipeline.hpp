#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "keymps/backend.hpp"
#include "keymps/dictionary.hpp"
#include "keymps/geometry.hpp"
#include "keymps/http_backend.hpp"
#include "keymps/metrics.hpp"
#include "keymps/perception.hpp"
#include "keymps/scenario.hpp"
#include "keymps/sequencer.hpp"
#include "keymps/vlm.hpp"

namespace keymps {

struct PipelineConfig {
  std::filesystem::path image_path;
  std::string instruction;
  std::string object_label;
  double object_height = 0.05;  // m
  HeightMode height_mode = HeightMode::StartAtHeight;
  double margin = 0.02;  // m above the object
  double base_z = 0.0;
  std::filesystem::path dictionary_path;  // built-in primitives when empty
  Vec2 env_size{0.30, 0.18};              // m covered by the full image
  Vec2 global_shift = Vec2::Zero();       // px
  std::optional<Vec3> home;               // board centre, 0.15 m up, when unset
  std::string backend = "mock";           // mock | http
  std::filesystem::path mock_rules_path;  // built-in rules when empty
  HttpBackendConfig http;
  double dt = 1e-3;
  std::filesystem::path output_dir;
  std::optional<std::string> scenario_id;
  bool verify_only = false;
  bool record_timings = false;
  bool combined = true;
  int max_retries = 2;
  KeypointPolicy keypoint_policy = KeypointPolicy::Reject;
  DetectorConfig detector;
  std::string task_name = "cutting";
  std::vector<std::string> examples;

  // ConfigError for out-of-range numbers, IoError for missing input files.
  void validate() const;
  Vec3 home_position() const;

  // Relative paths are resolved against base_dir.
  static PipelineConfig from_json(std::string_view text, const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path);
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunReport {
  std::string backend;
  Detection detection;
  VlmResponse response;
  std::vector<ScalingParams> scaling;
  MotionPlan plan;
  Trajectory trajectory;  // empty in verify-only mode
  bool verify_only = false;
  std::vector<StageTiming> timings;

  std::string to_json(const PipelineConfig& config) const;
};

std::unique_ptr<Backend> make_backend(const PipelineConfig& config);

// The in-memory pipeline: detect, query, resolve, post-process, plan, render.
// Errors carry the stage name.
RunReport execute_pipeline(const GrayImage& image, const PrimitiveDictionary& dictionary, Backend& backend,
                           const PipelineConfig& config);

// trajectory.csv (unless verify-only), keypoints.svg, path.svg (unless
// verify-only) and run.json.
void write_artifacts(const RunReport& report, const PipelineConfig& config, const std::filesystem::path& dir);

// Validates the config and loads the dictionary and image before any backend
// call. Writes artifacts when output_dir is set. backend overrides make_backend().
RunReport run_pipeline(const PipelineConfig& config, Backend* backend = nullptr);

PrimitiveDictionary load_dictionary_or_builtin(const std::filesystem::path& path);

struct LearnRequest {
  std::filesystem::path demo_csv;
  std::filesystem::path dictionary_path;
  std::string keyword;
  std::string description;
  DmpGains gains;
  int basis_count = 50;
  bool force = false;
};

struct LearnResult {
  Primitive primitive;
  double rmse = 0.0;       // m
  double amplitude = 0.0;  // largest per-axis demo extent, m
  double relative() const noexcept { return amplitude > 0.0 ? rmse / amplitude : 0.0; }
};

// Learns the demo and stores it in the dictionary file (created when absent).
// RefusedOverwrite for an existing keyword unless force is set.
LearnResult learn_primitive(const LearnRequest& request);

struct EvaluateOptions {
  std::vector<Scenario> scenarios;
  int runs = 10;
  int jobs = 1;
  std::size_t n_gt = 100;
  double margin = 0.02;
  double dt = 1e-3;
  double pixels_per_meter = 2000.0;
  MatchMode match = MatchMode::Greedy;
  std::filesystem::path artifacts_dir;  // per-run artifacts when set
};

struct RunRow {
  std::string case_id;
  int run = 0;
  bool ok = false;
  double discrepancy = 0.0;  // D, m
  std::string error;
};

struct CaseSummary {
  std::string case_id;
  int ok_runs = 0;
  int failed_runs = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation of D over successful runs
};

struct EvaluationReport {
  std::vector<RunRow> rows;
  std::vector<CaseSummary> summaries;

  std::string to_csv() const;
};

using BackendFactory = std::function<std::unique_ptr<Backend>()>;

// Every scenario x run through the full pipeline on its procedural fixture,
// scored against the generated ground truth. Failures become failed rows.
EvaluationReport evaluate(const EvaluateOptions& options, const PrimitiveDictionary& dictionary,
                          const BackendFactory& backend_factory);

// Pipeline config matching a scenario's fixture.
PipelineConfig scenario_config(const Scenario& scenario, double margin, double dt);

}  // namespace keymps
