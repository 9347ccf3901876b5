#include <doctest.h>

#include <fstream>

#include "keymps/error.hpp"
#include "keymps/mock_backend.hpp"
#include "keymps/pipeline.hpp"
#include "keymps/primitives.hpp"
#include "keymps/trajectory_io.hpp"
#include "support.hpp"

using namespace keymps;

namespace {

const PrimitiveDictionary& dictionary() {
  static const PrimitiveDictionary d = build_builtin_dictionary();
  return d;
}

// Counts calls and forwards to the mock.
class CountingMock final : public Backend {
 public:
  bool uses_network() const noexcept override { return false; }
  std::string name() const override { return "counting"; }

 protected:
  std::string do_complete(const BackendRequest& request) override { return inner_.complete(request); }

 private:
  MockBackend inner_;
};

const std::vector<Scenario>& catalog() {
  static const std::vector<Scenario> c = builtin_catalog();
  return c;
}

std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

}  // namespace

TEST_CASE("case 7 lands its cuts where the ground truth does") {
  const Scenario& scn = find_scenario(catalog(), "7");
  const PipelineConfig cfg = scenario_config(scn, 0.02, 1e-3);
  MockBackend backend;
  const RunReport report = execute_pipeline(render_fixture(scn), dictionary(), backend, cfg);
  CHECK(report.response.keyword == "straight");
  const auto gt = ground_truth_params(scn, {.margin = 0.02});
  REQUIRE(report.scaling.size() == gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    CHECK(std::abs(report.scaling[i].y0.x() - gt[i].y0.x()) < 5e-4);
    CHECK(std::abs(report.scaling[i].y0.z() - gt[i].y0.z()) < 1e-12);
  }
  CHECK(report.plan.segments.size() == 2 * gt.size());
  const double d = discrepancy(generate_ground_truth(scn, dictionary().at("straight"), {.margin = 0.02}),
                               report.trajectory)
                       .mean;
  CHECK(d < 0.005);
}

TEST_CASE("config errors stop before any backend call") {
  const auto dir = testing::scratch_dir("pipeline_load");
  const Scenario& scn = find_scenario(catalog(), "7");
  save_png(render_fixture(scn), dir / "scene.png");
  PipelineConfig cfg = scenario_config(scn, 0.02, 1e-3);
  cfg.image_path = dir / "scene.png";
  cfg.dictionary_path = dir / "missing.json";
  CountingMock backend;
  try {
    run_pipeline(cfg, &backend);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
    CHECK(e.stage() == "load");
  }
  CHECK(backend.calls() == 0);

  cfg.dictionary_path.clear();
  cfg.dt = -1.0;
  CHECK_THROWS_AS(run_pipeline(cfg, &backend), Error);
  CHECK(backend.calls() == 0);
}

TEST_CASE("verify-only stops after post-processing") {
  const auto dir = testing::scratch_dir("pipeline_verify");
  const Scenario& scn = find_scenario(catalog(), "4");
  save_png(render_fixture(scn), dir / "scene.png");
  PipelineConfig cfg = scenario_config(scn, 0.02, 1e-3);
  cfg.image_path = dir / "scene.png";
  cfg.verify_only = true;
  cfg.output_dir = dir / "out";
  const RunReport r = run_pipeline(cfg);
  CHECK(r.trajectory.empty());
  CHECK(r.scaling.size() == 4);
  CHECK(std::filesystem::exists(dir / "out" / "keypoints.svg"));
  CHECK(std::filesystem::exists(dir / "out" / "run.json"));
  CHECK_FALSE(std::filesystem::exists(dir / "out" / "trajectory.csv"));
}

TEST_CASE("artifacts are byte-identical across runs") {
  const auto dir = testing::scratch_dir("pipeline_artifacts");
  const Scenario& scn = find_scenario(catalog(), "2");
  save_png(render_fixture(scn), dir / "scene.png");
  PipelineConfig cfg = scenario_config(scn, 0.02, 1e-3);
  cfg.image_path = dir / "scene.png";
  for (const char* name : {"a", "b"}) {
    cfg.output_dir = dir / name;
    run_pipeline(cfg);
  }
  for (const char* file : {"trajectory.csv", "keypoints.svg", "path.svg", "run.json"}) {
    CHECK(slurp(dir / "a" / file) == slurp(dir / "b" / file));
  }
  const Trajectory t = load_trajectory_csv(dir / "a" / "trajectory.csv");
  CHECK(t.size() > 1000);
}

TEST_CASE("errors carry the stage") {
  const Scenario& scn = find_scenario(catalog(), "7");
  PipelineConfig cfg = scenario_config(scn, 0.02, 1e-3);
  MockBackend backend;
  try {
    execute_pipeline(GrayImage(600, 360, 200), dictionary(), backend, cfg);
    FAIL("expected NoObjectFound");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoObjectFound);
    CHECK(e.stage() == "detect");
  }
  cfg.instruction = "paint the fence";
  try {
    execute_pipeline(render_fixture(scn), dictionary(), backend, cfg);
    FAIL("expected MockNoRule");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MockNoRule);
    CHECK(e.stage() == "query");
  }
}

TEST_CASE("config file parsing") {
  const auto dir = testing::scratch_dir("pipeline_config");
  const std::string text = R"({"image": "scene.png", "instruction": "cut", "object_height": 0.04,
    "height_mode": "both_at_height", "env_size": [0.5, 0.2], "global_shift": [3, -2],
    "backend": {"kind": "http", "url": "https://example.invalid/v1/chat/completions", "model": "m"},
    "detector": {"threshold_delta": 20, "blur_sigma": 0, "min_area": 10}, "keypoints": "clamp"})";
  const PipelineConfig cfg = PipelineConfig::from_json(text, dir);
  CHECK(cfg.image_path == dir / "scene.png");
  CHECK(cfg.object_height == 0.04);
  CHECK(cfg.height_mode == HeightMode::BothAtHeight);
  CHECK(cfg.env_size == Vec2(0.5, 0.2));
  CHECK(cfg.global_shift == Vec2(3, -2));
  CHECK(cfg.backend == "http");
  CHECK(cfg.http.model == "m");
  CHECK(cfg.detector.threshold_delta == 20);
  CHECK(cfg.keypoint_policy == KeypointPolicy::Clamp);
  CHECK(cfg.home_position() == Vec3(0.25, 0.1, 0.15));
  CHECK_THROWS_AS(PipelineConfig::from_json("{\"height_mode\": \"up\"}", dir), Error);
  CHECK_THROWS_AS(PipelineConfig::from_json("nope", dir), Error);
}

TEST_CASE("learning a demo into a dictionary file") {
  const auto dir = testing::scratch_dir("pipeline_learn");
  save_trajectory_csv(builtin_demo("straight"), dir / "demo.csv");
  LearnRequest req{.demo_csv = dir / "demo.csv", .dictionary_path = dir / "dict.json", .keyword = "Glide"};
  const LearnResult r = learn_primitive(req);
  CHECK(r.relative() < 0.02);
  CHECK(PrimitiveDictionary::load(dir / "dict.json").contains("glide"));
  try {
    learn_primitive(req);
    FAIL("expected RefusedOverwrite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RefusedOverwrite);
  }
  req.force = true;
  req.description = "second take";
  learn_primitive(req);
  CHECK(PrimitiveDictionary::load(dir / "dict.json").at("glide").description == "second take");
}

TEST_CASE("evaluation rows, summaries and determinism") {
  EvaluateOptions opt;
  for (const char* id : {"1", "7", "11"}) opt.scenarios.push_back(find_scenario(catalog(), id));
  opt.runs = 3;
  opt.jobs = 2;
  const BackendFactory factory = [] { return mock_backend(); };
  const EvaluationReport a = evaluate(opt, dictionary(), factory);
  REQUIRE(a.rows.size() == 9);
  REQUIRE(a.summaries.size() == 3);
  for (const auto& s : a.summaries) {
    CHECK(s.ok_runs == 3);
    CHECK(s.stddev == 0.0);
    CHECK(s.mean < 0.005);
  }
  opt.jobs = 1;
  CHECK(evaluate(opt, dictionary(), factory).to_csv() == a.to_csv());
  CHECK(a.to_csv().rfind("case,run,status,D_m,mean_m,std_m,ok_runs,failed_runs,error\n", 0) == 0);
}

TEST_CASE("a failing scenario does not sink the others") {
  EvaluateOptions opt;
  Scenario broken = find_scenario(catalog(), "7");
  broken.id = "broken";
  broken.instruction = "paint the fence";
  opt.scenarios = {broken, find_scenario(catalog(), "5")};
  opt.runs = 2;
  const EvaluationReport r = evaluate(opt, dictionary(), [] { return mock_backend(); });
  REQUIRE(r.summaries.size() == 2);
  CHECK(r.summaries[0].failed_runs == 2);
  CHECK(r.summaries[1].ok_runs == 2);
  CHECK(r.rows[0].error.find("MockNoRule") != std::string::npos);
}

TEST_CASE("timings appear only on request") {
  const Scenario& scn = find_scenario(catalog(), "5");
  PipelineConfig cfg = scenario_config(scn, 0.02, 1e-3);
  MockBackend backend;
  const RunReport plain = execute_pipeline(render_fixture(scn), dictionary(), backend, cfg);
  CHECK(plain.to_json(cfg).find("timings") == std::string::npos);
  cfg.record_timings = true;
  const RunReport timed = execute_pipeline(render_fixture(scn), dictionary(), backend, cfg);
  CHECK(timed.timings.size() >= 5);
  CHECK(timed.to_json(cfg).find("timings") != std::string::npos);
}
