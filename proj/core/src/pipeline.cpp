#include "keymps/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "keymps/error.hpp"
#include "keymps/mock_backend.hpp"
#include "keymps/plot.hpp"
#include "keymps/primitives.hpp"
#include "keymps/trajectory_io.hpp"

namespace keymps {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

Error config_error(const std::string& why) { return Error(ErrorCode::ConfigError, why); }

Vec2 read_vec2(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw config_error(std::string("'") + name + "' must be [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Vec3 read_vec3(const json& j, const char* name) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number()) {
    throw config_error(std::string("'") + name + "' must be [x, y, z]");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::filesystem::path resolve_path(const std::string& p, const std::filesystem::path& base) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

// Runs fn, tags errors with the stage name and records the elapsed time.
template <typename Fn>
auto stage(const char* name, RunReport& report, Fn&& fn) {
  const auto start = Clock::now();
  struct Record {
    const char* name;
    RunReport& report;
    Clock::time_point start;
    ~Record() {
      report.timings.push_back({name, std::chrono::duration<double>(Clock::now() - start).count()});
    }
  } record{name, report, start};
  try {
    return fn();
  } catch (const Error& e) {
    throw e.in_stage(name);
  }
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

void PipelineConfig::validate() const {
  if (instruction.empty()) throw config_error("instruction is empty");
  if (!(object_height >= 0.0) || !std::isfinite(object_height)) throw config_error("object_height must be >= 0");
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw config_error("margin must be >= 0");
  if (!(dt > 0.0)) throw config_error("dt must be positive");
  if (!(env_size.x() > 0.0 && env_size.y() > 0.0)) throw config_error("env_size must be positive");
  if (max_retries < 0) throw config_error("max_retries must be >= 0");
  if (backend != "mock" && backend != "http") throw config_error("backend must be 'mock' or 'http'");
  if (backend == "http") http.validate();
  if (!image_path.empty() && !std::filesystem::exists(image_path)) {
    throw Error(ErrorCode::IoError, "image not found: " + image_path.string());
  }
  if (!dictionary_path.empty() && !std::filesystem::exists(dictionary_path)) {
    throw Error(ErrorCode::IoError, "dictionary not found: " + dictionary_path.string());
  }
  if (!mock_rules_path.empty() && !std::filesystem::exists(mock_rules_path)) {
    throw Error(ErrorCode::IoError, "mock rules not found: " + mock_rules_path.string());
  }
}

Vec3 PipelineConfig::home_position() const { return home.value_or(default_home(env_size)); }

PipelineConfig PipelineConfig::from_json(std::string_view text, const std::filesystem::path& base_dir) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw config_error("pipeline config is not a JSON object");
  PipelineConfig c;
  try {
    c.image_path = resolve_path(doc.value("image", ""), base_dir);
    c.instruction = doc.value("instruction", "");
    c.object_label = doc.value("object", "");
    c.object_height = doc.value("object_height", c.object_height);
    c.height_mode = parse_height_mode(doc.value("height_mode", "start"));
    c.margin = doc.value("margin", c.margin);
    c.base_z = doc.value("base_z", c.base_z);
    c.dictionary_path = resolve_path(doc.value("dictionary", ""), base_dir);
    if (doc.contains("env_size")) c.env_size = read_vec2(doc["env_size"], "env_size");
    if (doc.contains("global_shift")) c.global_shift = read_vec2(doc["global_shift"], "global_shift");
    if (doc.contains("home")) c.home = read_vec3(doc["home"], "home");
    c.dt = doc.value("dt", c.dt);
    c.output_dir = resolve_path(doc.value("output_dir", ""), base_dir);
    if (doc.contains("scenario")) c.scenario_id = doc["scenario"].get<std::string>();
    c.verify_only = doc.value("verify_only", false);
    c.record_timings = doc.value("timings", false);
    c.combined = doc.value("combined", true);
    c.max_retries = doc.value("max_retries", 2);
    const std::string policy = doc.value("keypoints", "reject");
    if (policy != "reject" && policy != "clamp") throw config_error("'keypoints' must be 'reject' or 'clamp'");
    c.keypoint_policy = policy == "clamp" ? KeypointPolicy::Clamp : KeypointPolicy::Reject;
    c.task_name = doc.value("task", c.task_name);
    c.examples = doc.value("examples", std::vector<std::string>{});
    if (doc.contains("detector")) {
      const json& d = doc["detector"];
      c.detector.threshold_delta = d.value("threshold_delta", c.detector.threshold_delta);
      c.detector.blur_sigma = d.value("blur_sigma", c.detector.blur_sigma);
      c.detector.min_area = d.value("min_area", c.detector.min_area);
    }
    if (doc.contains("backend")) {
      const json& b = doc["backend"];
      if (b.is_string()) {
        c.backend = b.get<std::string>();
      } else {
        c.backend = b.value("kind", "mock");
        c.mock_rules_path = resolve_path(b.value("rules", ""), base_dir);
        c.http.url = b.value("url", "");
        c.http.model = b.value("model", "");
        c.http.api_key_env = b.value("api_key_env", c.http.api_key_env);
        c.http.timeout_s = b.value("timeout_s", c.http.timeout_s);
        c.http.transport_retries = b.value("transport_retries", c.http.transport_retries);
        c.http.temperature = b.value("temperature", c.http.temperature);
      }
    }
  } catch (const json::exception& e) {
    throw config_error(std::string("pipeline config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  return from_json(text, path.parent_path());
}

std::unique_ptr<Backend> make_backend(const PipelineConfig& config) {
  if (config.backend == "mock") {
    return mock_backend(config.mock_rules_path.empty() ? MockRules::builtin() : MockRules::load(config.mock_rules_path));
  }
  if (config.backend == "http") return http_backend(config.http);
  throw config_error("unknown backend '" + config.backend + "'");
}

PrimitiveDictionary load_dictionary_or_builtin(const std::filesystem::path& path) {
  return path.empty() ? build_builtin_dictionary() : PrimitiveDictionary::load(path);
}

RunReport execute_pipeline(const GrayImage& image, const PrimitiveDictionary& dictionary, Backend& backend,
                           const PipelineConfig& config) {
  RunReport report;
  report.backend = backend.name();
  report.verify_only = config.verify_only;

  report.detection = stage("detect", report, [&] { return detect_object(image, config.detector); });

  report.response = stage("query", report, [&] {
    TaskContext ctx;
    ctx.task_name = config.task_name;
    ctx.keywords = keyword_options(dictionary);
    ctx.instruction = config.instruction;
    ctx.object_label = config.object_label;
    ctx.crop_size = {report.detection.crop.width, report.detection.crop.height};
    ctx.crop = report.detection.crop;
    ctx.examples = config.examples;
    QueryOptions options;
    options.combined = config.combined;
    options.max_retries = config.max_retries;
    options.out_of_bounds = config.keypoint_policy;
    return query(backend, ctx, options);
  });

  const Primitive& primitive = stage("resolve", report, [&]() -> const Primitive& {
    return resolve(dictionary, report.response.keyword);
  });

  report.scaling = stage("post_process", report, [&] {
    FrameSpec frame;
    frame.bbox_offset = {static_cast<double>(report.detection.box.x), static_cast<double>(report.detection.box.y)};
    frame.global_shift = config.global_shift;
    frame.img_size = {static_cast<double>(image.width), static_cast<double>(image.height)};
    frame.env_size = config.env_size;
    HeightSpec height;
    height.object_height = config.object_height;
    height.margin = config.margin;
    height.mode = config.height_mode;
    height.base_z = config.base_z;
    return post_process(report.response.pairs, frame, height);
  });
  if (config.verify_only) return report;

  report.plan = stage("plan", report, [&] {
    MotionPlan plan = build_plan(report.scaling, primitive.keyword, config.home_position());
    check_workspace(plan, WorkspaceBounds::board(config.env_size.x(), config.env_size.y()));
    return plan;
  });

  report.trajectory = stage("render", report, [&] {
    RenderSettings settings;
    settings.dt = config.dt;
    settings.bounds = WorkspaceBounds::board(config.env_size.x(), config.env_size.y());
    return render(report.plan, dictionary, make_translation_primitive(primitive.gains), settings);
  });
  return report;
}

std::string RunReport::to_json(const PipelineConfig& config) const {
  json doc;
  doc["backend"] = backend;
  doc["instruction"] = config.instruction;
  doc["object"] = config.object_label;
  if (config.scenario_id) doc["scenario"] = *config.scenario_id;
  doc["keyword"] = response.keyword;
  doc["attempts"] = response.attempts;
  doc["detection"] = {{"box", {detection.box.x, detection.box.y, detection.box.w, detection.box.h}},
                      {"area", detection.area},
                      {"background", detection.background}};
  json pairs = json::array();
  for (const auto& p : response.pairs) pairs.push_back({vec_json(p.start), vec_json(p.goal)});
  doc["keypoint_pairs"] = pairs;
  json scaling_json = json::array();
  for (const auto& s : scaling) scaling_json.push_back({{"y0", vec_json(s.y0)}, {"y_goal", vec_json(s.y_goal)}});
  doc["scaling"] = scaling_json;
  doc["height_mode"] = to_string(config.height_mode);
  doc["verify_only"] = verify_only;
  if (!verify_only) {
    doc["segments"] = plan.segments.size();
    doc["trajectory"] = {{"points", trajectory.size()}, {"dt", trajectory.dt}, {"duration", trajectory.duration()}};
  }
  doc["raw"] = response.raw;
  if (config.record_timings) {
    json t = json::array();
    for (const auto& s : timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
    doc["timings"] = t;
  }
  return doc.dump(2) + "\n";
}

void write_artifacts(const RunReport& report, const PipelineConfig& config, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "keypoints.svg", keypoint_overlay_svg(report.detection.crop, report.response.pairs));
  if (!report.verify_only) {
    save_trajectory_csv(report.trajectory, dir / "trajectory.csv");
    write_text_file(dir / "path.svg", path_projections_svg(report.trajectory));
  }
  write_text_file(dir / "run.json", report.to_json(config));
}

RunReport run_pipeline(const PipelineConfig& config, Backend* backend) {
  RunReport report;
  PrimitiveDictionary dictionary;
  GrayImage image;
  try {
    config.validate();
    if (config.image_path.empty()) throw config_error("no image given");
    dictionary = load_dictionary_or_builtin(config.dictionary_path);
    if (dictionary.empty()) throw config_error("primitive dictionary has no entries");
    image = load_gray_image(config.image_path);
  } catch (const Error& e) {
    throw e.in_stage("load");
  }

  std::unique_ptr<Backend> owned;
  if (backend == nullptr) {
    try {
      owned = make_backend(config);
    } catch (const Error& e) {
      throw e.in_stage("load");
    }
    backend = owned.get();
  }
  report = execute_pipeline(image, dictionary, *backend, config);
  if (!config.output_dir.empty()) {
    try {
      write_artifacts(report, config, config.output_dir);
    } catch (const Error& e) {
      throw e.in_stage("write");
    }
  }
  return report;
}

LearnResult learn_primitive(const LearnRequest& request) {
  const std::string keyword = PrimitiveDictionary::normalize_keyword(request.keyword);
  if (keyword.empty()) throw Error(ErrorCode::InvalidArgument, "keyword is empty");
  PrimitiveDictionary dictionary("cutting");
  if (!request.dictionary_path.empty() && std::filesystem::exists(request.dictionary_path)) {
    dictionary = PrimitiveDictionary::load(request.dictionary_path);
  }
  if (dictionary.contains(keyword) && !request.force) {
    throw Error(ErrorCode::RefusedOverwrite, "keyword '" + keyword + "' already exists; pass --force to replace it");
  }
  const Trajectory demo = load_trajectory_csv(request.demo_csv);
  LearnResult result;
  result.primitive = learn_from_demo(demo, request.gains, request.basis_count, keyword);
  result.primitive.description = request.description;
  result.rmse = round_trip_rmse(result.primitive, demo);
  Vec3 lo = demo.points.front();
  Vec3 hi = demo.points.front();
  for (const auto& p : demo.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  result.amplitude = (hi - lo).maxCoeff();
  dictionary.insert(result.primitive, request.force);
  if (!request.dictionary_path.empty()) dictionary.save(request.dictionary_path);
  return result;
}

PipelineConfig scenario_config(const Scenario& scenario, double margin, double dt) {
  PipelineConfig c;
  c.instruction = scenario.instruction;
  c.object_label = scenario.object;
  c.object_height = scenario.size.z();
  c.height_mode = scenario.height_mode;
  c.margin = margin;
  c.env_size = scenario.board;
  c.dt = dt;
  c.scenario_id = scenario.id;
  return c;
}

EvaluationReport evaluate(const EvaluateOptions& options, const PrimitiveDictionary& dictionary,
                          const BackendFactory& backend_factory) {
  if (options.runs < 1) throw config_error("runs must be >= 1");
  const std::size_t cases = options.scenarios.size();
  const std::size_t runs = static_cast<std::size_t>(options.runs);

  // Ground truth and fixture once per case; a bad scenario fails all its runs.
  struct Prepared {
    std::optional<Trajectory> truth;
    GrayImage fixture;
    std::string error;
  };
  std::vector<Prepared> prepared(cases);
  for (std::size_t c = 0; c < cases; ++c) {
    const Scenario& s = options.scenarios[c];
    try {
      GroundTruthOptions gt;
      gt.margin = options.margin;
      gt.dt = options.dt;
      prepared[c].truth = generate_ground_truth(s, resolve(dictionary, s.keyword), gt);
      prepared[c].fixture = render_fixture(s, options.pixels_per_meter);
    } catch (const std::exception& e) {
      prepared[c].error = e.what();
    }
  }

  EvaluationReport report;
  report.rows.resize(cases * runs);
  auto run_one = [&](std::size_t task) {
    const std::size_t c = task / runs;
    const Scenario& s = options.scenarios[c];
    RunRow& row = report.rows[task];
    row.case_id = s.id;
    row.run = static_cast<int>(task % runs) + 1;
    if (!prepared[c].error.empty()) {
      row.error = prepared[c].error;
      return;
    }
    try {
      const PipelineConfig config = scenario_config(s, options.margin, options.dt);
      auto backend = backend_factory();
      const RunReport run = execute_pipeline(prepared[c].fixture, dictionary, *backend, config);
      if (!options.artifacts_dir.empty()) {
        write_artifacts(run, config, options.artifacts_dir / ("case_" + s.id) / ("run_" + std::to_string(row.run)));
      }
      row.discrepancy = discrepancy(*prepared[c].truth, run.trajectory, options.n_gt, options.match).mean;
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.stage().empty() ? e.what() : e.stage() + ": " + e.what();
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };

  const std::size_t total = cases * runs;
  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.jobs, 1)), 1, total == 0 ? 1 : total);
  if (jobs <= 1) {
    for (std::size_t t = 0; t < total; ++t) run_one(t);
  } else {
    std::mutex mutex;
    std::size_t next = 0;
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t t;
          {
            std::lock_guard lock(mutex);
            if (next >= total) return;
            t = next++;
          }
          run_one(t);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  for (std::size_t c = 0; c < cases; ++c) {
    CaseSummary summary;
    summary.case_id = options.scenarios[c].id;
    std::vector<double> values;
    for (std::size_t r = 0; r < runs; ++r) {
      const RunRow& row = report.rows[c * runs + r];
      if (row.ok) {
        values.push_back(row.discrepancy);
      } else {
        ++summary.failed_runs;
      }
    }
    summary.ok_runs = static_cast<int>(values.size());
    if (!values.empty()) {
      double sum = 0.0;
      for (double v : values) sum += v;
      summary.mean = sum / static_cast<double>(values.size());
      if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - summary.mean) * (v - summary.mean);
        summary.stddev = std::sqrt(sq / static_cast<double>(values.size() - 1));
      }
    }
    report.summaries.push_back(summary);
  }
  return report;
}

std::string EvaluationReport::to_csv() const {
  std::string out = "case,run,status,D_m,mean_m,std_m,ok_runs,failed_runs,error\n";
  for (const auto& r : rows) {
    out += csv_field(r.case_id) + "," + std::to_string(r.run) + "," + (r.ok ? "ok" : "failed") + "," +
           (r.ok ? format_number(r.discrepancy) : "") + ",,,,," + csv_field(r.error) + "\n";
  }
  for (const auto& s : summaries) {
    const bool any = s.ok_runs > 0;
    out += csv_field(s.case_id) + ",all,summary,," + (any ? format_number(s.mean) : "") + "," +
           (any ? format_number(s.stddev) : "") + "," + std::to_string(s.ok_runs) + "," +
           std::to_string(s.failed_runs) + ",\n";
  }
  return out;
}

}  // namespace keymps
