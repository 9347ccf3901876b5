// keymps command-line front end.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "keymps/error.hpp"
#include "keymps/mock_backend.hpp"
#include "keymps/pipeline.hpp"
#include "keymps/primitives.hpp"
#include "keymps/scenario.hpp"
#include "keymps/trajectory_io.hpp"

namespace {

using namespace keymps;

int exit_code(const Error& e) {
  switch (category(e.code())) {
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Backend: return 3;
    case ErrorCategory::Pipeline: return 4;
  }
  return 4;
}

// Flags shared by run and verify. Unset flags leave the config file value alone.
struct RunFlags {
  std::string config;
  std::string image;
  std::string instruction;
  std::string object;
  std::optional<double> height;
  std::string height_mode;
  std::optional<double> margin;
  std::string dictionary;
  std::vector<double> env;
  std::vector<double> shift;
  std::vector<double> home;
  std::string backend;
  std::string mock_rules;
  std::string url;
  std::string model;
  std::string api_key_env;
  std::optional<double> timeout;
  std::optional<double> dt;
  std::string out;
  std::string scenario;
  std::string catalog;
  bool separate = false;
  bool timings = false;
  bool clamp = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("-c,--config", f.config, "JSON pipeline config");
  cmd->add_option("--image", f.image, "environment image (PNG, PGM or PPM)");
  cmd->add_option("-i,--instruction", f.instruction, "task instruction text");
  cmd->add_option("--object", f.object, "object label passed to the backend");
  cmd->add_option("--height", f.height, "object height, m");
  cmd->add_option("--height-mode", f.height_mode, "both | start | end");
  cmd->add_option("--margin", f.margin, "safety margin above the object, m");
  cmd->add_option("-d,--dictionary", f.dictionary, "primitive dictionary JSON (built-in primitives if omitted)");
  cmd->add_option("--env", f.env, "environment size covered by the image, m")->expected(2);
  cmd->add_option("--shift", f.shift, "global pixel shift")->expected(2);
  cmd->add_option("--home", f.home, "end-effector start position, m")->expected(3);
  cmd->add_option("--backend", f.backend, "mock | http");
  cmd->add_option("--mock-rules", f.mock_rules, "mock rules JSON");
  cmd->add_option("--url", f.url, "chat-completions endpoint");
  cmd->add_option("--model", f.model, "model name for the http backend");
  cmd->add_option("--api-key-env", f.api_key_env, "environment variable holding the API key");
  cmd->add_option("--timeout", f.timeout, "http timeout, s");
  cmd->add_option("--dt", f.dt, "integration step, s");
  cmd->add_option("-o,--out", f.out, "output directory");
  cmd->add_option("--scenario", f.scenario, "take instruction, object, height and board from a catalog case");
  cmd->add_option("--catalog", f.catalog, "scenario catalog JSON (built-in if omitted)");
  cmd->add_flag("--separate", f.separate, "ask for keyword and keypoints in two requests");
  cmd->add_flag("--timings", f.timings, "record stage timings in run.json");
  cmd->add_flag("--clamp-keypoints", f.clamp, "clamp out-of-image keypoints instead of rejecting the reply");
}

std::vector<Scenario> catalog_from(const std::string& path) {
  return path.empty() ? builtin_catalog() : load_catalog(path);
}

PipelineConfig build_config(const RunFlags& f) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : PipelineConfig::load(f.config);
  if (!f.scenario.empty()) {
    const auto catalog = catalog_from(f.catalog);
    const Scenario& s = find_scenario(catalog, f.scenario);
    const PipelineConfig sc = scenario_config(s, c.margin, c.dt);
    c.instruction = sc.instruction;
    c.object_label = sc.object_label;
    c.object_height = sc.object_height;
    c.height_mode = sc.height_mode;
    c.env_size = sc.env_size;
    c.scenario_id = sc.scenario_id;
  }
  if (!f.image.empty()) c.image_path = f.image;
  if (!f.instruction.empty()) c.instruction = f.instruction;
  if (!f.object.empty()) c.object_label = f.object;
  if (f.height) c.object_height = *f.height;
  if (!f.height_mode.empty()) c.height_mode = parse_height_mode(f.height_mode);
  if (f.margin) c.margin = *f.margin;
  if (!f.dictionary.empty()) c.dictionary_path = f.dictionary;
  if (f.env.size() == 2) c.env_size = {f.env[0], f.env[1]};
  if (f.shift.size() == 2) c.global_shift = {f.shift[0], f.shift[1]};
  if (f.home.size() == 3) c.home = Vec3{f.home[0], f.home[1], f.home[2]};
  if (!f.backend.empty()) c.backend = f.backend;
  if (!f.mock_rules.empty()) c.mock_rules_path = f.mock_rules;
  if (!f.url.empty()) c.http.url = f.url;
  if (!f.model.empty()) c.http.model = f.model;
  if (!f.api_key_env.empty()) c.http.api_key_env = f.api_key_env;
  if (f.timeout) c.http.timeout_s = *f.timeout;
  if (f.dt) c.dt = *f.dt;
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.separate) c.combined = false;
  if (f.timings) c.record_timings = true;
  if (f.clamp) c.keypoint_policy = KeypointPolicy::Clamp;
  return c;
}

int cmd_run(const RunFlags& flags, bool verify_only) {
  PipelineConfig config = build_config(flags);
  config.verify_only = config.verify_only || verify_only;
  const RunReport report = run_pipeline(config);
  std::printf("keyword: %s\n", report.response.keyword.c_str());
  std::printf("keypoint pairs: %zu\n", report.response.pairs.size());
  if (!report.verify_only) {
    std::printf("segments: %zu\ntrajectory: %zu points over %.3f s\n", report.plan.segments.size(),
                report.trajectory.size(), report.trajectory.duration());
  }
  if (!config.output_dir.empty()) std::printf("artifacts: %s\n", config.output_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyword-selected motion primitives driven by a vision-language backend"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "detect, query the backend and write the trajectory");
  add_run_flags(run, run_flags);
  RunFlags verify_flags;
  auto* verify = app.add_subcommand("verify", "stop after the keypoint overlay; no trajectory");
  add_run_flags(verify, verify_flags);

  LearnRequest learn_req;
  std::optional<double> beta_z;
  auto* learn = app.add_subcommand("learn", "learn a primitive from a t,x,y,z demo CSV");
  learn->add_option("--demo", learn_req.demo_csv, "demonstration CSV")->required();
  learn->add_option("-k,--keyword", learn_req.keyword, "keyword for the new primitive")->required();
  learn->add_option("-d,--dictionary", learn_req.dictionary_path, "dictionary JSON to update")->required();
  learn->add_option("--description", learn_req.description, "one-line description shown to the backend");
  learn->add_option("-n,--basis", learn_req.basis_count, "basis function count")->capture_default_str();
  learn->add_option("--alpha-z", learn_req.gains.alpha_z)->capture_default_str();
  learn->add_option("--beta-z", beta_z, "defaults to alpha_z / 4");
  learn->add_option("--alpha-s", learn_req.gains.alpha_s)->capture_default_str();
  learn->add_flag("-f,--force", learn_req.force, "replace an existing keyword");

  std::string eval_catalog, eval_dictionary, eval_out, eval_cases, eval_artifacts, eval_rules;
  int eval_runs = 10, eval_jobs = 1;
  std::size_t eval_n_gt = 100;
  bool eval_trained = false, eval_optimal = false;
  double eval_margin = 0.02;
  auto* eval = app.add_subcommand("evaluate", "score scenarios against their ground truth with the mock backend");
  eval->add_option("--catalog", eval_catalog, "scenario catalog JSON (built-in if omitted)");
  eval->add_option("-d,--dictionary", eval_dictionary, "primitive dictionary JSON (built-in if omitted)");
  eval->add_option("--cases", eval_cases, "comma-separated case ids");
  eval->add_flag("--trained-only", eval_trained, "only cases marked as trained tasks");
  eval->add_option("-r,--runs", eval_runs, "runs per case")->capture_default_str();
  eval->add_option("-j,--jobs", eval_jobs, "worker threads")->capture_default_str();
  eval->add_option("--n-gt", eval_n_gt, "ground-truth points after downsampling")->capture_default_str();
  eval->add_option("--margin", eval_margin, "safety margin, m")->capture_default_str();
  eval->add_option("--mock-rules", eval_rules, "mock rules JSON");
  eval->add_option("--artifacts", eval_artifacts, "write per-run artifacts under this directory");
  eval->add_flag("--optimal", eval_optimal, "optimal assignment instead of greedy matching");
  eval->add_option("-o,--out", eval_out, "CSV report path (stdout if omitted)");

  std::string demo_keyword = "straight", demo_out;
  auto* demo = app.add_subcommand("demo", "write a built-in demonstration as CSV");
  demo->add_option("-k,--keyword", demo_keyword, "straight | downward | forward | sawing | line")->capture_default_str();
  demo->add_option("-o,--out", demo_out, "output CSV")->required();

  std::string init_out;
  int init_basis = 50;
  auto* init = app.add_subcommand("init-dictionary", "learn every built-in primitive into a dictionary file");
  init->add_option("-o,--out", init_out, "dictionary JSON")->required();
  init->add_option("-n,--basis", init_basis, "basis function count")->capture_default_str();

  std::string fix_scenario, fix_catalog, fix_out;
  double fix_ppm = 2000.0;
  auto* fixture = app.add_subcommand("fixture", "render a scenario's procedural fixture image");
  fixture->add_option("--scenario", fix_scenario, "case id")->required();
  fixture->add_option("--catalog", fix_catalog, "scenario catalog JSON (built-in if omitted)");
  fixture->add_option("--ppm", fix_ppm, "pixels per meter")->capture_default_str();
  fixture->add_option("-o,--out", fix_out, "PNG path")->required();

  std::string catalog_out;
  auto* catalog = app.add_subcommand("catalog", "write the built-in scenario catalog as JSON");
  catalog->add_option("-o,--out", catalog_out, "output path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(run_flags, false);
    if (*verify) return cmd_run(verify_flags, true);

    if (*learn) {
      learn_req.gains.beta_z = beta_z.value_or(learn_req.gains.alpha_z / 4.0);
      const LearnResult r = learn_primitive(learn_req);
      std::printf("learned '%s' with %zu basis functions\n", r.primitive.keyword.c_str(), r.primitive.basis.count());
      std::printf("round-trip rmse: %.6g m (%.3f%% of amplitude)\n", r.rmse, 100.0 * r.relative());
      return 0;
    }

    if (*eval) {
      EvaluateOptions options;
      options.scenarios = catalog_from(eval_catalog);
      if (!eval_cases.empty()) {
        std::vector<Scenario> picked;
        std::size_t pos = 0;
        while (pos <= eval_cases.size()) {
          const auto comma = eval_cases.find(',', pos);
          const std::string id = eval_cases.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
          if (!id.empty()) picked.push_back(find_scenario(options.scenarios, id));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
        options.scenarios = std::move(picked);
      }
      if (eval_trained) {
        std::erase_if(options.scenarios, [](const Scenario& s) { return !s.trained; });
      }
      options.runs = eval_runs;
      options.jobs = eval_jobs;
      options.n_gt = eval_n_gt;
      options.margin = eval_margin;
      options.match = eval_optimal ? MatchMode::Optimal : MatchMode::Greedy;
      options.artifacts_dir = eval_artifacts;
      const PrimitiveDictionary dictionary = load_dictionary_or_builtin(eval_dictionary);
      const MockRules rules = eval_rules.empty() ? MockRules::builtin() : MockRules::load(eval_rules);
      const EvaluationReport report = evaluate(options, dictionary, [&] { return mock_backend(rules); });
      const std::string csv = report.to_csv();
      if (eval_out.empty()) {
        std::fwrite(csv.data(), 1, csv.size(), stdout);
      } else {
        write_text_file(eval_out, csv);
      }
      for (const auto& s : report.summaries) {
        std::fprintf(stderr, "case %s: D = %.6f m (std %.6f), %d ok, %d failed\n", s.case_id.c_str(), s.mean,
                     s.stddev, s.ok_runs, s.failed_runs);
      }
      return 0;
    }

    if (*demo) {
      save_trajectory_csv(builtin_demo(demo_keyword), demo_out);
      return 0;
    }

    if (*init) {
      build_builtin_dictionary(init_basis).save(init_out);
      return 0;
    }

    if (*fixture) {
      const auto scenarios = catalog_from(fix_catalog);
      save_png(render_fixture(find_scenario(scenarios, fix_scenario), fix_ppm), fix_out);
      return 0;
    }

    if (*catalog) {
      const std::string text = catalog_to_json(builtin_catalog());
      if (catalog_out.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
      } else {
        write_text_file(catalog_out, text);
      }
      return 0;
    }
  } catch (const Error& e) {
    if (e.stage().empty()) {
      std::cerr << "error: " << e.what() << "\n";
    } else {
      std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
    }
    if (e.index()) std::cerr << "  at index " << *e.index() << "\n";
    if (!e.raw().empty()) std::cerr << "  backend reply: " << e.raw() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
