#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dloknot/error.hpp"
#include "dloknot/harness.hpp"
#include "dloknot/move_planner.hpp"
#include "dloknot/render.hpp"
#include "dloknot/topology.hpp"

namespace fs = std::filesystem;
using namespace dloknot;

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, path + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kConfigError, "cannot write " + path.string());
  out << text;
}

struct RunArgs {
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::string config;
  std::string out = "out";
  std::optional<double> noise;
  std::optional<double> depth_quant;
  std::optional<std::string> geodesic_mode;
  std::optional<std::size_t> workers;
  bool render = false;
  bool quiet = false;
};

int run(const RunArgs& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg = experiment_config_from_json(read_json(a.config));
  if (a.noise) cfg.observation.noise_sigma = *a.noise;
  if (a.depth_quant) cfg.observation.depth_quantization = *a.depth_quant;
  if (a.geodesic_mode) cfg.planner.geodesic_mode = parse_geodesic_mode(*a.geodesic_mode);
  if (a.workers) cfg.workers = *a.workers;
  cfg.validate();

  fs::create_directories(a.out);
  std::vector<TrialArtifacts> artifacts;
  const auto results = run_trials(a.trials, cfg, a.seed, a.render ? &artifacts : nullptr);
  const auto summary = summarize(results);

  write_file(fs::path(a.out) / "results.jsonl", results_jsonl(results));
  write_file(fs::path(a.out) / "summary.csv", summary_csv(results));
  nlohmann::json sj = to_json(summary);
  sj["config"] = to_json(cfg);
  sj["seed"] = a.seed;
  write_file(fs::path(a.out) / "summary.json", sj.dump(2) + "\n");
  if (a.render) {
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
      if (artifacts[i].final_state.positions.size() < 2) continue;
      write_file(fs::path(a.out) / ("trial_" + std::to_string(i) + ".svg"),
                 render_scene(artifacts[i].final_state.positions, artifacts[i].trace.plans));
    }
  }
  if (!a.quiet) std::cout << format_summary_table(summary);
  return 0;
}

Curve load_curve(const std::string& path) {
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path);
    return curve_from_csv(in);
  }
  return curve_from_json(read_json(path));
}

int plan(const std::string& curve_path, const std::string& move, const std::string& config, bool as_json) {
  ExperimentConfig cfg;
  if (!config.empty()) cfg = experiment_config_from_json(read_json(config));
  const Curve curve = load_curve(curve_path);
  const auto diagram = project_and_find_crossings(curve, cfg.planner.min_gap);
  MovePlan p;
  if (move == "RI") {
    p = plan_RI(curve, cfg.planner);
  } else if (move == "RII") {
    p = plan_RII(curve, diagram, cfg.planner);
  } else {
    p = plan_X(curve, diagram, cfg.planner);
  }
  if (as_json) {
    std::cout << to_json(p).dump(2) << "\n";
  } else {
    std::cout << format_plan_table(p);
  }
  return 0;
}

int render(const std::string& input, const std::vector<std::string>& plan_paths, const std::string& out) {
  std::vector<MovePlan> plans;
  for (const auto& p : plan_paths) plans.push_back(plan_from_json(read_json(p)));
  std::string svg;
  if (input.size() > 6 && input.substr(input.size() - 6) == ".jsonl") {
    std::ifstream in(input);
    if (!in) throw Error(ErrorCode::kParseError, "cannot open " + input);
    svg = render_scene(read_trajectory(in), plans);
  } else {
    svg = render_scene(load_curve(input).points(), plans);
  }
  if (out.empty()) {
    std::cout << svg;
  } else {
    write_file(out, svg);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rope knot-tying planner and simulated trial runner"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run a batch of simulated knot-tying trials");
  run_cmd->add_option("--trials", ra.trials, "Number of trials")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", ra.seed, "Master seed");
  run_cmd->add_option("--config", ra.config, "Experiment config JSON");
  run_cmd->add_option("--out", ra.out, "Output directory");
  run_cmd->add_option("--noise", ra.noise, "Observation noise sigma (m)");
  run_cmd->add_option("--depth-quant", ra.depth_quant, "Observation depth quantization (m)");
  run_cmd->add_option("--geodesic-mode", ra.geodesic_mode, "arc|literal");
  run_cmd->add_option("--workers", ra.workers, "Worker threads");
  run_cmd->add_flag("--render", ra.render, "Write trial_<id>.svg per trial");
  run_cmd->add_flag("--quiet", ra.quiet, "Do not print the summary table");

  std::string curve_path, move = "RI", plan_config;
  bool as_json = false;
  auto* plan_cmd = app.add_subcommand("plan", "Plan one move for a curve (JSON or CSV)");
  plan_cmd->add_option("curve", curve_path, "Curve file")->required();
  plan_cmd->add_option("--move", move, "RI|RII|X")->check(CLI::IsMember({"RI", "RII", "X"}));
  plan_cmd->add_option("--config", plan_config, "Experiment config JSON");
  plan_cmd->add_flag("--json", as_json, "Print the plan as JSON");

  std::string render_input, render_out;
  std::vector<std::string> plan_paths;
  auto* render_cmd = app.add_subcommand("render", "Render a curve or JSONL trajectory to SVG");
  render_cmd->add_option("input", render_input, "Curve file or trajectory .jsonl")->required();
  render_cmd->add_option("--plan", plan_paths, "Plan JSON files to overlay");
  render_cmd->add_option("-o,--out", render_out, "SVG path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return run(ra);
    if (*plan_cmd) return plan(curve_path, move, plan_config, as_json);
    if (*render_cmd) return render(render_input, plan_paths, render_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kConfigError ? 2 : 1;
  }
  return 0;
}
