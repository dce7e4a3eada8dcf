#include "dloknot/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dloknot/error.hpp"
#include "dloknot/topology.hpp"

namespace dloknot {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& section) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigError, "'" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw Error(ErrorCode::kConfigError, "unknown key '" + key + "' in " + section);
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Reference rates from the physical hardware experiments; reported next to
// simulated rates, never reproduced.
struct Baseline {
  const char* name;
  double rate;
};
constexpr Baseline kHardwarePerMove[] = {{"RI", 0.937}, {"RII", 0.867}, {"X", 0.615}};
constexpr double kHardwareOverall = 0.50;
constexpr std::size_t kHardwareTrials = 16;
constexpr Baseline kLiteratureOverall[] = {{"DDOD", 0.66}, {"GSP", 0.6}, {"Imitation", 0.38}};

}  // namespace

void ExperimentConfig::validate() const {
  sim.validate();
  planner.validate();
  observation.validate();
  if (!(sampler.arc_min_deg > 0.0 && sampler.arc_min_deg <= sampler.arc_max_deg)) {
    throw Error(ErrorCode::kConfigError, "sampler arc range is empty");
  }
  if (!(sampler.workspace > 0.0) || !(sampler.center_jitter >= 0.0)) {
    throw Error(ErrorCode::kConfigError, "sampler workspace must be positive and jitter non-negative");
  }
  if (workers == 0) throw Error(ErrorCode::kConfigError, "workers must be at least 1");
}

ExperimentConfig experiment_config_from_json(const json& j, ExperimentConfig base) {
  try {
    reject_unknown(j, {"sim", "planner", "observation", "sampler", "workers"}, "config");
    bool place_height_given = false;
    if (j.contains("sim")) {
      const auto& s = j.at("sim");
      reject_unknown(s,
                     {"node_count", "rope_length", "rope_radius", "gravity", "dt", "solver_iterations", "substeps",
                      "friction_coeff", "rope_mass", "bending_stiffness", "grip_neighbors", "gripper_speed", "gripper_yaw_rate", "damping", "settle_time",
                      "self_collision", "capsule_during_x"},
                     "sim");
      auto& c = base.sim;
      read(s, "node_count", c.node_count);
      read(s, "rope_length", c.rope_length);
      read(s, "rope_radius", c.rope_radius);
      read(s, "gravity", c.gravity);
      read(s, "dt", c.dt);
      read(s, "solver_iterations", c.solver_iterations);
      read(s, "substeps", c.substeps);
      read(s, "friction_coeff", c.friction_coeff);
      read(s, "rope_mass", c.rope_mass);
      read(s, "bending_stiffness", c.bending_stiffness);
      read(s, "grip_neighbors", c.grip_neighbors);
      read(s, "gripper_speed", c.gripper_speed);
      read(s, "gripper_yaw_rate", c.gripper_yaw_rate);
      read(s, "damping", c.damping);
      read(s, "settle_time", c.settle_time);
      read(s, "capsule_during_x", c.capsule_during_x);
      if (s.contains("self_collision")) c.self_collision = parse_self_collision(s.at("self_collision").get<std::string>());
    }
    if (j.contains("planner")) {
      const auto& p = j.at("planner");
      reject_unknown(p, {"lambda", "gamma", "r", "M", "place_height", "min_gap", "geodesic_mode"}, "planner");
      auto& c = base.planner;
      read(p, "lambda", c.lambda);
      read(p, "gamma", c.gamma);
      read(p, "r", c.r);
      read(p, "M", c.M);
      read(p, "min_gap", c.min_gap);
      place_height_given = p.contains("place_height");
      read(p, "place_height", c.place_height);
      if (p.contains("geodesic_mode")) c.geodesic_mode = parse_geodesic_mode(p.at("geodesic_mode").get<std::string>());
    }
    if (!place_height_given) base.planner.place_height = base.sim.rope_radius;
    if (j.contains("observation")) {
      reject_unknown(j.at("observation"), {"noise_sigma", "depth_quantization", "occlusion_radius", "seed"},
                     "observation");
      base.observation = observation_config_from_json(j.at("observation"), base.observation);
    }
    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      reject_unknown(s, {"arc_min_deg", "arc_max_deg", "workspace", "center_jitter"}, "sampler");
      read(s, "arc_min_deg", base.sampler.arc_min_deg);
      read(s, "arc_max_deg", base.sampler.arc_max_deg);
      read(s, "workspace", base.sampler.workspace);
      read(s, "center_jitter", base.sampler.center_jitter);
    }
    read(j, "workers", base.workers);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  base.validate();
  return base;
}

json to_json(const ExperimentConfig& c) {
  return {{"sim",
           {{"node_count", c.sim.node_count},
            {"rope_length", c.sim.rope_length},
            {"rope_radius", c.sim.rope_radius},
            {"gravity", c.sim.gravity},
            {"dt", c.sim.dt},
            {"solver_iterations", c.sim.solver_iterations},
            {"substeps", c.sim.substeps},
            {"friction_coeff", c.sim.friction_coeff},
            {"rope_mass", c.sim.rope_mass},
            {"bending_stiffness", c.sim.bending_stiffness},
            {"grip_neighbors", c.sim.grip_neighbors},
            {"gripper_speed", c.sim.gripper_speed},
            {"gripper_yaw_rate", c.sim.gripper_yaw_rate},
            {"damping", c.sim.damping},
            {"settle_time", c.sim.settle_time},
            {"self_collision", to_string(c.sim.self_collision)},
            {"capsule_during_x", c.sim.capsule_during_x}}},
          {"planner",
           {{"lambda", c.planner.lambda},
            {"gamma", c.planner.gamma},
            {"r", c.planner.r},
            {"M", c.planner.M},
            {"place_height", c.planner.place_height},
            {"min_gap", c.planner.min_gap},
            {"geodesic_mode", to_string(c.planner.geodesic_mode)}}},
          {"observation", to_json(c.observation)},
          {"sampler",
           {{"arc_min_deg", c.sampler.arc_min_deg},
            {"arc_max_deg", c.sampler.arc_max_deg},
            {"workspace", c.sampler.workspace},
            {"center_jitter", c.sampler.center_jitter}}},
          {"workers", c.workers}};
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
  return splitmix64(splitmix64(master_seed) ^ static_cast<std::uint64_t>(trial));
}

TrialSetup sample_setup(const SamplerConfig& sampler, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TrialSetup setup;
  const double deg = sampler.arc_min_deg + (sampler.arc_max_deg - sampler.arc_min_deg) * unit(rng);
  setup.arc_angle = deg * std::numbers::pi / 180.0;
  setup.placement.yaw = 2.0 * std::numbers::pi * unit(rng);
  const double jx = (2.0 * unit(rng) - 1.0) * sampler.center_jitter;
  const double jy = (2.0 * unit(rng) - 1.0) * sampler.center_jitter;
  setup.placement.center = {jx, jy};
  return setup;
}

SimWorld::SimWorld(SimState state, const ExperimentConfig& config, std::uint64_t observation_seed, FrameSink sink)
    : state_(std::move(state)), config_(config), observation_seed_(observation_seed), sink_(std::move(sink)) {}

Curve SimWorld::observe() {
  ObservationConfig obs = config_.observation;
  obs.seed = splitmix64(observation_seed_ ^ splitmix64(obs.seed + observations_++));
  return dloknot::observe(true_curve(state_, config_.planner.M, config_.sim.rope_length), obs);
}

void SimWorld::execute(const MovePlan& plan) { state_ = execute_plan(std::move(state_), plan, config_.sim, sink_); }

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t master_seed, std::size_t trial,
                      TrialArtifacts* artifacts, const FrameSink& sink) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult result;
  result.trial = trial;
  result.seed = trial_seed(master_seed, trial);
  for (auto p : {Primitive::kRI, Primitive::kRII, Primitive::kX}) {
    MoveRecord rec;
    rec.primitive = p;
    result.moves.push_back(rec);
  }

  const TrialSetup setup = sample_setup(config.sampler, result.seed);
  result.arc_angle_deg = setup.arc_angle * 180.0 / std::numbers::pi;
  result.placement = setup.placement;

  std::optional<SimWorld> world;
  OverhandTrace trace;
  try {
    ArcBounds bounds;
    bounds.min_angle = std::min(bounds.min_angle, setup.arc_angle);
    bounds.max_angle = std::max(bounds.max_angle, setup.arc_angle);
    world.emplace(init_symmetric_arc(config.sim, setup.arc_angle, setup.placement, bounds), config,
                  splitmix64(result.seed), sink);
    plan_overhand(*world, config.planner, &trace);
  } catch (const Error& e) {
    result.failure = std::string(to_string(e.code()));
  }
  for (const auto& rec : trace.moves) {
    auto& slot = result.moves[static_cast<std::size_t>(rec.primitive)];
    slot = rec;
    if (!rec.passed && !rec.failure.empty()) result.failure = rec.failure == "GateFailed:X" ? "NotOverhand" : rec.failure;
  }
  if (world) {
    try {
      const Curve truth(world->state().positions, config.sim.rope_length);
      result.true_overhand = is_overhand(project_and_find_crossings(truth, config.planner.min_gap));
    } catch (const Error&) {
      result.true_overhand = false;
    }
    if (artifacts) {
      artifacts->final_state = world->state();
      artifacts->trace = trace;
    }
  }
  result.success = result.failure.empty() && result.true_overhand;
  if (result.failure.empty() && !result.success) result.failure = "NotOverhand";
  result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<TrialResult> run_trials(std::size_t n, const ExperimentConfig& config, std::uint64_t master_seed,
                                    std::vector<TrialArtifacts>* artifacts) {
  if (n == 0) throw Error(ErrorCode::kConfigError, "at least one trial is required");
  config.validate();
  std::vector<TrialResult> results(n);
  if (artifacts) artifacts->assign(n, TrialArtifacts{});
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      results[i] = run_trial(config, master_seed, i, artifacts ? &(*artifacts)[i] : nullptr);
    }
  };
  const std::size_t threads = std::min(config.workers, n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

RateSummary rate_of(std::size_t passed, std::size_t attempted) {
  RateSummary r;
  r.attempted = attempted;
  r.passed = passed;
  r.rate = attempted ? static_cast<double>(passed) / static_cast<double>(attempted) : 0.0;
  r.wilson95 = wilson_interval(passed, attempted);
  return r;
}

json to_json(const RateSummary& r) {
  return {{"attempted", r.attempted},
          {"passed", r.passed},
          {"rate", r.rate},
          {"wilson95", {r.wilson95.lo, r.wilson95.hi}}};
}

}  // namespace

Summary summarize(const std::vector<TrialResult>& results) {
  Summary s;
  s.trials = results.size();
  std::size_t successes = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> moves;
  for (const auto& name : {"RI", "RII", "X"}) moves[name] = {0, 0};
  for (const auto& r : results) {
    successes += r.success ? 1 : 0;
    if (!r.failure.empty()) s.failures[r.failure]++;
    for (const auto& m : r.moves) {
      if (!m.attempted) continue;
      auto& [passed, attempted] = moves[to_string(m.primitive)];
      ++attempted;
      passed += m.passed ? 1 : 0;
    }
  }
  for (const auto& [name, pa] : moves) s.moves[name] = rate_of(pa.first, pa.second);
  s.overall = rate_of(successes, results.size());
  return s;
}

json to_json(const TrialResult& r) {
  json moves = json::array();
  for (const auto& m : r.moves) {
    moves.push_back({{"move", to_string(m.primitive)},
                     {"attempted", m.attempted},
                     {"passed", m.passed},
                     {"crossings_before", m.crossings_before},
                     {"crossings_after", m.crossings_after},
                     {"failure", m.failure}});
  }
  return {{"trial", r.trial},
          {"seed", r.seed},
          {"arc_angle_deg", r.arc_angle_deg},
          {"placement", {{"center", {r.placement.center.x(), r.placement.center.y()}}, {"yaw", r.placement.yaw}}},
          {"moves", std::move(moves)},
          {"success", r.success},
          {"true_overhand", r.true_overhand},
          {"failure", r.failure}};
}

json to_json(const Summary& s) {
  json moves = json::object();
  for (const auto& [name, r] : s.moves) moves[name] = to_json(r);
  json baseline_moves = json::object();
  for (const auto& b : kHardwarePerMove) baseline_moves[b.name] = b.rate;
  json literature = json::object();
  for (const auto& b : kLiteratureOverall) literature[b.name] = b.rate;
  return {{"trials", s.trials},
          {"moves", std::move(moves)},
          {"overall", to_json(s.overall)},
          {"failures", s.failures},
          {"hardware_baseline",
           {{"reproduced", false},
            {"note", "physical robot and tracker results; reported for reference only"},
            {"trials", kHardwareTrials},
            {"moves", std::move(baseline_moves)},
            {"overall", kHardwareOverall},
            {"other_methods_overall", std::move(literature)}}}};
}

std::string results_jsonl(const std::vector<TrialResult>& results) {
  std::string out;
  for (const auto& r : results) out += to_json(r).dump() + "\n";
  return out;
}

std::string summary_csv(const std::vector<TrialResult>& results) {
  std::ostringstream out;
  out << "trial,seed,arc_angle_deg,ri,rii,x,crossings_ri,crossings_rii,crossings_x,success,failure,wall_time_s\n";
  for (const auto& r : results) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", r.arc_angle_deg);
    out << r.trial << ',' << r.seed << ',' << buf;
    for (const auto& m : r.moves) out << ',' << (m.attempted ? (m.passed ? "pass" : "fail") : "skip");
    for (const auto& m : r.moves) out << ',' << (m.attempted ? std::to_string(m.crossings_after) : "");
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_time_s);
    out << ',' << (r.success ? 1 : 0) << ',' << r.failure << ',' << buf << '\n';
  }
  return out.str();
}

std::string format_summary_table(const Summary& s) {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %8s %18s %10s\n", "move", "passed", "tried", "rate", "wilson95",
                "hardware");
  out << line;
  for (const auto& b : kHardwarePerMove) {
    const auto& r = s.moves.at(b.name);
    std::snprintf(line, sizeof line, "%-10s %8zu %8zu %8.3f     [%.3f, %.3f] %10.3f\n", b.name, r.passed,
                  r.attempted, r.rate, r.wilson95.lo, r.wilson95.hi, b.rate);
    out << line;
  }
  std::snprintf(line, sizeof line, "%-10s %8zu %8zu %8.3f     [%.3f, %.3f] %10.3f\n", "overall", s.overall.passed,
                s.overall.attempted, s.overall.rate, s.overall.wilson95.lo, s.overall.wilson95.hi, kHardwareOverall);
  out << line;
  out << "hardware column: physical-robot reference rates, not reproduced by this simulation\n";
  for (const auto& [cause, count] : s.failures) out << "  failure " << cause << ": " << count << "\n";
  return out.str();
}

}  // namespace dloknot
