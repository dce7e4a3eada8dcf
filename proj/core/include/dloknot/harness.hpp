#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dloknot/move_planner.hpp"
#include "dloknot/observation.hpp"
#include "dloknot/rope_sim.hpp"

namespace dloknot {

/// Initial-configuration distribution for trials.
struct SamplerConfig {
  double arc_min_deg = 100.0;
  double arc_max_deg = 200.0;
  /// Side of the square workspace centered on the origin (meters).
  double workspace = 1.0;
  /// Uniform offset of the arc centroid from the workspace center (meters).
  double center_jitter = 0.1;
};

struct ExperimentConfig {
  SimConfig sim;
  PlannerParams planner;
  ObservationConfig observation;
  SamplerConfig sampler;
  std::size_t workers = 1;

  /// Throws ConfigError.
  void validate() const;
};

/// Unknown keys are rejected so typos surface as ConfigError.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
nlohmann::json to_json(const ExperimentConfig& config);

/// Per-trial seed derived from the batch seed; independent of worker count.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial);

struct TrialSetup {
  double arc_angle = 0.0;
  ArcPlacement placement;
};

TrialSetup sample_setup(const SamplerConfig& sampler, std::uint64_t seed);

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double arc_angle_deg = 0.0;
  ArcPlacement placement;
  /// RI, RII, X in order; unattempted moves have attempted = false.
  std::vector<MoveRecord> moves;
  bool success = false;
  /// Empty on success, else one of the fixed failure causes (GraspMiss,
  /// GateFailed:RI, GateFailed:RII, NotOverhand, NumericalBlowup, ...).
  std::string failure;
  /// Knot test on the full-resolution simulated rope after the last move.
  bool true_overhand = false;
  double wall_time_s = 0.0;
};

/// Planner-side view of a simulated trial: observations go through the
/// tracker emulation, plans run on the simulator.
class SimWorld : public World {
 public:
  SimWorld(SimState state, const ExperimentConfig& config, std::uint64_t observation_seed, FrameSink sink = {});

  Curve observe() override;
  void execute(const MovePlan& plan) override;

  const SimState& state() const { return state_; }

 private:
  SimState state_;
  const ExperimentConfig& config_;
  std::uint64_t observation_seed_;
  std::uint64_t observations_ = 0;
  FrameSink sink_;
};

struct TrialArtifacts {
  SimState final_state;
  OverhandTrace trace;
};

TrialResult run_trial(const ExperimentConfig& config, std::uint64_t master_seed, std::size_t trial,
                      TrialArtifacts* artifacts = nullptr, const FrameSink& sink = {});

/// Runs trials 0..n-1 on up to config.workers threads. Results are ordered by
/// trial id and do not depend on the worker count.
std::vector<TrialResult> run_trials(std::size_t n, const ExperimentConfig& config, std::uint64_t master_seed,
                                    std::vector<TrialArtifacts>* artifacts = nullptr);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct RateSummary {
  std::size_t attempted = 0;
  std::size_t passed = 0;
  double rate = 0.0;
  Interval wilson95;
};

struct Summary {
  std::size_t trials = 0;
  /// Keyed by primitive name; rate is conditional on the move being attempted.
  std::map<std::string, RateSummary> moves;
  RateSummary overall;
  std::map<std::string, std::size_t> failures;
};

Summary summarize(const std::vector<TrialResult>& results);

nlohmann::json to_json(const TrialResult& result);
nlohmann::json to_json(const Summary& summary);
std::string results_jsonl(const std::vector<TrialResult>& results);
std::string summary_csv(const std::vector<TrialResult>& results);
/// Table-style text report with the hardware reference rates alongside.
std::string format_summary_table(const Summary& summary);

}  // namespace dloknot
