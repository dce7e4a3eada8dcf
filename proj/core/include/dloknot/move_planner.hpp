#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dloknot/curve.hpp"
#include "dloknot/pose.hpp"
#include "dloknot/topology.hpp"

namespace dloknot {

enum class GripperAction { kNone, kClose, kOpen };
enum class Primitive { kRI, kRII, kX };

std::string to_string(GripperAction action);
std::string to_string(Primitive primitive);

struct Waypoint {
  Pose pose;
  GripperAction gripper = GripperAction::kNone;
  std::string label;
};

struct MovePlan {
  Primitive primitive = Primitive::kRI;
  std::vector<Waypoint> waypoints;
  int expected_crossing_delta = 0;
  /// Lift height used by the plan (meters).
  double lift_height = 0.0;

  /// Throws InvalidPlan unless there are >= 3 waypoints, the first closes and
  /// the last opens.
  void validate() const;
};

int expected_crossing_delta(Primitive primitive);

struct PlannerParams {
  double lambda = 0.1;
  double gamma = 0.4;
  std::size_t r = 5;
  std::size_t M = 30;
  /// Height of the rope centerline when resting on the table (table + radius).
  double place_height = 0.004;
  double min_gap = kDefaultMinGap;
  GeodesicMode geodesic_mode = GeodesicMode::kArcLength;

  /// Throws ConfigError.
  void validate() const;
};

/// Twist the middle of a crossing-free symmetric arc into a one-crossing loop.
MovePlan plan_RI(const Curve& curve, const PlannerParams& params);

/// Carry the middle over the crossing bottom to the undertip.
MovePlan plan_RII(const Curve& curve, const CrossingDiagram& diagram, const PlannerParams& params);

/// Crossing the X move reflects the overtip through when several are present:
/// the one whose over and under passages enclose the rope middle with the
/// shortest enclosed stretch of rope, i.e. the crossing closing the loop
/// that holds the midpoint.
std::optional<std::size_t> loop_crossing(const CrossingDiagram& diagram);

/// Push the tip nearest the hull centroid through the loop. The landmarks
/// come from `designated` when given, else from `loop_crossing`.
MovePlan plan_X(const Curve& curve, const CrossingDiagram& diagram, const PlannerParams& params,
                std::optional<std::size_t> designated = std::nullopt);

/// Source of observations and executor of plans for the overhand sequence.
class World {
 public:
  virtual ~World() = default;
  virtual Curve observe() = 0;
  virtual void execute(const MovePlan& plan) = 0;
};

struct MoveRecord {
  Primitive primitive = Primitive::kRI;
  bool attempted = false;
  bool passed = false;
  std::size_t crossings_before = 0;
  std::size_t crossings_after = 0;
  std::string failure;
};

struct OverhandTrace {
  std::vector<MovePlan> plans;
  std::vector<MoveRecord> moves;
  std::optional<CrossingDiagram> final_diagram;
};

/// RI, re-observe, RII, re-observe, X, re-observe. Crossing-count gates follow
/// RI (+1) and RII (+2); the X gate is `is_overhand` on the final observation.
/// Throws GateFailed naming the move, or propagates planner/executor errors.
/// `trace`, when given, is filled as far as the sequence got.
std::vector<MovePlan> plan_overhand(World& world, const PlannerParams& params, OverhandTrace* trace = nullptr);

nlohmann::json to_json(const MovePlan& plan);
MovePlan plan_from_json(const nlohmann::json& j);

/// One line per waypoint: index, label, gripper, x, y, z, yaw (deg).
std::string format_plan_table(const MovePlan& plan);

}  // namespace dloknot
