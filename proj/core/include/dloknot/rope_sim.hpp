#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dloknot/curve.hpp"
#include "dloknot/move_planner.hpp"
#include "dloknot/pose.hpp"

namespace dloknot {

enum class SelfCollisionMode {
  kNone,
  kNodePair,  // spheres of rope_radius at the nodes
  kCapsule,   // capsules around the segments
};

SelfCollisionMode parse_self_collision(const std::string& name);
std::string to_string(SelfCollisionMode mode);

struct SimConfig {
  std::size_t node_count = 60;
  double rope_length = 0.88;
  double rope_radius = 0.004;
  double gravity = 9.81;
  double dt = 1.0 / 240.0;
  std::size_t solver_iterations = 20;
  std::size_t substeps = 4;
  double friction_coeff = 0.8;
  double rope_mass = 0.02;  // kg
  /// Flexural rigidity EI in N m^2; 0 gives a limp chain.
  double bending_stiffness = 4e-5;
  /// Neighbors held by the gripper besides the grasped node, alternating
  /// tail side then head side; 1 holds only the tail-side neighbor.
  std::size_t grip_neighbors = 2;
  /// Gripper translation speed (m/s) and yaw rate (rad/s) between waypoints.
  double gripper_speed = 0.1;
  double gripper_yaw_rate = 1.0;
  /// Velocity retention per step.
  double damping = 0.995;
  /// Simulated time after each release.
  double settle_time = 1.0;
  SelfCollisionMode self_collision = SelfCollisionMode::kCapsule;
  /// Switch to capsule collision while an X plan executes.
  bool capsule_during_x = true;

  double rest_spacing() const { return rope_length / static_cast<double>(node_count - 1); }
  /// Throws ConfigError.
  void validate() const;
};

/// Gripper attachment. The grasped node keeps the offset it had in the
/// gripper frame when the gripper closed; the held neighbors sit at whole
/// rest spacings from it along the gripper y axis so the gripper yaw is
/// imposed on the rope.
struct Pin {
  std::size_t node = 0;
  std::vector<std::size_t> held;  // node first, then neighbors
  std::vector<Vec3> offsets;      // gripper-frame offsets, parallel to `held`
  Pose target;
};

struct SimState {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  std::optional<Pin> pin;
  double time = 0.0;
};

struct ArcPlacement {
  Vec2 center = Vec2::Zero();
  double yaw = 0.0;
};

struct ArcBounds {
  double min_angle = 1.5707963267948966;
  double max_angle = 4.71238898038469;
};

/// Rope laid on a circular arc in the table plane at z = rope_radius with
/// consecutive nodes exactly one rest spacing apart. The arc's midpoint lies
/// on the local -y axis, the node centroid at `placement.center`.
SimState init_symmetric_arc(const SimConfig& config, double arc_angle, const ArcPlacement& placement = {},
                            const ArcBounds& bounds = {});

/// Straight rope along +x from `start`, raised by the rope radius so it rests
/// on the table when start.z() = 0.
SimState init_straight(const SimConfig& config, const Vec3& start = Vec3::Zero());

/// Equal-or-weighted position projection of one distance constraint.
void project_distance(Vec3& a, Vec3& b, double inv_mass_a, double inv_mass_b, double rest);

/// One substepped position-based dynamics update in place. Throws
/// NumericalBlowup when any node leaves a 10 * rope_length ball around the
/// origin.
void step_in_place(SimState& state, const SimConfig& config);
SimState step(SimState state, const SimConfig& config);

using FrameSink = std::function<void(const SimState&)>;

/// Simulates the gripper through the plan's waypoints. Throws GraspMiss when
/// the closing waypoint is more than two rest spacings from every node.
SimState execute_plan(SimState state, const MovePlan& plan, const SimConfig& config, const FrameSink& sink = {});

/// Releases any pin and simulates for `duration` seconds.
SimState settle(SimState state, const SimConfig& config, double duration, const FrameSink& sink = {});

/// Arc-length resampling of the node chain to M control points.
Curve true_curve(const SimState& state, std::size_t M, double rope_length);

double rope_length_of(const SimState& state);
double kinetic_energy(const SimState& state, double total_mass = 1.0);
/// Smallest distance between nodes at least two indices apart.
double min_nonadjacent_distance(const SimState& state);

nlohmann::json frame_to_json(const SimState& state);

/// JSONL trajectory writer: one record per `stride` frames.
class TrajectoryWriter {
 public:
  TrajectoryWriter(std::ostream& out, std::size_t stride = 1) : out_(out), stride_(stride == 0 ? 1 : stride) {}
  void operator()(const SimState& state);
  FrameSink sink() {
    return [this](const SimState& s) { (*this)(s); };
  }

 private:
  std::ostream& out_;
  std::size_t stride_;
  std::size_t count_ = 0;
};

std::vector<std::vector<Vec3>> read_trajectory(std::istream& in);

}  // namespace dloknot
