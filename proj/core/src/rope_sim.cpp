#include "dloknot/rope_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dloknot/error.hpp"

namespace dloknot {

SelfCollisionMode parse_self_collision(const std::string& name) {
  if (name == "none") return SelfCollisionMode::kNone;
  if (name == "node" || name == "node-pair") return SelfCollisionMode::kNodePair;
  if (name == "capsule") return SelfCollisionMode::kCapsule;
  throw Error(ErrorCode::kConfigError, "unknown self-collision mode '" + name + "'");
}

std::string to_string(SelfCollisionMode mode) {
  switch (mode) {
    case SelfCollisionMode::kNone: return "none";
    case SelfCollisionMode::kNodePair: return "node-pair";
    case SelfCollisionMode::kCapsule: return "capsule";
  }
  return "none";
}

void SimConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigError, what); };
  if (node_count < 3) fail("node_count must be at least 3");
  if (!(rope_length > 0.0)) fail("rope_length must be positive");
  if (!(rope_radius > 0.0)) fail("rope_radius must be positive");
  if (!(gravity > 0.0)) fail("gravity must be positive");
  if (!(dt > 0.0)) fail("dt must be positive");
  if (solver_iterations == 0 || substeps == 0) fail("solver_iterations and substeps must be positive");
  if (!(friction_coeff > 0.0)) fail("friction_coeff must be positive");
  if (grip_neighbors == 0 || grip_neighbors + 1 > node_count) fail("grip_neighbors must lie in [1, node_count - 1]");
  if (!(bending_stiffness >= 0.0)) fail("bending_stiffness must be non-negative");
  if (!(rope_mass > 0.0)) fail("rope_mass must be positive");
  if (!(gripper_speed > 0.0) || !(gripper_yaw_rate > 0.0)) fail("gripper speeds must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) fail("damping must lie in (0, 1]");
  if (!(settle_time >= 0.0)) fail("settle_time must be non-negative");
  if (!(dt * gripper_speed < rest_spacing())) fail("gripper moves more than one rest spacing per step");
}

SimState init_symmetric_arc(const SimConfig& config, double arc_angle, const ArcPlacement& placement,
                            const ArcBounds& bounds) {
  config.validate();
  if (!(arc_angle >= bounds.min_angle && arc_angle <= bounds.max_angle)) {
    throw Error(ErrorCode::kInvalidArc, "arc angle " + std::to_string(arc_angle) + " outside bounds");
  }
  const std::size_t n = config.node_count;
  const double dphi = arc_angle / static_cast<double>(n - 1);
  // Chord spacing equals the rest spacing exactly.
  const double radius = config.rest_spacing() / (2.0 * std::sin(0.5 * dphi));
  std::vector<Vec3> local(n);
  Vec3 centroid = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = -0.5 * arc_angle + dphi * static_cast<double>(i);
    local[i] = {radius * std::sin(phi), -radius * std::cos(phi), config.rope_radius};
    centroid += local[i];
  }
  centroid /= static_cast<double>(n);
  const double c = std::cos(placement.yaw);
  const double s = std::sin(placement.yaw);
  SimState state;
  state.positions.resize(n);
  state.velocities.assign(n, Vec3::Zero());
  for (std::size_t i = 0; i < n; ++i) {
    const double x = local[i].x() - centroid.x();
    const double y = local[i].y() - centroid.y();
    state.positions[i] = {placement.center.x() + c * x - s * y, placement.center.y() + s * x + c * y,
                          config.rope_radius};
  }
  return state;
}

SimState init_straight(const SimConfig& config, const Vec3& start) {
  config.validate();
  SimState state;
  state.positions.resize(config.node_count);
  state.velocities.assign(config.node_count, Vec3::Zero());
  for (std::size_t i = 0; i < config.node_count; ++i) {
    state.positions[i] = start + Vec3(config.rest_spacing() * static_cast<double>(i), 0.0, config.rope_radius);
  }
  return state;
}

void project_distance(Vec3& a, Vec3& b, double inv_mass_a, double inv_mass_b, double rest) {
  const double w = inv_mass_a + inv_mass_b;
  if (w <= 0.0) return;
  const Vec3 d = a - b;
  const double len = d.norm();
  if (len < 1e-15) return;
  const Vec3 corr = (len - rest) / (len * w) * d;
  a -= inv_mass_a * corr;
  b += inv_mass_b * corr;
}

namespace {

struct SegmentPair {
  std::size_t i;
  std::size_t j;
};

// Closest points between segments p0p1 and q0q1; returns parameters (s, t).
std::pair<double, double> closest_parameters(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  constexpr double eps = 1e-18;
  if (a <= eps && e <= eps) return {0.0, 0.0};
  if (a <= eps) return {0.0, std::clamp(f / e, 0.0, 1.0)};
  const double c = d1.dot(r);
  if (e <= eps) return {std::clamp(-c / a, 0.0, 1.0), 0.0};
  const double b = d1.dot(d2);
  const double denom = a * e - b * b;
  double s = denom > eps ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
  double t = (b * s + f) / e;
  if (t < 0.0) {
    t = 0.0;
    s = std::clamp(-c / a, 0.0, 1.0);
  } else if (t > 1.0) {
    t = 1.0;
    s = std::clamp((b - c) / a, 0.0, 1.0);
  }
  return {s, t};
}

class Solver {
 public:
  Solver(SimState& state, const SimConfig& config)
      : state_(state),
        config_(config),
        n_(state.positions.size()),
        rest_(config.rest_spacing()),
        inv_mass_(n_, static_cast<double>(n_) / config.rope_mass),
        normal_push_(n_, 0.0),
        bend_compliance_(config.bending_stiffness > 0.0 ? std::pow(rest_, 3) / config.bending_stiffness : 0.0) {
    if (state_.pin) {
      for (auto k : state_.pin->held) inv_mass_[k] = 0.0;
    }
  }

  void substep(double h, double damping) {
    auto& x = state_.positions;
    auto& v = state_.velocities;
    prev_ = x;
    pred_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      v[i] *= damping;
      v[i].z() -= config_.gravity * h;
      pred_[i] = x[i] + h * v[i];
    }
    apply_pin();
    collect_pairs();
    std::fill(normal_push_.begin(), normal_push_.end(), 0.0);
    bend_lambda_.assign(n_ > 2 ? n_ - 2 : 0, Vec3::Zero());
    const double bend_alpha = bend_compliance_ / (h * h);
    for (std::size_t it = 0; it < config_.solver_iterations; ++it) {
      for (std::size_t i = 0; i + 1 < n_; ++i) project_distance(pred_[i], pred_[i + 1], inv_mass_[i], inv_mass_[i + 1], rest_);
      if (bend_compliance_ > 0.0) solve_bending(bend_alpha);
      solve_self_collision();
      solve_table();
      apply_pin();
    }
    apply_friction();
    for (std::size_t i = 0; i < n_; ++i) {
      v[i] = (pred_[i] - prev_[i]) / h;
      x[i] = pred_[i];
    }
  }

 private:
  void apply_pin() {
    if (!state_.pin) return;
    const Pin& pin = *state_.pin;
    for (std::size_t k = 0; k < pin.held.size(); ++k) {
      pred_[pin.held[k]] = pin.target.position + pin.target.frame * pin.offsets[k];
    }
  }

  void collect_pairs() {
    pairs_.clear();
    if (config_.self_collision == SelfCollisionMode::kNone) return;
    const double reach = 2.0 * config_.rope_radius + 0.25 * rest_;
    if (config_.self_collision == SelfCollisionMode::kNodePair) {
      for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 2; j < n_; ++j) {
          if ((pred_[i] - pred_[j]).squaredNorm() < reach * reach) pairs_.push_back({i, j});
        }
      }
      return;
    }
    const std::size_t segs = n_ - 1;
    boxes_lo_.resize(segs);
    boxes_hi_.resize(segs);
    for (std::size_t k = 0; k < segs; ++k) {
      boxes_lo_[k] = (pred_[k].cwiseMin(pred_[k + 1]).array() - reach).matrix();
      boxes_hi_[k] = (pred_[k].cwiseMax(pred_[k + 1]).array() + reach).matrix();
    }
    for (std::size_t i = 0; i < segs; ++i) {
      for (std::size_t j = i + 2; j < segs; ++j) {
        if ((boxes_lo_[i].array() <= boxes_hi_[j].array()).all() && (boxes_lo_[j].array() <= boxes_hi_[i].array()).all()) {
          pairs_.push_back({i, j});
        }
      }
    }
  }

  void solve_self_collision() {
    const double min_dist = 2.0 * config_.rope_radius;
    if (config_.self_collision == SelfCollisionMode::kNodePair) {
      for (const auto& [i, j] : pairs_) {
        const Vec3 d = pred_[i] - pred_[j];
        const double dist = d.norm();
        const double w = inv_mass_[i] + inv_mass_[j];
        if (dist >= min_dist || w <= 0.0) continue;
        const Vec3 n = dist > 1e-12 ? Vec3(d / dist) : Vec3::UnitZ();
        const Vec3 corr = (min_dist - dist) / w * n;
        pred_[i] += inv_mass_[i] * corr;
        pred_[j] -= inv_mass_[j] * corr;
      }
      return;
    }
    if (config_.self_collision != SelfCollisionMode::kCapsule) return;
    for (const auto& [i, j] : pairs_) {
      Vec3& a0 = pred_[i];
      Vec3& a1 = pred_[i + 1];
      Vec3& b0 = pred_[j];
      Vec3& b1 = pred_[j + 1];
      const auto [s, t] = closest_parameters(a0, a1, b0, b1);
      const Vec3 pa = (1.0 - s) * a0 + s * a1;
      const Vec3 pb = (1.0 - t) * b0 + t * b1;
      const Vec3 d = pa - pb;
      const double dist = d.norm();
      if (dist >= min_dist) continue;
      const Vec3 n = dist > 1e-12 ? Vec3(d / dist) : Vec3::UnitZ();
      const double wa0 = (1.0 - s) * inv_mass_[i];
      const double wa1 = s * inv_mass_[i + 1];
      const double wb0 = (1.0 - t) * inv_mass_[j];
      const double wb1 = t * inv_mass_[j + 1];
      const double denom = (1.0 - s) * wa0 + s * wa1 + (1.0 - t) * wb0 + t * wb1;
      if (denom <= 1e-12) continue;
      const double lambda = (min_dist - dist) / denom;
      a0 += lambda * wa0 * n;
      a1 += lambda * wa1 * n;
      b0 -= lambda * wb0 * n;
      b1 -= lambda * wb1 * n;
    }
  }

  // Linear constraint on the discrete curvature vector x[i] - 2 x[i+1] + x[i+2]
  // with compliance spacing^3 / EI, so the rope resists bending with a
  // physical force that table friction can balance.
  void solve_bending(double alpha) {
    for (std::size_t i = 0; i + 2 < n_; ++i) {
      const double w = inv_mass_[i] + 4.0 * inv_mass_[i + 1] + inv_mass_[i + 2];
      if (w <= 0.0) continue;
      const Vec3 c = pred_[i] - 2.0 * pred_[i + 1] + pred_[i + 2];
      const Vec3 dl = (-c - alpha * bend_lambda_[i]) / (w + alpha);
      bend_lambda_[i] += dl;
      pred_[i] += inv_mass_[i] * dl;
      pred_[i + 1] -= 2.0 * inv_mass_[i + 1] * dl;
      pred_[i + 2] += inv_mass_[i + 2] * dl;
    }
  }

  void solve_table() {
    const double floor = config_.rope_radius;
    for (std::size_t i = 0; i < n_; ++i) {
      if (inv_mass_[i] == 0.0 || pred_[i].z() >= floor) continue;
      normal_push_[i] += floor - pred_[i].z();
      pred_[i].z() = floor;
    }
  }

  // Coulomb friction against the table, scaled by the normal correction
  // accumulated over the substep.
  void apply_friction() {
    const double mu = config_.friction_coeff;
    for (std::size_t i = 0; i < n_; ++i) {
      if (inv_mass_[i] == 0.0 || normal_push_[i] <= 0.0) continue;
      Vec2 slide(pred_[i].x() - prev_[i].x(), pred_[i].y() - prev_[i].y());
      const double len = slide.norm();
      const double limit = mu * normal_push_[i];
      if (len <= limit) {
        pred_[i].x() = prev_[i].x();
        pred_[i].y() = prev_[i].y();
      } else {
        slide *= limit / len;
        pred_[i].x() -= slide.x();
        pred_[i].y() -= slide.y();
      }
    }
  }

  SimState& state_;
  const SimConfig& config_;
  std::size_t n_;
  double rest_;
  std::vector<double> inv_mass_;
  std::vector<double> normal_push_;
  double bend_compliance_;
  std::vector<Vec3> bend_lambda_;
  std::vector<Vec3> prev_;
  std::vector<Vec3> pred_;
  std::vector<SegmentPair> pairs_;
  std::vector<Vec3> boxes_lo_;
  std::vector<Vec3> boxes_hi_;
};

}  // namespace

void step_in_place(SimState& state, const SimConfig& config) {
  const double h = config.dt / static_cast<double>(config.substeps);
  const double damping = std::pow(config.damping, 1.0 / static_cast<double>(config.substeps));
  Solver solver(state, config);
  for (std::size_t k = 0; k < config.substeps; ++k) solver.substep(h, damping);
  state.time += config.dt;
  const double limit = 10.0 * config.rope_length;
  for (const auto& p : state.positions) {
    if (!p.allFinite() || p.norm() > limit) {
      throw Error(ErrorCode::kNumericalBlowup, "node left the workspace at t=" + std::to_string(state.time));
    }
  }
}

SimState step(SimState state, const SimConfig& config) {
  step_in_place(state, config);
  return state;
}

namespace {

void attach(SimState& state, const Pose& grip, const SimConfig& config) {
  const std::size_t n = state.positions.size();
  std::size_t best = 0;
  double best_d = (state.positions[0] - grip.position).squaredNorm();
  for (std::size_t i = 1; i < n; ++i) {
    const double d = (state.positions[i] - grip.position).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  const double tolerance = 2.0 * config.rest_spacing();
  if (std::sqrt(best_d) > tolerance) {
    throw Error(ErrorCode::kGraspMiss, "no rope node within " + std::to_string(tolerance) + " m of the grasp");
  }
  Pin pin;
  pin.node = best;
  pin.target = grip;
  const Vec3 base = grip.frame.transpose() * (state.positions[best] - grip.position);
  pin.held.push_back(best);
  pin.offsets.push_back(base);
  // Tail-side neighbors sit along +y, head-side ones along -y. A side that
  // runs off the rope end is skipped.
  const double spacing = config.rest_spacing();
  const std::size_t want = config.grip_neighbors + 1;
  for (std::size_t k = 1; k < n && pin.held.size() < want; ++k) {
    if (best + k < n) {
      pin.held.push_back(best + k);
      pin.offsets.push_back(base + Vec3(0.0, spacing * static_cast<double>(k), 0.0));
    }
    if (k <= best && pin.held.size() < want) {
      pin.held.push_back(best - k);
      pin.offsets.push_back(base - Vec3(0.0, spacing * static_cast<double>(k), 0.0));
    }
  }
  state.pin = pin;
}

}  // namespace

SimState settle(SimState state, const SimConfig& config, double duration, const FrameSink& sink) {
  state.pin.reset();
  const auto steps = static_cast<std::size_t>(std::ceil(duration / config.dt - 1e-9));
  for (std::size_t k = 0; k < steps; ++k) {
    step_in_place(state, config);
    if (sink) sink(state);
  }
  return state;
}

SimState execute_plan(SimState state, const MovePlan& plan, const SimConfig& config, const FrameSink& sink) {
  plan.validate();
  config.validate();
  SimConfig cfg = config;
  if (plan.primitive == Primitive::kX && config.capsule_during_x) cfg.self_collision = SelfCollisionMode::kCapsule;

  for (std::size_t w = 0; w < plan.waypoints.size(); ++w) {
    const Waypoint& wp = plan.waypoints[w];
    if (w > 0 && state.pin) {
      const Pose& from = plan.waypoints[w - 1].pose;
      const Pose& to = wp.pose;
      const Eigen::Quaterniond q0 = from.quaternion();
      const Eigen::Quaterniond q1 = to.quaternion();
      const double distance = (to.position - from.position).norm();
      const double angle = q0.angularDistance(q1);
      const double duration = std::max(distance / cfg.gripper_speed, angle / cfg.gripper_yaw_rate);
      const auto steps = static_cast<std::size_t>(std::ceil(duration / cfg.dt - 1e-9));
      for (std::size_t k = 1; k <= steps; ++k) {
        const double a = static_cast<double>(k) / static_cast<double>(steps);
        state.pin->target.position = (1.0 - a) * from.position + a * to.position;
        state.pin->target.frame = q0.slerp(a, q1).toRotationMatrix();
        step_in_place(state, cfg);
        if (sink) sink(state);
      }
      state.pin->target = to;
    }
    if (wp.gripper == GripperAction::kClose) {
      attach(state, wp.pose, cfg);
    } else if (wp.gripper == GripperAction::kOpen) {
      state = settle(std::move(state), cfg, cfg.settle_time, sink);
    }
  }
  return state;
}

Curve true_curve(const SimState& state, std::size_t M, double rope_length) {
  if (M < 2) throw Error(ErrorCode::kInsufficientControlPoints, "need at least 2 control points");
  const auto& x = state.positions;
  if (M == x.size()) return Curve(x, rope_length);
  std::vector<double> cum(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) cum[i] = cum[i - 1] + (x[i] - x[i - 1]).norm();
  const double total = cum.back();
  std::vector<Vec3> pts(M);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < M; ++k) {
    if (k == 0) {
      pts[k] = x.front();
      continue;
    }
    if (k == M - 1) {
      pts[k] = x.back();
      continue;
    }
    const double target = total * static_cast<double>(k) / static_cast<double>(M - 1);
    while (seg + 2 < x.size() && cum[seg + 1] < target) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double t = len > 0.0 ? (target - cum[seg]) / len : 0.0;
    pts[k] = (1.0 - t) * x[seg] + t * x[seg + 1];
  }
  return Curve(std::move(pts), rope_length);
}

double rope_length_of(const SimState& state) {
  double total = 0.0;
  for (std::size_t i = 1; i < state.positions.size(); ++i) total += (state.positions[i] - state.positions[i - 1]).norm();
  return total;
}

double kinetic_energy(const SimState& state, double total_mass) {
  const double m = total_mass / static_cast<double>(state.velocities.size());
  double e = 0.0;
  for (const auto& v : state.velocities) e += 0.5 * m * v.squaredNorm();
  return e;
}

double min_nonadjacent_distance(const SimState& state) {
  double best = std::numeric_limits<double>::infinity();
  const auto& x = state.positions;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 2; j < x.size(); ++j) best = std::min(best, (x[i] - x[j]).norm());
  }
  return best;
}

nlohmann::json frame_to_json(const SimState& state) {
  nlohmann::json pos = nlohmann::json::array();
  for (const auto& p : state.positions) pos.push_back({p.x(), p.y(), p.z()});
  nlohmann::json pin = nullptr;
  if (state.pin) {
    pin = to_json(state.pin->target);
    pin["node"] = state.pin->node;
    pin["held"] = state.pin->held;
  }
  return {{"t", state.time}, {"positions", std::move(pos)}, {"pin", std::move(pin)}};
}

void TrajectoryWriter::operator()(const SimState& state) {
  if (count_++ % stride_ == 0) out_ << frame_to_json(state).dump() << '\n';
}

std::vector<std::vector<Vec3>> read_trajectory(std::istream& in) {
  std::vector<std::vector<Vec3>> frames;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      std::vector<Vec3> pts;
      for (const auto& p : j.at("positions")) pts.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
      frames.push_back(std::move(pts));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, e.what());
    }
  }
  return frames;
}

}  // namespace dloknot
