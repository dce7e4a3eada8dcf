#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dloknot/move_planner.hpp"
#include "dloknot/rope_sim.hpp"
#include "dloknot/topology.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace dloknot;

inline double chain_length(const std::vector<Vec3>& p) {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) len += (p[i + 1] - p[i]).norm();
  return len;
}

// Arc-length resampling of a polyline to n nodes.
inline std::vector<Vec3> resample(const std::vector<Vec3>& pts, std::size_t n) {
  std::vector<double> cum{0.0};
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) cum.push_back(cum.back() + (pts[i + 1] - pts[i]).norm());
  std::vector<Vec3> out;
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = cum.back() * static_cast<double>(k) / static_cast<double>(n - 1);
    while (seg + 2 < cum.size() && cum[seg + 1] < target) ++seg;
    const double t = (target - cum[seg]) / (cum[seg + 1] - cum[seg]);
    out.push_back(pts[seg] + t * (pts[seg + 1] - pts[seg]));
  }
  return out;
}

// Open trefoil-pattern rope of the configured length hanging just above the table.
inline SimState knotted_fixture(const SimConfig& config) {
  const double scale = 0.0325 * config.rope_length / 0.88;
  auto pts = oracle::trefoil_rope(2000, 1.0, 0.15);
  for (auto& p : pts) p *= scale;
  pts = resample(pts, config.node_count);
  const double len = chain_length(pts);
  double lowest = pts[0].z();
  for (const auto& p : pts) lowest = std::min(lowest, p.z());
  SimState s;
  for (auto p : pts) {
    p *= config.rope_length / len;
    p.z() += config.rope_radius - lowest * config.rope_length / len;
    s.positions.push_back(p);
  }
  s.velocities.assign(s.positions.size(), Vec3::Zero());
  return s;
}

// Planner-style grasp frame at simulation node k.
inline Pose grasp_at(const SimState& s, std::size_t k, const SimConfig& c) {
  Pose g = grasp_pose(Curve(s.positions, c.rope_length), node_parameter(k, c.node_count));
  g.position = s.positions[k];
  return g;
}

// Grasp with the given frame, carry through `mid`, turn by `yaw` and release at `place`.
inline MovePlan pick_and_place(const Pose& g, const Vec3& mid, const Vec3& place, double yaw) {
  MovePlan plan;
  Pose a = g;
  a.position = mid;
  Pose b = rotated_about_z(a, yaw);
  b.position = place;
  plan.waypoints = {{g, GripperAction::kClose, "grasp"}, {a, GripperAction::kNone, "carry"}, {b, GripperAction::kOpen, "place"}};
  return plan;
}

struct SoakReport {
  double worst_length_error = 0.0;  // relative
  double worst_penetration = 0.0;   // meters below the resting height
};

// Random pick-and-place motions until `duration` seconds of simulated time.
inline SoakReport soak(const SimConfig& c, std::uint64_t seed, double duration) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.15, 0.15), h(0.0, 0.2), yaw(-2.0, 2.0);
  std::uniform_int_distribution<std::size_t> node(0, c.node_count - 1);
  auto s = init_symmetric_arc(c, 2.5);
  SoakReport report;
  auto check = [&](const SimState& f) {
    report.worst_length_error =
        std::max(report.worst_length_error, std::abs(rope_length_of(f) - c.rope_length) / c.rope_length);
    for (const auto& p : f.positions) report.worst_penetration = std::max(report.worst_penetration, c.rope_radius - p.z());
  };
  while (s.time < duration) {
    const std::size_t k = node(rng);
    const Pose g = grasp_at(s, k, c);
    const Vec3 mid = g.position + Vec3(u(rng), u(rng), h(rng));
    Vec3 end = mid + Vec3(u(rng), u(rng), 0.0);
    end.z() = c.rope_radius;
    s = execute_plan(s, pick_and_place(g, mid, end, yaw(rng)), c, check);
  }
  return report;
}

struct KnotHoldReport {
  int checks = 0;
  int knotted = 0;
  double closest = 1.0;  // minimum non-adjacent node distance seen
};

// Lets the knotted fixture rest for `duration` seconds, testing the knot
// every 0.25 s of simulated time.
inline KnotHoldReport hold_knot(const SimConfig& c, double duration) {
  KnotHoldReport report;
  const auto steps_per_check = static_cast<long>(std::round(0.25 / c.dt));
  settle(knotted_fixture(c), c, duration, [&](const SimState& f) {
    report.closest = std::min(report.closest, min_nonadjacent_distance(f));
    if (static_cast<long>(std::round(f.time / c.dt)) % steps_per_check == 0) {
      ++report.checks;
      report.knotted += is_overhand(project_and_find_crossings(true_curve(f, c.node_count, c.rope_length))) ? 1 : 0;
    }
  });
  return report;
}

// Inserts a small self-crossing curl (one loop of a prolate cycloid) into
// segment k, rising in z so the curl is resolvable.
inline std::vector<Vec3> with_kink(const std::vector<Vec3>& pts, std::size_t k, double size) {
  const Vec3 a = pts[k], b = pts[k + 1];
  Vec2 d = (b - a).head<2>();
  const double len = d.norm();
  d /= len;
  const Vec2 n(-d.y(), d.x());
  const double r = size / (2.0 * std::numbers::pi);
  std::vector<Vec3> out(pts.begin(), pts.begin() + static_cast<long>(k) + 1);
  const Vec3 start = a + 0.3 * (b - a);
  out.push_back(start);
  for (int j = 1; j < 24; ++j) {
    const double th = -std::numbers::pi + 2.0 * std::numbers::pi * j / 24.0;
    const Vec2 xy = start.head<2>() + (r * (th + std::numbers::pi) - 2.5 * r * std::sin(th)) * d -
                    2.5 * r * (1.0 + std::cos(th)) * n;
    out.emplace_back(xy.x(), xy.y(), start.z() + 0.004 * (th + std::numbers::pi));
  }
  const Vec3 end = start + size * Vec3(d.x(), d.y(), 0.0);
  out.emplace_back(end.x(), end.y(), start.z() + 0.004 * 2.0 * std::numbers::pi);
  out.insert(out.end(), pts.begin() + static_cast<long>(k) + 1, pts.end());
  return out;
}

// Two trefoil patterns joined end to end.
inline std::vector<Vec3> granny_rope() {
  auto a = oracle::trefoil_rope(120, 0.05, 0.15);
  auto b = oracle::trefoil_rope(120, 0.05, 0.15);
  const Vec3 shift = a.back() - b.front() + Vec3(0.4, 0.0, 0.0);
  std::vector<Vec3> pts(a.begin(), a.end());
  for (auto p : b) pts.push_back(p + shift);
  return pts;
}

}  // namespace fixture
