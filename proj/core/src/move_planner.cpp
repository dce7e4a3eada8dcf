#include "dloknot/move_planner.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dloknot/error.hpp"

namespace dloknot {

std::string to_string(GripperAction action) {
  switch (action) {
    case GripperAction::kClose: return "close";
    case GripperAction::kOpen: return "open";
    case GripperAction::kNone: return "none";
  }
  return "none";
}

std::string to_string(Primitive primitive) {
  switch (primitive) {
    case Primitive::kRI: return "RI";
    case Primitive::kRII: return "RII";
    case Primitive::kX: return "X";
  }
  return "RI";
}

namespace {

GripperAction parse_action(const std::string& s) {
  if (s == "close") return GripperAction::kClose;
  if (s == "open") return GripperAction::kOpen;
  if (s == "none") return GripperAction::kNone;
  throw Error(ErrorCode::kParseError, "unknown gripper action '" + s + "'");
}

Primitive parse_primitive(const std::string& s) {
  if (s == "RI") return Primitive::kRI;
  if (s == "RII") return Primitive::kRII;
  if (s == "X") return Primitive::kX;
  throw Error(ErrorCode::kParseError, "unknown primitive '" + s + "'");
}

Pose at_xy(const Pose& pose, const Vec3& target, double z) {
  Pose out = pose;
  out.position = {target.x(), target.y(), z};
  return out;
}

}  // namespace

int expected_crossing_delta(Primitive primitive) { return primitive == Primitive::kRI ? 1 : 2; }

void MovePlan::validate() const {
  if (waypoints.size() < 3) throw Error(ErrorCode::kInvalidPlan, "a move needs at least 3 waypoints");
  if (waypoints.front().gripper != GripperAction::kClose) {
    throw Error(ErrorCode::kInvalidPlan, "first waypoint must close the gripper");
  }
  if (waypoints.back().gripper != GripperAction::kOpen) {
    throw Error(ErrorCode::kInvalidPlan, "last waypoint must open the gripper");
  }
}

void PlannerParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigError, what); };
  if (!(lambda > 0.0 && lambda < 0.5)) fail("lambda must lie in (0, 0.5)");
  if (!(gamma > 0.0)) fail("gamma must be positive");
  if (M < 2) fail("M must be at least 2");
  if (!(place_height >= 0.0)) fail("place_height must be non-negative");
  if (!(min_gap >= 0.0)) fail("min_gap must be non-negative");
}

MovePlan plan_RI(const Curve& curve, const PlannerParams& params) {
  params.validate();
  const auto diagram = project_and_find_crossings(curve, params.min_gap);
  if (!diagram.empty()) {
    throw Error(ErrorCode::kAmbiguousTopology,
                "RI expects a crossing-free rope, found " + std::to_string(diagram.size()) + " crossings");
  }
  const Pose grasp = grasp_pose(curve, 0.5);
  const Vec3 mid = 0.5 * (evaluate(curve, params.lambda) + evaluate(curve, 1.0 - params.lambda));
  const Vec2 offset(mid.x() - grasp.position.x(), mid.y() - grasp.position.y());
  // A straight rope has no pair of parallel lengths to twist between.
  if (offset.norm() < 0.02 * curve.length()) {
    throw Error(ErrorCode::kPreconditionFailed, "rope is not in a curved configuration");
  }
  const double h = params.gamma * geodesic(curve, params.lambda, 1.0 - params.lambda, params.geodesic_mode);
  const double z = grasp.position.z() + h;

  MovePlan plan;
  plan.primitive = Primitive::kRI;
  plan.expected_crossing_delta = expected_crossing_delta(plan.primitive);
  plan.lift_height = h;
  const Pose approach = at_xy(grasp, mid, z);
  // Turn against the rope's bend: the carried tip then swings across the
  // standing part instead of away from it. Mirrored ropes get mirrored plans.
  const Vec3 dir = grasp.frame.col(1);
  const double bend = dir.x() * offset.y() - dir.y() * offset.x();
  const double sense = bend >= 0.0 ? -1.0 : 1.0;
  const Pose twisted = rotated_about_z(approach, sense * std::numbers::pi / 2.0);
  plan.waypoints = {
      {grasp, GripperAction::kClose, "RI-grasp"},
      {lifted(grasp, h), GripperAction::kNone, "RI-lift"},
      {approach, GripperAction::kNone, "RI-approach"},
      {twisted, GripperAction::kNone, "RI-twist"},
      {at_xy(twisted, grasp.position, z), GripperAction::kNone, "RI-return"},
      {at_xy(twisted, grasp.position, params.place_height), GripperAction::kOpen, "RI-place"},
  };
  return plan;
}

MovePlan plan_RII(const Curve& curve, const CrossingDiagram& diagram, const PlannerParams& params) {
  params.validate();
  const auto marks = crossing_landmarks(diagram, curve, std::nullopt, params.geodesic_mode);
  const double h = params.gamma * geodesic(curve, marks.s_cb, marks.s_ct, params.geodesic_mode);
  const Pose grasp = grasp_pose(curve, 0.5);
  const double z = grasp.position.z() + h;
  const Vec3 tip = evaluate(curve, tip_parameter(marks.undertip));

  MovePlan plan;
  plan.primitive = Primitive::kRII;
  plan.expected_crossing_delta = expected_crossing_delta(plan.primitive);
  plan.lift_height = h;
  plan.waypoints = {
      {grasp, GripperAction::kClose, "RII-grasp"},
      {lifted(grasp, h), GripperAction::kNone, "RII-lift"},
      {at_xy(grasp, evaluate(curve, marks.s_cb), z), GripperAction::kNone, "RII-crossing"},
      {at_xy(grasp, tip, z), GripperAction::kNone, "RII-undertip"},
      {at_xy(grasp, tip, params.place_height), GripperAction::kOpen, "RII-place"},
  };
  return plan;
}

std::optional<std::size_t> loop_crossing(const CrossingDiagram& diagram) {
  std::optional<std::size_t> best;
  double best_span = 2.0;
  for (std::size_t k = 0; k < diagram.size(); ++k) {
    const auto& c = diagram.crossings[k];
    const double lo = std::min(c.s_over, c.s_under);
    const double hi = std::max(c.s_over, c.s_under);
    if (lo <= 0.5 && 0.5 <= hi && hi - lo < best_span) {
      best_span = hi - lo;
      best = k;
    }
  }
  return best;
}

MovePlan plan_X(const Curve& curve, const CrossingDiagram& diagram, const PlannerParams& params,
                std::optional<std::size_t> designated) {
  params.validate();
  if (diagram.empty()) throw Error(ErrorCode::kNoCrossingFound, "X needs a loop to pass the tip through");
  if (!designated) designated = loop_crossing(diagram);
  if (!designated) {
    if (diagram.size() != 1) {
      throw Error(ErrorCode::kAmbiguousTopology, "no crossing closes a loop around the rope middle");
    }
    designated = 0;
  }
  const auto marks = crossing_landmarks(diagram, curve, designated, params.geodesic_mode);

  // The tip to thread is picked from the overall shape, not from the
  // crossing structure: the loop sits over it after RII.
  const Tip undertip = tip_nearest_centroid(curve);
  const std::size_t node = centroid_grasp_point(curve, undertip, params.r);
  const Pose grasp = grasp_pose(curve, node_parameter(node, curve.size()));

  const double h = params.gamma * geodesic(curve, marks.s_cb, marks.s_ct, params.geodesic_mode);
  const Vec3 crossing = evaluate(curve, marks.s_ct);
  Vec3 target = crossing + (crossing - evaluate(curve, tip_parameter(marks.overtip)));
  target.z() = std::max(target.z(), params.place_height);
  const double z = grasp.position.z() + h;

  MovePlan plan;
  plan.primitive = Primitive::kX;
  plan.expected_crossing_delta = expected_crossing_delta(plan.primitive);
  plan.lift_height = h;
  plan.waypoints = {
      {grasp, GripperAction::kClose, "X-grasp"},
      {lifted(grasp, h), GripperAction::kNone, "X-lift"},
      {at_xy(grasp, target, z), GripperAction::kNone, "X-carry"},
      {at_xy(grasp, target, target.z()), GripperAction::kOpen, "X-place"},
  };
  return plan;
}

std::vector<MovePlan> plan_overhand(World& world, const PlannerParams& params, OverhandTrace* trace) {
  OverhandTrace local;
  OverhandTrace& t = trace ? *trace : local;
  t = OverhandTrace{};

  auto gate_failed = [&](MoveRecord& rec, const std::string& why) {
    rec.passed = false;
    rec.failure = "GateFailed:" + to_string(rec.primitive);
    t.moves.back() = rec;
    throw Error(ErrorCode::kGateFailed, to_string(rec.primitive) + ": " + why);
  };

  auto run = [&](Primitive primitive, const Curve& curve, const CrossingDiagram& before) {
    MoveRecord rec;
    rec.primitive = primitive;
    rec.attempted = true;
    rec.crossings_before = before.size();
    t.moves.push_back(rec);
    MovePlan plan;
    try {
      switch (primitive) {
        case Primitive::kRI: plan = plan_RI(curve, params); break;
        case Primitive::kRII: plan = plan_RII(curve, before, params); break;
        case Primitive::kX: plan = plan_X(curve, before, params); break;
      }
      t.plans.push_back(plan);
      world.execute(plan);
    } catch (const Error& e) {
      t.moves.back().failure = std::string(to_string(e.code()));
      throw;
    }
    const Curve after = world.observe();
    auto diagram = project_and_find_crossings(after, params.min_gap);
    rec.crossings_after = diagram.size();
    t.moves.back() = rec;
    if (primitive == Primitive::kX) {
      t.final_diagram = diagram;
      if (!is_overhand(diagram)) gate_failed(rec, "rope is not knotted after the X move");
    } else {
      const long delta = static_cast<long>(diagram.size()) - static_cast<long>(before.size());
      if (delta != plan.expected_crossing_delta) {
        gate_failed(rec, "crossing count changed by " + std::to_string(delta) + ", expected " +
                             std::to_string(plan.expected_crossing_delta));
      }
    }
    t.moves.back().passed = true;
    return std::make_pair(after, diagram);
  };

  const Curve start = world.observe();
  const auto start_diagram = project_and_find_crossings(start, params.min_gap);
  auto [c1, d1] = run(Primitive::kRI, start, start_diagram);
  auto [c2, d2] = run(Primitive::kRII, c1, d1);
  run(Primitive::kX, c2, d2);
  return t.plans;
}

nlohmann::json to_json(const MovePlan& plan) {
  nlohmann::json wps = nlohmann::json::array();
  for (const auto& w : plan.waypoints) {
    auto j = to_json(w.pose);
    j["gripper"] = to_string(w.gripper);
    j["label"] = w.label;
    wps.push_back(std::move(j));
  }
  return {{"primitive", to_string(plan.primitive)},
          {"expected_crossing_delta", plan.expected_crossing_delta},
          {"lift_height", plan.lift_height},
          {"waypoints", std::move(wps)}};
}

MovePlan plan_from_json(const nlohmann::json& j) {
  try {
    MovePlan plan;
    plan.primitive = parse_primitive(j.at("primitive").get<std::string>());
    plan.expected_crossing_delta = j.value("expected_crossing_delta", expected_crossing_delta(plan.primitive));
    plan.lift_height = j.value("lift_height", 0.0);
    for (const auto& w : j.at("waypoints")) {
      plan.waypoints.push_back(
          {pose_from_json(w), parse_action(w.at("gripper").get<std::string>()), w.value("label", std::string{})});
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

std::string format_plan_table(const MovePlan& plan) {
  std::ostringstream out;
  out << to_string(plan.primitive) << " (lift " << plan.lift_height << " m, expected crossings "
      << (plan.expected_crossing_delta > 0 ? "+" : "") << plan.expected_crossing_delta << ")\n";
  char line[160];
  std::snprintf(line, sizeof line, "%3s  %-14s %-6s %9s %9s %9s %8s\n", "#", "label", "grip", "x", "y", "z",
                "yaw_deg");
  out << line;
  for (std::size_t i = 0; i < plan.waypoints.size(); ++i) {
    const auto& w = plan.waypoints[i];
    std::snprintf(line, sizeof line, "%3zu  %-14s %-6s %9.4f %9.4f %9.4f %8.2f\n", i, w.label.c_str(),
                  to_string(w.gripper).c_str(), w.pose.position.x(), w.pose.position.y(), w.pose.position.z(),
                  w.pose.yaw() * 180.0 / std::numbers::pi);
    out << line;
  }
  return out.str();
}

}  // namespace dloknot
