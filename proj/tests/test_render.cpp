#include <numbers>
#include <regex>

#include <gtest/gtest.h>

#include "dloknot/move_planner.hpp"
#include "dloknot/render.hpp"
#include "dloknot/rope_sim.hpp"

using namespace dloknot;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

}  // namespace

TEST(Render, EmptyPlanDrawsRopeOnly) {
  SimConfig c;
  const auto s = init_symmetric_arc(c, std::numbers::pi);
  const auto svg = render_scene(s.positions);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_EQ(count(svg, "class=\"waypoint\""), 0u);
}

TEST(Render, RiPlanHasSixWaypointGlyphs) {
  SimConfig c;
  PlannerParams p;
  const auto s = init_symmetric_arc(c, std::numbers::pi);
  const auto plan = plan_RI(true_curve(s, p.M, c.rope_length), p);
  ASSERT_EQ(plan.waypoints.size(), 6u);
  const auto svg = render_scene(s.positions, {plan});
  EXPECT_EQ(count(svg, "<circle class=\"waypoint\""), 6u);
  for (const auto& w : plan.waypoints) EXPECT_NE(svg.find(w.label), std::string::npos);
}

TEST(Render, Deterministic) {
  SimConfig c;
  PlannerParams p;
  auto s = init_symmetric_arc(c, 2.5);
  const auto plan = plan_RI(true_curve(s, p.M, c.rope_length), p);
  std::vector<std::vector<Vec3>> frames;
  s = execute_plan(s, plan, c, [&](const SimState& f) { frames.push_back(f.positions); });
  EXPECT_EQ(render_scene(frames, {plan}), render_scene(frames, {plan}));
  EXPECT_EQ(render_scene(s.positions, {plan}), render_scene(s.positions, {plan}));
}
