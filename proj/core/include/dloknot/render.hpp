#pragma once

#include <string>
#include <vector>

#include "dloknot/curve.hpp"
#include "dloknot/move_planner.hpp"

namespace dloknot {

struct RenderOptions {
  double pixels_per_meter = 800.0;
  double margin = 0.05;  // meters around the content
  /// Every n-th trajectory frame drawn as a faint ghost.
  std::size_t ghost_stride = 60;
};

/// Top-down orthographic view of one rope configuration with its crossings
/// (over strand drawn unbroken, under strand gapped) and the waypoints of
/// every plan, each with its label and gripper x/y axes.
std::string render_scene(const std::vector<Vec3>& rope, const std::vector<MovePlan>& plans = {},
                         const RenderOptions& options = {});

/// Same, with earlier trajectory frames as ghosts under the last one.
std::string render_scene(const std::vector<std::vector<Vec3>>& trajectory, const std::vector<MovePlan>& plans = {},
                         const RenderOptions& options = {});

}  // namespace dloknot
