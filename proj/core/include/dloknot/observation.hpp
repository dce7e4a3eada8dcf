#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dloknot/curve.hpp"

namespace dloknot {

/// Imperfections of the shape tracker feeding the planner. All-zero is a
/// perfect tracker.
struct ObservationConfig {
  double noise_sigma = 0.0;         // isotropic Gaussian, meters
  double depth_quantization = 0.0;  // z step, meters; 0 disables
  double occlusion_radius = 0.0;    // 2-D radius around crossings, meters
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

/// Under-strand control points of `curve` within `radius` (2-D) of one of
/// its crossings. The tips are never included.
std::vector<std::size_t> occluded_points(const Curve& curve, double radius);

/// Tracker emulation: Gaussian noise, z quantization, then chord infill of
/// occluded under-strand points from their nearest unoccluded neighbors.
/// Preserves M, the rest length and the tip indices.
Curve observe(const Curve& curve, const ObservationConfig& config);

nlohmann::json to_json(const ObservationConfig& config);
ObservationConfig observation_config_from_json(const nlohmann::json& j, ObservationConfig base = {});

}  // namespace dloknot
