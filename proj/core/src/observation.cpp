#include "dloknot/observation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "dloknot/error.hpp"
#include "dloknot/topology.hpp"

namespace dloknot {

void ObservationConfig::validate() const {
  if (!(noise_sigma >= 0.0) || !(depth_quantization >= 0.0) || !(occlusion_radius >= 0.0)) {
    throw Error(ErrorCode::kConfigError, "observation parameters must be non-negative");
  }
}

std::vector<std::size_t> occluded_points(const Curve& curve, double radius) {
  if (radius <= 0.0) return {};
  const std::size_t M = curve.size();
  const auto diagram = project_and_find_crossings(curve);
  std::set<std::size_t> hidden;
  auto near = [&](std::size_t k, const Vec2& c) {
    return (Vec2(curve[k].x(), curve[k].y()) - c).norm() <= radius;
  };
  for (const auto& c : diagram.crossings) {
    const auto seg = locate(M, c.s_under).segment;
    // Walk away from the under segment in both directions while inside the radius.
    for (std::size_t k = seg + 1; k-- > 0 && near(k, c.position_2d);) hidden.insert(k);
    for (std::size_t k = seg + 1; k < M && near(k, c.position_2d); ++k) hidden.insert(k);
  }
  hidden.erase(0);
  hidden.erase(M - 1);
  return {hidden.begin(), hidden.end()};
}

Curve observe(const Curve& curve, const ObservationConfig& config) {
  config.validate();
  const bool noisy = config.noise_sigma > 0.0;
  const bool quantized = config.depth_quantization > 0.0;
  const auto hidden = occluded_points(curve, config.occlusion_radius);
  if (!noisy && !quantized && hidden.empty()) return curve;

  std::vector<Vec3> pts = curve.points();
  if (noisy) {
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> noise(0.0, config.noise_sigma);
    for (auto& p : pts) {
      for (int axis = 0; axis < 3; ++axis) p[axis] += noise(rng);
    }
  }
  if (quantized) {
    for (auto& p : pts) p.z() = config.depth_quantization * std::round(p.z() / config.depth_quantization);
  }
  if (!hidden.empty()) {
    std::vector<bool> is_hidden(pts.size(), false);
    for (auto k : hidden) is_hidden[k] = true;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (!is_hidden[k]) continue;
      std::size_t lo = k, hi = k;
      while (is_hidden[lo]) --lo;  // tips are never hidden
      while (is_hidden[hi]) ++hi;
      const double t = static_cast<double>(k - lo) / static_cast<double>(hi - lo);
      pts[k] = (1.0 - t) * pts[lo] + t * pts[hi];
    }
  }
  return Curve(std::move(pts), curve.length());
}

nlohmann::json to_json(const ObservationConfig& config) {
  return {{"noise_sigma", config.noise_sigma},
          {"depth_quantization", config.depth_quantization},
          {"occlusion_radius", config.occlusion_radius},
          {"seed", config.seed}};
}

ObservationConfig observation_config_from_json(const nlohmann::json& j, ObservationConfig base) {
  try {
    base.noise_sigma = j.value("noise_sigma", base.noise_sigma);
    base.depth_quantization = j.value("depth_quantization", base.depth_quantization);
    base.occlusion_radius = j.value("occlusion_radius", base.occlusion_radius);
    base.seed = j.value("seed", base.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
  base.validate();
  return base;
}

}  // namespace dloknot
