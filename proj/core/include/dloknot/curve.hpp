#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

namespace dloknot {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

enum class GeodesicMode {
  kArcLength,     // polyline arc length between the two query points
  kLiteral,       // the weighted two-branch formula taken verbatim
};

GeodesicMode parse_geodesic_mode(const std::string& name);
std::string to_string(GeodesicMode mode);

/// Piecewise-linear rope model. Control point 0 is the head, M-1 the tail.
///
/// The parameterization S(s) is uniform in control-point index: s maps to
/// the fractional index s * (M - 1). Values are immutable after construction.
class Curve {
 public:
  /// Throws InsufficientControlPoints, NonFinite or InvalidLength. The
  /// polyline/rest length agreement is not enforced here; see
  /// `length_consistent` and `Curve::strict`.
  Curve(std::vector<Vec3> control_points, double length);

  /// Same as the constructor but also throws LengthMismatch when the polyline
  /// arc length deviates from `length` by more than `tolerance` (relative).
  static Curve strict(std::vector<Vec3> control_points, double length, double tolerance = 0.05);

  /// Rest length taken from the polyline itself.
  static Curve from_polyline(std::vector<Vec3> control_points);

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  const Vec3& head() const { return points_.front(); }
  const Vec3& tail() const { return points_.back(); }

  double length() const { return length_; }
  double polyline_length() const { return cumulative_.back(); }
  /// Arc length from the head to control point i.
  double arc_length_to(std::size_t i) const { return cumulative_[i]; }
  double segment_length(std::size_t i) const { return cumulative_[i + 1] - cumulative_[i]; }

  /// |polyline_length - length| / length
  double length_error() const;
  bool length_consistent(double tolerance = 0.05) const { return length_error() <= tolerance; }

 private:
  std::vector<Vec3> points_;
  std::vector<double> cumulative_;
  double length_;
};

/// Position along a segment: S(s) = (1 - t) C[segment] + t C[segment + 1].
struct SegmentLocation {
  std::size_t segment;
  double t;
};

/// Fractional-index location of s. Fractional indices within 1e-9 of an
/// integer snap to that control point so node parameters k / (M - 1) land
/// exactly on C[k].
SegmentLocation locate(std::size_t M, double s);

/// Curvilinear length of control point k.
double node_parameter(std::size_t k, std::size_t M);

Vec3 evaluate(const Curve& curve, double s);

/// round(s * (M - 1)), ties away from zero.
std::size_t index_of(double s, std::size_t M);

bool same_segment(double s_i, double s_j, std::size_t M);

double geodesic(const Curve& curve, double s_i, double s_j,
                GeodesicMode mode = GeodesicMode::kArcLength);

/// argmin_m |S(s) - C_m|, ties to the smaller index.
std::size_t nearest_control_point(const Curve& curve, double s);

/// Unit tangent oriented head to tail. At an interior control point the
/// normalized mean of the adjacent segment directions is returned.
Vec3 tangent(const Curve& curve, double s);

// Serialization. JSON: {"length": L, "points": [[x, y, z], ...]}.
// CSV: one "x,y,z" row per control point; rest length = polyline length
// unless `length` is given.
nlohmann::json to_json(const Curve& curve);
Curve curve_from_json(const nlohmann::json& j);
std::string to_csv(const Curve& curve);
Curve curve_from_csv(std::istream& in, double length = 0.0);

}  // namespace dloknot
