#include "dloknot/curve.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dloknot/error.hpp"

namespace dloknot {

namespace {

constexpr double kSnapTolerance = 1e-9;
constexpr double kDegenerateSegment = 1e-12;

void check_parameter(double s) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw Error(ErrorCode::kOutOfRange, "curvilinear length " + std::to_string(s) + " not in [0, 1]");
  }
}

void check_count(std::size_t M) {
  if (M < 2) {
    throw Error(ErrorCode::kInsufficientControlPoints, "need at least 2 control points, got " + std::to_string(M));
  }
}

}  // namespace

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kInsufficientControlPoints: return "InsufficientControlPoints";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kInvalidLength: return "InvalidLength";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDegenerateSegment: return "DegenerateSegment";
    case ErrorCode::kDegenerateCrossing: return "DegenerateCrossing";
    case ErrorCode::kAmbiguousTopology: return "AmbiguousTopology";
    case ErrorCode::kNoCrossingFound: return "NoCrossingFound";
    case ErrorCode::kDegenerateTangent: return "DegenerateTangent";
    case ErrorCode::kNegativeHeight: return "NegativeHeight";
    case ErrorCode::kPreconditionFailed: return "PreconditionFailed";
    case ErrorCode::kInvalidArc: return "InvalidArc";
    case ErrorCode::kInvalidPlan: return "InvalidPlan";
    case ErrorCode::kNumericalBlowup: return "NumericalBlowup";
    case ErrorCode::kGraspMiss: return "GraspMiss";
    case ErrorCode::kGateFailed: return "GateFailed";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

GeodesicMode parse_geodesic_mode(const std::string& name) {
  if (name == "arc" || name == "arc-length") return GeodesicMode::kArcLength;
  if (name == "literal") return GeodesicMode::kLiteral;
  throw Error(ErrorCode::kConfigError, "unknown geodesic mode '" + name + "'");
}

std::string to_string(GeodesicMode mode) {
  return mode == GeodesicMode::kArcLength ? "arc" : "literal";
}

Curve::Curve(std::vector<Vec3> control_points, double length)
    : points_(std::move(control_points)), length_(length) {
  check_count(points_.size());
  for (const auto& p : points_) {
    if (!p.allFinite()) throw Error(ErrorCode::kNonFinite, "control point has a non-finite coordinate");
  }
  if (!(std::isfinite(length_) && length_ > 0.0)) {
    throw Error(ErrorCode::kInvalidLength, "rest length must be positive, got " + std::to_string(length_));
  }
  cumulative_.resize(points_.size());
  cumulative_[0] = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] + (points_[i] - points_[i - 1]).norm();
  }
}

Curve Curve::strict(std::vector<Vec3> control_points, double length, double tolerance) {
  Curve c(std::move(control_points), length);
  if (!c.length_consistent(tolerance)) {
    std::ostringstream msg;
    msg << "polyline length " << c.polyline_length() << " deviates from rest length " << length << " by "
        << 100.0 * c.length_error() << "% (tolerance " << 100.0 * tolerance << "%)";
    throw Error(ErrorCode::kLengthMismatch, msg.str());
  }
  return c;
}

Curve Curve::from_polyline(std::vector<Vec3> control_points) {
  check_count(control_points.size());
  double total = 0.0;
  for (std::size_t i = 1; i < control_points.size(); ++i) total += (control_points[i] - control_points[i - 1]).norm();
  return Curve(std::move(control_points), total);
}

double Curve::length_error() const { return std::abs(polyline_length() - length_) / length_; }

SegmentLocation locate(std::size_t M, double s) {
  check_count(M);
  check_parameter(s);
  const double f = s * static_cast<double>(M - 1);
  const double nearest = std::round(f);
  if (std::abs(f - nearest) <= kSnapTolerance) {
    const auto k = static_cast<std::size_t>(nearest);
    if (k == M - 1) return {M - 2, 1.0};
    return {k, 0.0};
  }
  const auto seg = std::min(static_cast<std::size_t>(std::floor(f)), M - 2);
  return {seg, f - static_cast<double>(seg)};
}

double node_parameter(std::size_t k, std::size_t M) {
  check_count(M);
  if (k >= M) throw Error(ErrorCode::kOutOfRange, "control point index out of range");
  return static_cast<double>(k) / static_cast<double>(M - 1);
}

Vec3 evaluate(const Curve& curve, double s) {
  const auto [seg, t] = locate(curve.size(), s);
  return (1.0 - t) * curve[seg] + t * curve[seg + 1];
}

std::size_t index_of(double s, std::size_t M) {
  check_count(M);
  check_parameter(s);
  return static_cast<std::size_t>(std::round(s * static_cast<double>(M - 1)));
}

bool same_segment(double s_i, double s_j, std::size_t M) {
  const auto a = index_of(s_i, M);
  const auto b = index_of(s_j, M);
  return (a > b ? a - b : b - a) <= 1;
}

namespace {

double arc_position(const Curve& curve, double s) {
  const auto [seg, t] = locate(curve.size(), s);
  return curve.arc_length_to(seg) + t * curve.segment_length(seg);
}

double literal_geodesic(const Curve& curve, double s_i, double s_j) {
  const std::size_t M = curve.size();
  const Vec3 p_i = evaluate(curve, s_i);
  const Vec3 p_j = evaluate(curve, s_j);
  if (same_segment(s_i, s_j, M)) return std::abs(s_j - s_i) * (p_j - p_i).norm();
  const std::size_t end_i = nearest_control_point(curve, s_i);
  const std::size_t end_j = nearest_control_point(curve, s_j);
  double sum = std::abs(1.0 - s_j) * (p_i - curve[end_i]).norm() + std::abs(s_j) * (p_j - curve[end_j]).norm();
  for (std::size_t m = end_i + 1; m <= end_j; ++m) sum += (curve[m] - curve[m - 1]).norm();
  return sum;
}

}  // namespace

double geodesic(const Curve& curve, double s_i, double s_j, GeodesicMode mode) {
  check_parameter(s_i);
  check_parameter(s_j);
  if (s_i == s_j) return 0.0;
  if (mode == GeodesicMode::kLiteral) return literal_geodesic(curve, s_i, s_j);
  return std::abs(arc_position(curve, s_j) - arc_position(curve, s_i));
}

std::size_t nearest_control_point(const Curve& curve, double s) {
  const Vec3 p = evaluate(curve, s);
  std::size_t best = 0;
  double best_d = (curve[0] - p).squaredNorm();
  for (std::size_t m = 1; m < curve.size(); ++m) {
    const double d = (curve[m] - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = m;
    }
  }
  return best;
}

namespace {

Vec3 segment_direction(const Curve& curve, std::size_t seg) {
  const Vec3 d = curve[seg + 1] - curve[seg];
  const double n = d.norm();
  if (n < kDegenerateSegment) {
    throw Error(ErrorCode::kDegenerateSegment, "segment " + std::to_string(seg) + " has zero length");
  }
  return d / n;
}

}  // namespace

Vec3 tangent(const Curve& curve, double s) {
  const std::size_t M = curve.size();
  const auto [seg, t] = locate(M, s);
  if (t == 1.0) return segment_direction(curve, M - 2);
  if (t == 0.0 && seg > 0) {
    const Vec3 mean = segment_direction(curve, seg - 1) + segment_direction(curve, seg);
    const double n = mean.norm();
    if (n < kDegenerateSegment) {
      throw Error(ErrorCode::kDegenerateSegment, "curve folds back on itself at control point " + std::to_string(seg));
    }
    return mean / n;
  }
  return segment_direction(curve, seg);
}

nlohmann::json to_json(const Curve& curve) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : curve.points()) pts.push_back({p.x(), p.y(), p.z()});
  return {{"length", curve.length()}, {"points", std::move(pts)}};
}

Curve curve_from_json(const nlohmann::json& j) {
  try {
    std::vector<Vec3> pts;
    for (const auto& row : j.at("points")) {
      if (row.size() != 3) throw Error(ErrorCode::kParseError, "curve point must have 3 coordinates");
      pts.emplace_back(row[0].get<double>(), row[1].get<double>(), row[2].get<double>());
    }
    if (j.contains("length")) return Curve(std::move(pts), j.at("length").get<double>());
    return Curve::from_polyline(std::move(pts));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

std::string to_csv(const Curve& curve) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& p : curve.points()) out << p.x() << ',' << p.y() << ',' << p.z() << '\n';
  return out.str();
}

Curve curve_from_csv(std::istream& in, double length) {
  std::vector<Vec3> pts;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x = 0, y = 0, z = 0;
    if (!(row >> x >> y >> z)) throw Error(ErrorCode::kParseError, "bad CSV row '" + line + "'");
    pts.emplace_back(x, y, z);
  }
  if (length > 0.0) return Curve(std::move(pts), length);
  return Curve::from_polyline(std::move(pts));
}

}  // namespace dloknot
