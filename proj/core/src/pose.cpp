#include "dloknot/pose.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "dloknot/error.hpp"

namespace dloknot {

Eigen::Quaterniond Pose::quaternion() const {
  Eigen::Quaterniond q(frame);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

double Pose::yaw() const { return std::atan2(frame(1, 1), frame(0, 1)); }

double frame_error(const Mat3& frame) {
  const double ortho = (frame.transpose() * frame - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(frame.determinant() - 1.0));
}

Pose grasp_pose(const Curve& curve, double s) {
  const Vec3 t = tangent(curve, s);
  const Vec3 horizontal(t.x(), t.y(), 0.0);
  if (horizontal.norm() < 1e-6) {
    throw Error(ErrorCode::kDegenerateTangent, "tangent at s=" + std::to_string(s) + " is vertical");
  }
  Pose pose;
  pose.position = evaluate(curve, s);
  const Vec3 y = horizontal.normalized();
  const Vec3 z = Vec3::UnitZ();
  pose.frame.col(0) = y.cross(z);
  pose.frame.col(1) = y;
  pose.frame.col(2) = z;
  return pose;
}

Pose lifted(const Pose& pose, double h) {
  if (h < 0.0) throw Error(ErrorCode::kNegativeHeight, "lift height " + std::to_string(h) + " < 0");
  Pose out = pose;
  out.position.z() += h;
  return out;
}

Pose rotated_about_z(const Pose& pose, double angle) {
  Pose out = pose;
  out.frame = Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix() * pose.frame;
  return out;
}

nlohmann::json to_json(const Pose& pose) {
  const auto q = pose.quaternion();
  return {{"position", {pose.position.x(), pose.position.y(), pose.position.z()}},
          {"quaternion", {q.w(), q.x(), q.y(), q.z()}}};
}

Pose pose_from_json(const nlohmann::json& j) {
  try {
    Pose p;
    const auto& pos = j.at("position");
    const auto& q = j.at("quaternion");
    p.position = {pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()};
    Eigen::Quaterniond quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
    p.frame = quat.normalized().toRotationMatrix();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

}  // namespace dloknot
