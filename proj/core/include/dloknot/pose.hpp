#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <nlohmann/json_fwd.hpp>

#include "dloknot/curve.hpp"

namespace dloknot {

using Mat3 = Eigen::Matrix3d;

/// Gripper pose. Frame columns are the x, y, z axes in world coordinates.
struct Pose {
  Vec3 position = Vec3::Zero();
  Mat3 frame = Mat3::Identity();

  Vec3 x_axis() const { return frame.col(0); }
  Vec3 y_axis() const { return frame.col(1); }
  Vec3 z_axis() const { return frame.col(2); }

  /// Hamilton unit quaternion with w >= 0.
  Eigen::Quaterniond quaternion() const;
  /// Heading of the y axis in the table plane, atan2(y_y, y_x).
  double yaw() const;
};

/// Orthonormality error max|F^T F - I| and |det F - 1|, whichever is larger.
double frame_error(const Mat3& frame);

/// Semi-planar grasp: position S(s), z = [0, 0, 1], y = horizontal part of
/// the head-to-tail tangent, x = y cross z. Throws DegenerateTangent when the
/// tangent is within 1e-6 of vertical.
Pose grasp_pose(const Curve& curve, double s);

/// Translated by (0, 0, h). Throws NegativeHeight for h < 0.
Pose lifted(const Pose& pose, double h);

/// Frame premultiplied by a rotation of `angle` about world z.
Pose rotated_about_z(const Pose& pose, double angle);

nlohmann::json to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);

}  // namespace dloknot
