#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dloknot/error.hpp"
#include "dloknot/pose.hpp"
#include "oracles.hpp"

using namespace dloknot;

namespace {

Curve line_along(const Vec3& dir, std::size_t M = 5) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < M; ++i) pts.push_back(dir * static_cast<double>(i) / static_cast<double>(M - 1));
  return Curve(pts, dir.norm());
}

}  // namespace

TEST(GraspPose, StraightX) {
  const auto p = grasp_pose(line_along({1, 0, 0}), 0.5);
  EXPECT_TRUE(p.position.isApprox(Vec3(0.5, 0, 0)));
  EXPECT_EQ(p.y_axis(), Vec3(1, 0, 0));
  EXPECT_EQ(p.z_axis(), Vec3(0, 0, 1));
  EXPECT_EQ(p.x_axis(), Vec3(0, -1, 0));
  EXPECT_NEAR((p.x_axis().cross(p.y_axis()) - p.z_axis()).norm(), 0.0, 1e-15);
}

TEST(GraspPose, StraightY) {
  const auto p = grasp_pose(line_along({0, 1, 0}), 0.5);
  EXPECT_EQ(p.y_axis(), Vec3(0, 1, 0));
  EXPECT_EQ(p.x_axis(), Vec3(1, 0, 0));
  EXPECT_EQ(p.z_axis(), Vec3(0, 0, 1));
}

TEST(GraspPose, VerticalTangent) {
  try {
    grasp_pose(line_along({0, 0, 1}), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateTangent);
  }
}

TEST(GraspPose, RandomFramesAreRotations) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto c = Curve::from_polyline(oracle::random_polyline(rng, 30));
    const auto p = grasp_pose(c, u(rng));
    EXPECT_LE(frame_error(p.frame), 1e-9);
    EXPECT_EQ(p.y_axis().dot(Vec3::UnitZ()), 0.0);
    EXPECT_EQ(p.z_axis(), Vec3(0, 0, 1));
  }
}

TEST(Lifted, Examples) {
  const auto p = grasp_pose(line_along({1, 0, 0}), 0.5);
  const auto same = lifted(p, 0.0);
  EXPECT_EQ(same.position, p.position);
  EXPECT_EQ(same.frame, p.frame);
  EXPECT_TRUE(lifted(p, 0.2).position.isApprox(Vec3(0.5, 0, 0.2)));
  try {
    lifted(p, -0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeHeight);
  }
}

TEST(Lifted, RiHeightOnUniformCurve) {
  const auto c = line_along({0.88, 0, 0}, 30);
  const double h = 0.4 * geodesic(c, 0.1, 0.9);
  EXPECT_NEAR(h, 0.2816, 1e-12);
}

TEST(RotatedAboutZ, Examples) {
  const auto p = grasp_pose(line_along({1, 0, 0}), 0.5);
  EXPECT_EQ(rotated_about_z(p, 0.0).frame, p.frame);
  EXPECT_NEAR((rotated_about_z(p, std::numbers::pi / 2).y_axis() - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((rotated_about_z(p, 2 * std::numbers::pi).frame - p.frame).norm(), 0.0, 1e-12);
  EXPECT_EQ(rotated_about_z(p, 1.0).position, p.position);
}

TEST(RotatedAboutZ, Composes) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> ang(-10.0, 10.0);
  const auto c = Curve::from_polyline(oracle::random_polyline(rng, 30));
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = grasp_pose(c, trial / 200.0);
    const double a = ang(rng), b = ang(rng);
    const auto lhs = rotated_about_z(rotated_about_z(p, a), b);
    const auto rhs = rotated_about_z(p, a + b);
    EXPECT_LE((lhs.frame - rhs.frame).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(frame_error(lhs.frame), 1e-9);
  }
}

TEST(PoseJson, QuaternionRoundTrip) {
  std::mt19937_64 rng(33);
  const auto c = Curve::from_polyline(oracle::random_polyline(rng, 30));
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = rotated_about_z(grasp_pose(c, trial / 100.0), 0.1 * trial);
    const auto j = to_json(p);
    const auto q = p.quaternion();
    EXPECT_GE(q.w(), 0.0);
    EXPECT_NEAR(q.norm(), 1.0, 1e-9);
    const auto back = pose_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_LE((back.frame - p.frame).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((back.position - p.position).norm(), 1e-12);
  }
}

TEST(PoseJson, Yaw) {
  const auto p = grasp_pose(line_along({0, 1, 0}), 0.5);
  EXPECT_NEAR(p.yaw(), std::numbers::pi / 2, 1e-15);
}
