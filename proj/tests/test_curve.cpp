#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dloknot/curve.hpp"
#include "dloknot/error.hpp"
#include "oracles.hpp"

using namespace dloknot;

namespace {

Curve five_point_line() {
  std::vector<Vec3> pts;
  for (int i = 0; i < 5; ++i) pts.emplace_back(0.25 * i, 0.0, 0.0);
  return Curve(pts, 1.0);
}

Curve random_curve(std::mt19937_64& rng, std::size_t M) { return Curve::from_polyline(oracle::random_polyline(rng, M)); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kOutOfRange;
}

}  // namespace

TEST(Evaluate, Endpoints) {
  const auto c = five_point_line();
  EXPECT_TRUE(evaluate(c, 0.0).isApprox(Vec3(0, 0, 0)));
  EXPECT_TRUE(evaluate(c, 1.0).isApprox(Vec3(1, 0, 0)));
}

TEST(Evaluate, MidFirstSegment) {
  const auto c = five_point_line();
  const Vec3 expected = oracle::lerp_point(c.points(), 0.125);
  EXPECT_NEAR((evaluate(c, 0.125) - Vec3(0.125, 0, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((evaluate(c, 0.125) - expected).norm(), 0.0, 1e-15);
}

TEST(Evaluate, RejectsOutOfRange) {
  const auto c = five_point_line();
  EXPECT_EQ(code_of([&] { evaluate(c, -0.1); }), ErrorCode::kOutOfRange);
  EXPECT_EQ(code_of([&] { evaluate(c, 1.1); }), ErrorCode::kOutOfRange);
}

TEST(Evaluate, NodeParametersHitControlPoints) {
  std::mt19937_64 rng(3);
  for (std::size_t M : {2u, 7u, 30u, 61u}) {
    const auto c = random_curve(rng, M);
    for (std::size_t k = 0; k < M; ++k) EXPECT_EQ(evaluate(c, node_parameter(k, M)), c[k]);
  }
}

TEST(Evaluate, LipschitzContinuity) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_curve(rng, 5 + trial);
    double max_seg = 0.0;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) max_seg = std::max(max_seg, c.segment_length(i));
    for (int k = 0; k < 50; ++k) {
      const double s = u(rng), d = 0.01 * u(rng) * (1.0 - s);
      const double bound = max_seg * static_cast<double>(c.size() - 1) * d;
      EXPECT_LE((evaluate(c, s) - evaluate(c, s + d)).norm(), bound + 1e-12);
    }
  }
}

TEST(IndexOf, Examples) {
  EXPECT_EQ(index_of(0.0, 30), 0u);
  EXPECT_EQ(index_of(1.0, 30), 29u);
  EXPECT_EQ(index_of(0.5, 30), 15u);
}

TEST(IndexOf, Monotone) {
  for (std::size_t M : {2u, 3u, 30u, 100u}) {
    std::size_t prev = 0;
    for (int k = 0; k <= 10000; ++k) {
      const auto idx = index_of(k / 10000.0, M);
      EXPECT_GE(idx, prev);
      prev = idx;
    }
  }
}

TEST(SameSegment, Examples) {
  EXPECT_TRUE(same_segment(0.3, 0.3, 30));
  EXPECT_FALSE(same_segment(0.0, 1.0, 30));
  EXPECT_TRUE(same_segment(0.50, 0.52, 30));
}

TEST(Geodesic, ZeroSeparationBothModes) {
  std::mt19937_64 rng(5);
  const auto c = random_curve(rng, 12);
  for (double s : {0.0, 0.3, 0.71, 1.0}) {
    EXPECT_EQ(geodesic(c, s, s, GeodesicMode::kArcLength), 0.0);
    EXPECT_EQ(geodesic(c, s, s, GeodesicMode::kLiteral), 0.0);
  }
}

TEST(Geodesic, LineExamples) {
  const auto c = five_point_line();
  EXPECT_NEAR(geodesic(c, 0.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(oracle::shortest_path(c.points(), 0.0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(geodesic(c, 0.2, 0.7), 0.5, 1e-15);
  EXPECT_NEAR(oracle::shortest_path(c.points(), 0.2, 0.7), 0.5, 1e-15);
}

TEST(Geodesic, MatchesShortestPathOracle) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = random_curve(rng, 5 + trial % 56);
    for (int k = 0; k < 20; ++k) {
      const double a = u(rng), b = u(rng);
      const double expected = oracle::shortest_path(c.points(), a, b);
      EXPECT_NEAR(geodesic(c, a, b), expected, 1e-9 * std::max(1.0, expected));
    }
  }
}

TEST(Geodesic, SymmetryAndTriangle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_curve(rng, 30);
    const double a = u(rng), b = u(rng), d = u(rng);
    EXPECT_EQ(geodesic(c, a, b), geodesic(c, b, a));
    EXPECT_LE(geodesic(c, a, d), geodesic(c, a, b) + geodesic(c, b, d) + 1e-12);
  }
}

TEST(Geodesic, FullSpanIsPolylineLength) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_curve(rng, 10 + trial);
    EXPECT_DOUBLE_EQ(geodesic(c, 0.0, 1.0), c.polyline_length());
  }
}

TEST(Geodesic, LiteralSameSegmentBranch) {
  // |s_j - s_i| * |S(s_j) - S(s_i)| on a unit-length five point line.
  const auto c = five_point_line();
  EXPECT_NEAR(geodesic(c, 0.50, 0.52, GeodesicMode::kLiteral), 0.02 * 0.02, 1e-15);
}

TEST(NearestControlPoint, Examples) {
  const auto c = five_point_line();
  EXPECT_EQ(nearest_control_point(c, 0.0), 0u);
  EXPECT_EQ(nearest_control_point(c, 1.0), 4u);
  EXPECT_EQ(nearest_control_point(c, 0.2), 1u);
}

TEST(NearestControlPoint, MatchesExhaustiveScan) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = random_curve(rng, 20);
    const double s = u(rng);
    const Vec3 p = oracle::lerp_point(c.points(), s);
    std::size_t best = 0;
    for (std::size_t m = 1; m < c.size(); ++m) {
      if ((c[m] - p).norm() < (c[best] - p).norm()) best = m;
    }
    EXPECT_EQ(nearest_control_point(c, s), best);
  }
}

TEST(Tangent, StraightLines) {
  const auto c = five_point_line();
  EXPECT_TRUE(tangent(c, 0.37).isApprox(Vec3(1, 0, 0)));
  std::vector<Vec3> rev(c.points().rbegin(), c.points().rend());
  EXPECT_TRUE(tangent(Curve(rev, 1.0), 0.37).isApprox(Vec3(-1, 0, 0)));
}

TEST(Tangent, CornerIsMeanDirection) {
  const Curve c({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}, 2.0);
  const double h = std::sqrt(2.0) / 2.0;
  EXPECT_NEAR((tangent(c, 0.5) - Vec3(h, h, 0)).norm(), 0.0, 1e-15);
}

TEST(Tangent, UnitNorm) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_curve(rng, 15);
    EXPECT_NEAR(tangent(c, u(rng)).norm(), 1.0, 1e-12);
    EXPECT_NEAR(tangent(c, node_parameter(trial % 15, 15)).norm(), 1.0, 1e-12);
  }
}

TEST(Tangent, DegenerateSegment) {
  const Curve c({{0, 0, 0}, {0, 0, 0}, {1, 0, 0}}, 1.0);
  EXPECT_EQ(code_of([&] { tangent(c, 0.25); }), ErrorCode::kDegenerateSegment);
}

TEST(CurveConstruction, Errors) {
  EXPECT_EQ(code_of([] { Curve({{0, 0, 0}}, 1.0); }), ErrorCode::kInsufficientControlPoints);
  EXPECT_EQ(code_of([] { Curve({{0, 0, 0}, {NAN, 0, 0}}, 1.0); }), ErrorCode::kNonFinite);
  EXPECT_EQ(code_of([] { Curve({{0, 0, 0}, {1, 0, 0}}, 0.0); }), ErrorCode::kInvalidLength);
  EXPECT_EQ(code_of([] { Curve::strict({{0, 0, 0}, {1, 0, 0}}, 2.0); }), ErrorCode::kLengthMismatch);
  EXPECT_NO_THROW(Curve::strict({{0, 0, 0}, {1, 0, 0}}, 1.02));
}

TEST(CurveSerialization, JsonRoundTrip) {
  std::mt19937_64 rng(11);
  const auto c = random_curve(rng, 30);
  const auto back = curve_from_json(nlohmann::json::parse(to_json(c).dump()));
  ASSERT_EQ(back.size(), c.size());
  EXPECT_NEAR(back.length(), c.length(), 1e-12);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR((back[i] - c[i]).norm(), 0.0, 1e-12);
}

TEST(CurveSerialization, CsvRoundTrip) {
  std::mt19937_64 rng(12);
  const auto c = random_curve(rng, 30);
  std::istringstream in(to_csv(c));
  const auto back = curve_from_csv(in);
  ASSERT_EQ(back.size(), c.size());
  EXPECT_NEAR(back.length(), c.length(), 1e-12);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR((back[i] - c[i]).norm(), 0.0, 1e-12);
}

TEST(CurveSerialization, MalformedInput) {
  std::istringstream in("0,0,0\n1,zero,0\n");
  EXPECT_EQ(code_of([&] { curve_from_csv(in); }), ErrorCode::kParseError);
  EXPECT_EQ(code_of([] { curve_from_json(nlohmann::json::parse(R"({"points": 3})")); }), ErrorCode::kParseError);
}
