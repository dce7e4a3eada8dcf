#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dloknot/curve.hpp"

namespace dloknot {

/// Default minimum vertical separation for a resolvable crossing (meters).
inline constexpr double kDefaultMinGap = 0.002;

enum class Strand { kOver, kUnder };

/// One transverse self-intersection of the table-plane projection.
struct Crossing {
  Vec2 position_2d;
  double s_over = 0.0;
  double s_under = 0.0;
  double height_gap = 0.0;
  /// +1 when the projected (over x under) tangent cross product is positive.
  int sign = 0;
};

struct Passage {
  double s = 0.0;
  std::size_t crossing = 0;
  Strand strand = Strand::kOver;
};

/// Place where the head-to-tail closure chord (routed above everything)
/// crosses the rope. The rope is always the under strand there.
struct ClosurePassage {
  double s = 0.0;
  /// Position along the closure chord, 0 at the tail and 1 at the head.
  double chord_t = 0.0;
};

struct CrossingDiagram {
  /// Sorted by first passage along the curve.
  std::vector<Crossing> crossings;
  /// 2k passages in curve order.
  std::vector<Passage> passages;
  /// Sorted by chord_t. Empty for diagrams not built from a curve.
  std::vector<ClosurePassage> closure;

  std::size_t size() const { return crossings.size(); }
  bool empty() const { return crossings.empty(); }

  /// Rebuilds `passages` from `crossings` and renumbers crossings by first
  /// passage. Used by the detector and by hand-built fixture diagrams.
  void normalize();
};

/// Finds every transverse intersection between non-adjacent segments of the
/// xy projection. Over/under follows the interpolated z at the crossing;
/// crossings separated by less than `min_gap` are dropped. Throws
/// DegenerateCrossing on collinear overlap of non-adjacent segments.
CrossingDiagram project_and_find_crossings(const Curve& curve, double min_gap = kDefaultMinGap);

enum class Tip { kHead, kTail };

inline double tip_parameter(Tip tip) { return tip == Tip::kHead ? 0.0 : 1.0; }
inline std::size_t tip_node(Tip tip, std::size_t M) { return tip == Tip::kHead ? 0 : M - 1; }
std::string to_string(Tip tip);

struct CrossingLandmarks {
  double s_cb = 0.0;  // crossing bottom (under strand)
  double s_ct = 0.0;  // crossing top (over strand)
  Tip undertip = Tip::kHead;
  Tip overtip = Tip::kHead;
};

/// Landmarks of a single-crossing diagram, or of `designated` when given.
/// Geodesic ties resolve to the head.
CrossingLandmarks crossing_landmarks(const CrossingDiagram& diagram, const Curve& curve,
                                     std::optional<std::size_t> designated = std::nullopt,
                                     GeodesicMode mode = GeodesicMode::kArcLength);

// Planar convex hull helpers used by the centroid grasp heuristic.
std::vector<Vec2> convex_hull(const std::vector<Vec2>& points);

struct HullCentroid {
  Vec2 centroid;
  /// True when the hull had no area and the bounding-segment midpoint was used.
  bool degenerate = false;
};

HullCentroid hull_centroid(const Curve& curve);

/// Tip whose projection lies nearest the hull centroid (head on ties).
Tip tip_nearest_centroid(const Curve& curve);

/// Among control points at most `r` indices from the given tip's node,
/// the one nearest (2-D) the hull area centroid. Ties go to the node closer
/// to the tip.
std::size_t centroid_grasp_point(const Curve& curve, Tip undertip, std::size_t r);

struct GaussToken {
  std::size_t crossing = 0;  // 1-based id, numbered by first passage
  Strand strand = Strand::kOver;

  bool operator==(const GaussToken&) const = default;
};

struct GaussCode {
  std::vector<GaussToken> tokens;

  /// Compact text form, e.g. "O1 U2 O3 U1 O2 U3".
  std::string str() const;
  static GaussCode parse(const std::string& text);
  /// Each id appears exactly twice with opposite tags.
  bool well_formed() const;
};

GaussCode gauss_code(const CrossingDiagram& diagram);

/// Closes the open rope with an arc routed over everything and tests Fox
/// 3-colorability of the closed diagram. True for the overhand (trefoil),
/// false for any diagram of the unknot.
bool is_overhand(const CrossingDiagram& diagram);

/// Dimension of the Z/3 solution space of the coloring equations of the
/// closed diagram. Constant colorings always solve, so the value is >= 1;
/// the diagram is tricolorable iff it is >= 2.
std::size_t coloring_space_dimension(const CrossingDiagram& diagram);

nlohmann::json to_json(const CrossingDiagram& diagram);
CrossingDiagram diagram_from_json(const nlohmann::json& j);

}  // namespace dloknot
