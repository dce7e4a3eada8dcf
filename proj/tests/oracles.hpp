#pragma once

// Independent reference implementations used to freeze expected values.
// Nothing here calls into the library's geometry code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace oracle {

using P3 = Eigen::Vector3d;

inline P3 lerp_point(const std::vector<P3>& pts, double s) {
  const double f = s * static_cast<double>(pts.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(f));
  if (lo + 1 >= pts.size()) return pts.back();
  const double t = f - static_cast<double>(lo);
  return pts[lo] + t * (pts[lo + 1] - pts[lo]);
}

// Dijkstra over the polyline graph with the two query points spliced in as
// extra vertices on their segments.
inline double shortest_path(const std::vector<P3>& pts, double s_a, double s_b) {
  const std::size_t M = pts.size();
  struct Node {
    double key;  // fractional index, orders vertices along the rope
    P3 p;
  };
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < M; ++i) nodes.push_back({static_cast<double>(i), pts[i]});
  const double fa = s_a * static_cast<double>(M - 1), fb = s_b * static_cast<double>(M - 1);
  nodes.push_back({fa, lerp_point(pts, s_a)});
  nodes.push_back({fb, lerp_point(pts, s_b)});
  const std::size_t src = M, dst = M + 1;
  std::vector<std::size_t> order(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return nodes[a].key < nodes[b].key; });
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(nodes.size());
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const auto a = order[k], b = order[k + 1];
    const double w = (nodes[a].p - nodes[b].p).norm();
    adj[a].push_back({b, w});
    adj[b].push_back({a, w});
  }
  std::vector<double> dist(nodes.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[src] = 0.0;
  pq.push({0.0, src});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto [v, w] : adj[u]) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        pq.push({dist[v], v});
      }
    }
  }
  return dist[dst];
}

struct RawCrossing {
  double x, y;
  double s_over, s_under;
  bool over_is_first;
};

// All-pairs proper segment intersection of the xy projection, skipping
// adjacent segments. Random inputs make endpoint hits a measure-zero event.
inline std::vector<RawCrossing> brute_force_crossings(const std::vector<P3>& pts, double min_gap) {
  std::vector<RawCrossing> out;
  const std::size_t n = pts.size() - 1;
  const double scale = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      const double ax = pts[i].x(), ay = pts[i].y(), bx = pts[i + 1].x(), by = pts[i + 1].y();
      const double cx = pts[j].x(), cy = pts[j].y(), dx = pts[j + 1].x(), dy = pts[j + 1].y();
      const double den = (bx - ax) * (dy - cy) - (by - ay) * (dx - cx);
      if (den == 0.0) continue;
      const double t = ((cx - ax) * (dy - cy) - (cy - ay) * (dx - cx)) / den;
      const double u = ((cx - ax) * (by - ay) - (cy - ay) * (bx - ax)) / den;
      if (t < 0.0 || t >= 1.0 || u < 0.0 || u >= 1.0) continue;
      const double zi = pts[i].z() + t * (pts[i + 1].z() - pts[i].z());
      const double zj = pts[j].z() + u * (pts[j + 1].z() - pts[j].z());
      if (std::abs(zi - zj) < min_gap) continue;
      const double si = (static_cast<double>(i) + t) / scale, sj = (static_cast<double>(j) + u) / scale;
      const bool first_over = zi > zj;
      out.push_back({ax + t * (bx - ax), ay + t * (by - ay), first_over ? si : sj, first_over ? sj : si, first_over});
    }
  }
  std::sort(out.begin(), out.end(), [](const RawCrossing& a, const RawCrossing& b) {
    return std::min(a.s_over, a.s_under) < std::min(b.s_over, b.s_under);
  });
  return out;
}

// Fox 3-coloring by exhaustive enumeration on the closed diagram obtained by
// joining tail to head with a straight chord lying above everything.
inline bool tricolorable_by_enumeration(const std::vector<P3>& pts, double min_gap, std::size_t* arc_count = nullptr,
                                        std::size_t max_arcs = 14) {
  // Closed loop parameter: rope s in [0, 1], then the chord in [1, 2].
  struct Cross {
    double over_pos, under_pos;
  };
  std::vector<Cross> crosses;
  for (const auto& c : brute_force_crossings(pts, min_gap)) crosses.push_back({c.s_over, c.s_under});
  const std::size_t n = pts.size() - 1;
  const Eigen::Vector2d a = pts.back().head<2>(), b = pts.front().head<2>();
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::Vector2d c = pts[k].head<2>(), d = pts[k + 1].head<2>();
    const double den = (b.x() - a.x()) * (d.y() - c.y()) - (b.y() - a.y()) * (d.x() - c.x());
    if (den == 0.0) continue;
    const double t = ((c.x() - a.x()) * (d.y() - c.y()) - (c.y() - a.y()) * (d.x() - c.x())) / den;
    const double u = ((c.x() - a.x()) * (b.y() - a.y()) - (c.y() - a.y()) * (b.x() - a.x())) / den;
    if (t <= 1e-12 || t >= 1.0 - 1e-12 || u < 0.0 || u >= 1.0) continue;
    crosses.push_back({1.0 + t, (static_cast<double>(k) + u) / static_cast<double>(n)});
  }
  std::vector<double> cuts;
  for (const auto& c : crosses) cuts.push_back(c.under_pos);
  std::sort(cuts.begin(), cuts.end());
  const std::size_t arcs = std::max<std::size_t>(cuts.size(), 1);
  if (arc_count) *arc_count = arcs;
  if (arcs > max_arcs) return false;
  // Arc k runs from cuts[k-1] to cuts[k]; arc 0 wraps around the loop end.
  auto arc_of = [&](double pos) -> std::size_t {
    if (cuts.empty()) return 0;
    const auto it = std::upper_bound(cuts.begin(), cuts.end(), pos);
    const auto k = static_cast<std::size_t>(it - cuts.begin());
    return k == cuts.size() ? 0 : k;
  };
  auto arc_before = [&](double pos) {
    const auto k = static_cast<std::size_t>(std::lower_bound(cuts.begin(), cuts.end(), pos) - cuts.begin());
    return k == cuts.size() ? 0 : k;
  };
  auto arc_after = [&](double pos) {
    const auto k = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), pos) - cuts.begin());
    return k == cuts.size() ? 0 : k;
  };
  std::vector<int> color(arcs, 0);
  const auto total = static_cast<std::uint64_t>(std::pow(3.0, static_cast<double>(arcs)));
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (std::size_t k = 0; k < arcs; ++k) {
      color[k] = static_cast<int>(c % 3);
      c /= 3;
    }
    bool ok = true;
    for (const auto& x : crosses) {
      const int o = color[arc_of(x.over_pos)];
      const int u1 = color[arc_before(x.under_pos)], u2 = color[arc_after(x.under_pos)];
      if ((2 * o - u1 - u2) % 3 != 0) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (std::any_of(color.begin(), color.end(), [&](int v) { return v != color[0]; })) return true;
  }
  return false;
}

// Trefoil-pattern rope: the standard (sin t + 2 sin 2t, cos t - 2 cos 2t,
// -sin 3t) loop opened by a small gap and lifted to keep z positive.
inline std::vector<P3> trefoil_rope(std::size_t samples = 120, double scale = 0.05, double gap = 0.15) {
  std::vector<P3> pts;
  const double t0 = gap, t1 = 2.0 * std::numbers::pi - gap;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(samples - 1);
    pts.emplace_back(scale * (std::sin(t) + 2.0 * std::sin(2.0 * t)), scale * (std::cos(t) - 2.0 * std::cos(2.0 * t)),
                     scale * (1.5 - std::sin(3.0 * t)));
  }
  return pts;
}

// Figure-eight-pattern rope (4 crossings, not 3-colorable).
inline std::vector<P3> figure_eight_rope(std::size_t samples = 160, double scale = 0.05, double gap = 0.12) {
  std::vector<P3> pts;
  const double t0 = gap, t1 = 2.0 * std::numbers::pi - gap;
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = t0 + (t1 - t0) * static_cast<double>(k) / static_cast<double>(samples - 1);
    pts.emplace_back(scale * (2.0 + std::cos(2.0 * t)) * std::cos(3.0 * t),
                     scale * (2.0 + std::cos(2.0 * t)) * std::sin(3.0 * t), scale * (1.5 + std::sin(4.0 * t)));
  }
  return pts;
}

inline std::vector<P3> random_polyline(std::mt19937_64& rng, std::size_t M, double extent = 1.0) {
  std::uniform_real_distribution<double> u(-extent, extent), z(0.0, 0.2);
  std::vector<P3> pts(M);
  for (auto& p : pts) p = {u(rng), u(rng), z(rng)};
  return pts;
}

}  // namespace oracle
