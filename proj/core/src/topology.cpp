#include "dloknot/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dloknot/error.hpp"

namespace dloknot {

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

Vec2 xy(const Vec3& p) { return {p.x(), p.y()}; }

struct SegmentHit {
  double t = 0.0;  // along the first segment
  double u = 0.0;  // along the second segment
};

// Transverse intersection of [a0, a1] and [b0, b1]. Each segment owns the
// half-open parameter range [0, 1) unless `*_closed` extends it to [0, 1].
std::optional<SegmentHit> intersect(const Vec2& a0, const Vec2& a1, bool a_closed, const Vec2& b0, const Vec2& b1,
                                    bool b_closed, bool throw_on_overlap) {
  const Vec2 r = a1 - a0;
  const Vec2 s = b1 - b0;
  const double rn = r.norm();
  const double sn = s.norm();
  if (rn < 1e-15 || sn < 1e-15) return std::nullopt;
  const Vec2 qp = b0 - a0;
  const double denom = cross2(r, s);
  if (std::abs(denom) <= 1e-12 * rn * sn) {
    const bool collinear = std::abs(cross2(qp, r)) <= 1e-12 * rn * (qp.norm() + rn);
    if (collinear && throw_on_overlap) {
      const double t0 = qp.dot(r) / (rn * rn);
      const double t1 = (b1 - a0).dot(r) / (rn * rn);
      const double lo = std::max(0.0, std::min(t0, t1));
      const double hi = std::min(1.0, std::max(t0, t1));
      if (hi - lo > 1e-12) {
        throw Error(ErrorCode::kDegenerateCrossing, "non-adjacent segments overlap collinearly in projection");
      }
    }
    return std::nullopt;
  }
  const double t = cross2(qp, s) / denom;
  const double u = cross2(qp, r) / denom;
  const bool t_ok = t >= 0.0 && (a_closed ? t <= 1.0 : t < 1.0);
  const bool u_ok = u >= 0.0 && (b_closed ? u <= 1.0 : u < 1.0);
  if (!t_ok || !u_ok) return std::nullopt;
  return SegmentHit{t, u};
}

struct Box {
  double x0, x1, y0, y1;
  std::size_t seg;
};

}  // namespace

void CrossingDiagram::normalize() {
  std::sort(crossings.begin(), crossings.end(), [](const Crossing& a, const Crossing& b) {
    return std::min(a.s_over, a.s_under) < std::min(b.s_over, b.s_under);
  });
  passages.clear();
  passages.reserve(2 * crossings.size());
  for (std::size_t k = 0; k < crossings.size(); ++k) {
    passages.push_back({crossings[k].s_over, k, Strand::kOver});
    passages.push_back({crossings[k].s_under, k, Strand::kUnder});
  }
  std::sort(passages.begin(), passages.end(), [](const Passage& a, const Passage& b) { return a.s < b.s; });
  std::sort(closure.begin(), closure.end(),
            [](const ClosurePassage& a, const ClosurePassage& b) { return a.chord_t < b.chord_t; });
}

CrossingDiagram project_and_find_crossings(const Curve& curve, double min_gap) {
  const std::size_t M = curve.size();
  const std::size_t n_seg = M - 1;
  const double scale = static_cast<double>(M - 1);

  // Sweep over x extents; only boxes overlapping in x and y reach the exact test.
  std::vector<Box> boxes(n_seg);
  for (std::size_t i = 0; i < n_seg; ++i) {
    const Vec3& a = curve[i];
    const Vec3& b = curve[i + 1];
    boxes[i] = {std::min(a.x(), b.x()), std::max(a.x(), b.x()), std::min(a.y(), b.y()), std::max(a.y(), b.y()), i};
  }
  std::vector<Box> sorted = boxes;
  std::sort(sorted.begin(), sorted.end(), [](const Box& a, const Box& b) {
    return a.x0 < b.x0 || (a.x0 == b.x0 && a.seg < b.seg);
  });

  CrossingDiagram diagram;
  std::vector<const Box*> active;
  for (const Box& cur : sorted) {
    std::erase_if(active, [&](const Box* b) { return b->x1 < cur.x0; });
    for (const Box* other : active) {
      if (other->y1 < cur.y0 || cur.y1 < other->y0) continue;
      const std::size_t i = std::min(cur.seg, other->seg);
      const std::size_t j = std::max(cur.seg, other->seg);
      if (j - i < 2) continue;
      const auto hit = intersect(xy(curve[i]), xy(curve[i + 1]), i == n_seg - 1, xy(curve[j]), xy(curve[j + 1]),
                                 j == n_seg - 1, true);
      if (!hit) continue;
      const double z_i = (1.0 - hit->t) * curve[i].z() + hit->t * curve[i + 1].z();
      const double z_j = (1.0 - hit->u) * curve[j].z() + hit->u * curve[j + 1].z();
      const double gap = std::abs(z_i - z_j);
      if (gap < min_gap) continue;
      const double s_i = (static_cast<double>(i) + hit->t) / scale;
      const double s_j = (static_cast<double>(j) + hit->u) / scale;
      const bool i_over = z_i > z_j;
      const Vec2 d_i = xy(curve[i + 1]) - xy(curve[i]);
      const Vec2 d_j = xy(curve[j + 1]) - xy(curve[j]);
      const double orient = i_over ? cross2(d_i, d_j) : cross2(d_j, d_i);
      Crossing c;
      c.position_2d = xy(curve[i]) + hit->t * d_i;
      c.s_over = i_over ? s_i : s_j;
      c.s_under = i_over ? s_j : s_i;
      c.height_gap = gap;
      c.sign = orient > 0.0 ? 1 : -1;
      diagram.crossings.push_back(c);
    }
    active.push_back(&cur);
  }

  // Closure chord from the tail back to the head.
  const Vec2 tail = xy(curve.tail());
  const Vec2 head = xy(curve.head());
  for (std::size_t k = 0; k < n_seg; ++k) {
    const auto hit = intersect(tail, head, true, xy(curve[k]), xy(curve[k + 1]), k == n_seg - 1, false);
    if (!hit || hit->t <= 1e-12 || hit->t >= 1.0 - 1e-12) continue;
    diagram.closure.push_back({(static_cast<double>(k) + hit->u) / scale, hit->t});
  }

  diagram.normalize();
  return diagram;
}

std::string to_string(Tip tip) { return tip == Tip::kHead ? "head" : "tail"; }

CrossingLandmarks crossing_landmarks(const CrossingDiagram& diagram, const Curve& curve,
                                     std::optional<std::size_t> designated, GeodesicMode mode) {
  if (diagram.empty()) throw Error(ErrorCode::kNoCrossingFound, "diagram has no crossings");
  std::size_t index = 0;
  if (designated) {
    if (*designated >= diagram.size()) {
      throw Error(ErrorCode::kOutOfRange, "designated crossing " + std::to_string(*designated) + " does not exist");
    }
    index = *designated;
  } else if (diagram.size() != 1) {
    throw Error(ErrorCode::kAmbiguousTopology,
                "expected exactly one crossing, found " + std::to_string(diagram.size()));
  }
  const Crossing& c = diagram.crossings[index];
  auto nearer_tip = [&](double s) {
    return geodesic(curve, s, 0.0, mode) <= geodesic(curve, s, 1.0, mode) ? Tip::kHead : Tip::kTail;
  };
  return {c.s_under, c.s_over, nearer_tip(c.s_under), nearer_tip(c.s_over)};
}

std::vector<Vec2> convex_hull(const std::vector<Vec2>& points) {
  std::vector<Vec2> pts = points;
  std::sort(pts.begin(), pts.end(),
            [](const Vec2& a, const Vec2& b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  auto turn = [](const Vec2& o, const Vec2& a, const Vec2& b) { return cross2(a - o, b - o); };
  for (const auto& p : pts) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && turn(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

HullCentroid hull_centroid(const Curve& curve) {
  std::vector<Vec2> pts;
  pts.reserve(curve.size());
  for (const auto& p : curve.points()) pts.push_back(xy(p));
  const auto hull = convex_hull(pts);

  double area2 = 0.0;
  Vec2 acc = Vec2::Zero();
  for (std::size_t i = 0; i < hull.size() && hull.size() >= 3; ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    const double w = cross2(a, b);
    area2 += w;
    acc += w * (a + b);
  }
  double extent = 0.0;
  for (const auto& h : hull) extent = std::max(extent, (h - hull.front()).norm());
  if (hull.size() >= 3 && std::abs(area2) > 1e-12 * std::max(extent * extent, 1e-300)) {
    return {acc / (3.0 * area2), false};
  }
  // Collinear: midpoint of the two mutually farthest points.
  Vec2 a = pts.front(), b = pts.front();
  double best = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = (pts[i] - pts[j]).squaredNorm();
      if (d > best) {
        best = d;
        a = pts[i];
        b = pts[j];
      }
    }
  }
  return {0.5 * (a + b), true};
}

Tip tip_nearest_centroid(const Curve& curve) {
  const Vec2 c = hull_centroid(curve).centroid;
  return (xy(curve.head()) - c).norm() <= (xy(curve.tail()) - c).norm() ? Tip::kHead : Tip::kTail;
}

std::size_t centroid_grasp_point(const Curve& curve, Tip undertip, std::size_t r) {
  const std::size_t M = curve.size();
  const Vec2 c = hull_centroid(curve).centroid;
  const std::size_t window = std::min(r, M - 1);
  std::size_t best = tip_node(undertip, M);
  double best_d = (xy(curve[best]) - c).squaredNorm();
  for (std::size_t step = 1; step <= window; ++step) {
    const std::size_t k = undertip == Tip::kHead ? step : M - 1 - step;
    const double d = (xy(curve[k]) - c).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

std::string GaussCode::str() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out << ' ';
    out << (tokens[i].strand == Strand::kOver ? 'O' : 'U') << tokens[i].crossing;
  }
  return out.str();
}

GaussCode GaussCode::parse(const std::string& text) {
  GaussCode code;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    if (tok.size() < 2 || (tok[0] != 'O' && tok[0] != 'U')) {
      throw Error(ErrorCode::kParseError, "bad Gauss token '" + tok + "'");
    }
    std::size_t used = 0;
    const unsigned long id = std::stoul(tok.substr(1), &used);
    if (used != tok.size() - 1 || id == 0) throw Error(ErrorCode::kParseError, "bad Gauss token '" + tok + "'");
    code.tokens.push_back({static_cast<std::size_t>(id), tok[0] == 'O' ? Strand::kOver : Strand::kUnder});
  }
  return code;
}

bool GaussCode::well_formed() const {
  std::size_t max_id = 0;
  for (const auto& t : tokens) max_id = std::max(max_id, t.crossing);
  std::vector<int> overs(max_id + 1, 0), unders(max_id + 1, 0);
  for (const auto& t : tokens) {
    if (t.crossing == 0) return false;
    (t.strand == Strand::kOver ? overs : unders)[t.crossing]++;
  }
  for (std::size_t id = 1; id <= max_id; ++id) {
    if (overs[id] != unders[id] || (overs[id] != 0 && overs[id] != 1)) return false;
  }
  return true;
}

GaussCode gauss_code(const CrossingDiagram& diagram) {
  GaussCode code;
  code.tokens.reserve(diagram.passages.size());
  for (const auto& p : diagram.passages) code.tokens.push_back({p.crossing + 1, p.strand});
  return code;
}

namespace {

// Rank of a dense matrix over Z/3.
std::size_t rank_mod3(std::vector<std::vector<int>> m, std::size_t cols) {
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < m.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < m.size() && m[pivot][col] == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[pivot], m[rank]);
    // In Z/3 every nonzero element is its own inverse.
    const int inv = m[rank][col];
    for (auto& v : m[rank]) v = (v * inv) % 3;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][col] == 0) continue;
      const int f = m[r][col];
      for (std::size_t c = 0; c < cols; ++c) m[r][c] = ((m[r][c] - f * m[rank][c]) % 3 + 3) % 3;
    }
    ++rank;
  }
  return rank;
}

}  // namespace

std::size_t coloring_space_dimension(const CrossingDiagram& diagram) {
  struct Event {
    bool over;
    std::size_t id;
  };
  const std::size_t n = diagram.size();

  // Rope passages and closure under-passages merged by s, then the closure's
  // own over-passages from the tail back to the head.
  std::vector<std::pair<double, Event>> rope;
  for (const auto& p : diagram.passages) rope.push_back({p.s, {p.strand == Strand::kOver, p.crossing}});
  for (std::size_t k = 0; k < diagram.closure.size(); ++k) rope.push_back({diagram.closure[k].s, {false, n + k}});
  std::stable_sort(rope.begin(), rope.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Event> cycle;
  for (const auto& [s, e] : rope) cycle.push_back(e);
  for (std::size_t k = 0; k < diagram.closure.size(); ++k) cycle.push_back({true, n + k});

  const std::size_t total = n + diagram.closure.size();
  if (total == 0) return 1;

  // Arc a starts right after the a-th under passage in cycle order.
  std::vector<std::size_t> arc_at(cycle.size());
  std::vector<std::size_t> under_pos(total), over_pos(total);
  std::size_t first_under = cycle.size();
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    (cycle[i].over ? over_pos : under_pos)[cycle[i].id] = i;
    if (!cycle[i].over && first_under == cycle.size()) first_under = i;
  }
  std::size_t arcs = 0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (!cycle[i].over) ++arcs;
  }
  // Events before the first under belong to the last arc (cyclic wrap).
  std::size_t current = arcs - 1;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    if (!cycle[i].over && i != first_under) current = (current + 1) % arcs;
    if (!cycle[i].over && i == first_under) current = 0;
    arc_at[i] = current;
  }

  std::vector<std::vector<int>> rows(total, std::vector<int>(arcs, 0));
  for (std::size_t id = 0; id < total; ++id) {
    const std::size_t out = arc_at[under_pos[id]];
    const std::size_t in = (out + arcs - 1) % arcs;
    const std::size_t over = arc_at[over_pos[id]];
    auto& row = rows[id];
    row[over] = (row[over] + 2) % 3;
    row[in] = (row[in] + 2) % 3;  // -1 == 2 (mod 3)
    row[out] = (row[out] + 2) % 3;
  }
  return arcs - rank_mod3(std::move(rows), arcs);
}

bool is_overhand(const CrossingDiagram& diagram) { return coloring_space_dimension(diagram) >= 2; }

nlohmann::json to_json(const CrossingDiagram& diagram) {
  nlohmann::json crossings = nlohmann::json::array();
  for (const auto& c : diagram.crossings) {
    crossings.push_back({{"position", {c.position_2d.x(), c.position_2d.y()}},
                         {"s_over", c.s_over},
                         {"s_under", c.s_under},
                         {"height_gap", c.height_gap},
                         {"sign", c.sign}});
  }
  nlohmann::json closure = nlohmann::json::array();
  for (const auto& c : diagram.closure) closure.push_back({{"s", c.s}, {"chord_t", c.chord_t}});
  return {{"crossings", std::move(crossings)}, {"closure", std::move(closure)}, {"gauss", gauss_code(diagram).str()}};
}

CrossingDiagram diagram_from_json(const nlohmann::json& j) {
  try {
    CrossingDiagram d;
    for (const auto& c : j.at("crossings")) {
      Crossing x;
      x.position_2d = {c.at("position")[0].get<double>(), c.at("position")[1].get<double>()};
      x.s_over = c.at("s_over").get<double>();
      x.s_under = c.at("s_under").get<double>();
      x.height_gap = c.at("height_gap").get<double>();
      x.sign = c.at("sign").get<int>();
      d.crossings.push_back(x);
    }
    if (j.contains("closure")) {
      for (const auto& c : j.at("closure")) d.closure.push_back({c.at("s").get<double>(), c.at("chord_t").get<double>()});
    }
    d.normalize();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

}  // namespace dloknot
