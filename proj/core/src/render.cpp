#include "dloknot/render.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>

#include "dloknot/error.hpp"
#include "dloknot/topology.hpp"

namespace dloknot {

namespace {

// Fixed-precision formatting keeps the output byte-stable.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

struct View {
  double min_x, max_y, scale, margin;
  double x(double wx) const { return (wx - min_x + margin) * scale; }
  double y(double wy) const { return (max_y - wy + margin) * scale; }
};

const char* plan_color(Primitive p) {
  switch (p) {
    case Primitive::kRI: return "#1f77b4";
    case Primitive::kRII: return "#2ca02c";
    case Primitive::kX: return "#d62728";
  }
  return "#000";
}

void polyline(std::ostringstream& out, const View& v, const std::vector<Vec3>& pts, const char* style) {
  out << "<polyline fill=\"none\" " << style << " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out << (i ? " " : "") << num(v.x(pts[i].x())) << ',' << num(v.y(pts[i].y()));
  }
  out << "\"/>\n";
}

std::string render(const std::vector<std::vector<Vec3>>& frames, const std::vector<MovePlan>& plans,
                   const RenderOptions& o) {
  if (frames.empty() || frames.back().size() < 2) throw Error(ErrorCode::kInsufficientControlPoints, "nothing to draw");
  const auto& rope = frames.back();

  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x, min_y = min_x, max_y = -min_x;
  auto grow = [&](const Vec3& p) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  };
  for (const auto& f : frames)
    for (const auto& p : f) grow(p);
  for (const auto& plan : plans)
    for (const auto& w : plan.waypoints) grow(w.pose.position);

  const View v{min_x, max_y, o.pixels_per_meter, o.margin};
  const double width = (max_x - min_x + 2 * o.margin) * o.pixels_per_meter;
  const double height = (max_y - min_y + 2 * o.margin) * o.pixels_per_meter;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  const std::size_t stride = std::max<std::size_t>(o.ghost_stride, 1);
  for (std::size_t i = 0; i + 1 < frames.size(); i += stride) {
    polyline(out, v, frames[i], "stroke=\"#bbb\" stroke-width=\"1\" stroke-opacity=\"0.5\"");
  }
  polyline(out, v, rope, "stroke=\"#444\" stroke-width=\"4\" stroke-linejoin=\"round\"");
  out << "<circle cx=\"" << num(v.x(rope.front().x())) << "\" cy=\"" << num(v.y(rope.front().y()))
      << "\" r=\"5\" fill=\"#ff7f0e\"><title>head</title></circle>\n";
  out << "<circle cx=\"" << num(v.x(rope.back().x())) << "\" cy=\"" << num(v.y(rope.back().y()))
      << "\" r=\"5\" fill=\"#9467bd\"><title>tail</title></circle>\n";

  // Crossing glyph: white gap across the under strand, over strand redrawn on top.
  std::optional<CrossingDiagram> diagram;
  try {
    diagram = project_and_find_crossings(Curve::from_polyline(rope));
  } catch (const Error&) {
  }
  if (diagram) {
    const Curve curve = Curve::from_polyline(rope);
    const double half = 0.012;
    for (std::size_t k = 0; k < diagram->crossings.size(); ++k) {
      const auto& c = diagram->crossings[k];
      auto chord = [&](double s, const char* style) {
        const double ds = half / curve.length();
        const Vec3 a = evaluate(curve, std::max(0.0, s - ds));
        const Vec3 b = evaluate(curve, std::min(1.0, s + ds));
        out << "<line x1=\"" << num(v.x(a.x())) << "\" y1=\"" << num(v.y(a.y())) << "\" x2=\"" << num(v.x(b.x()))
            << "\" y2=\"" << num(v.y(b.y())) << "\" " << style << "/>\n";
      };
      chord(c.s_under, "stroke=\"white\" stroke-width=\"8\"");
      chord(c.s_over, "stroke=\"#444\" stroke-width=\"4\"");
      out << "<text x=\"" << num(v.x(c.position_2d.x()) + 8) << "\" y=\"" << num(v.y(c.position_2d.y()) - 8)
          << "\" font-size=\"11\" fill=\"#444\">" << (c.sign > 0 ? '+' : '-') << (k + 1) << "</text>\n";
    }
  }

  for (const auto& plan : plans) {
    const char* color = plan_color(plan.primitive);
    std::vector<Vec3> path;
    for (const auto& w : plan.waypoints) path.push_back(w.pose.position);
    polyline(out, v, path, (std::string("stroke=\"") + color + "\" stroke-width=\"1\" stroke-dasharray=\"4 3\"").c_str());
    for (const auto& w : plan.waypoints) {
      const Vec3& p = w.pose.position;
      const double cx = v.x(p.x()), cy = v.y(p.y());
      const double arrow = 0.03 * o.pixels_per_meter;
      const Vec3 ax = w.pose.frame.col(0), ay = w.pose.frame.col(1);
      out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(cy) << "\" x2=\"" << num(cx + arrow * ax.x())
          << "\" y2=\"" << num(cy - arrow * ax.y()) << "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
      out << "<line x1=\"" << num(cx) << "\" y1=\"" << num(cy) << "\" x2=\"" << num(cx + arrow * ay.x())
          << "\" y2=\"" << num(cy - arrow * ay.y()) << "\" stroke=\"green\" stroke-width=\"1.5\"/>\n";
      const char* fill = w.gripper == GripperAction::kClose ? color : "white";
      out << "<circle class=\"waypoint\" cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"4\" fill=\"" << fill
          << "\" stroke=\"" << color << "\"/>\n";
      out << "<text x=\"" << num(cx + 6) << "\" y=\"" << num(cy + 12) << "\" font-size=\"10\" fill=\"" << color
          << "\">" << w.label << " z=" << num(p.z() * 100.0) << "cm</text>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::string render_scene(const std::vector<Vec3>& rope, const std::vector<MovePlan>& plans,
                         const RenderOptions& options) {
  return render({rope}, plans, options);
}

std::string render_scene(const std::vector<std::vector<Vec3>>& trajectory, const std::vector<MovePlan>& plans,
                         const RenderOptions& options) {
  return render(trajectory, plans, options);
}

}  // namespace dloknot
