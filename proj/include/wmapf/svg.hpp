#ifndef WMAPF__SVG_HPP
#define WMAPF__SVG_HPP

#include <wmapf/ipp.hpp>
#include <wmapf/simulator.hpp>
#include <wmapf/warehouse.hpp>

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace wmapf {

/// Static map of the warehouse with one planned polyline per robot and,
/// when a trace is given, one realized polyline per robot.
class SvgMap
{
public:
  explicit SvgMap(const Layout& layout, double scale = 40.0, double pad = 1.0)
  : _layout(&layout), _scale(scale), _pad(pad)
  {
    for (const auto& n : layout.graph.nodes())
    {
      _min.x = std::min(_min.x, n.position.x);
      _min.y = std::min(_min.y, n.position.y);
      _max.x = std::max(_max.x, n.position.x);
      _max.y = std::max(_max.y, n.position.y);
    }
    if (layout.graph.size() == 0)
      _min = _max = {0.0, 0.0};
  }

  void write(std::ostream& os, const RoutingMultiGraph& g, const Plan& plan,
             const Simulator* sim = nullptr, const ExecutionTrace* trace = nullptr) const
  {
    const double w = (_max.x - _min.x + 2 * _pad) * _scale;
    const double h = (_max.y - _min.y + 2 * _pad) * _scale;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n"
       << "<style>.edge{stroke:#bbb;stroke-width:2}.planned{fill:none;stroke-width:2}"
          ".realized{fill:none;stroke-width:1;stroke-dasharray:4 2}</style>\n";
    const auto& wg = _layout->graph;
    for (const auto& a : wg.arcs())
    {
      const Vec2 p = px(wg.node(a.from).position), q = px(wg.node(a.to).position);
      os << "<line class=\"edge\" x1=\"" << p.x << "\" y1=\"" << p.y << "\" x2=\"" << q.x << "\" y2=\"" << q.y << "\"/>\n";
    }
    for (const auto& n : wg.nodes())
    {
      const Vec2 p = px(n.position);
      os << "<circle class=\"" << to_string(n.kind) << "\" cx=\"" << p.x << "\" cy=\"" << p.y
         << "\" r=\"4\" fill=\"" << fill(n.kind) << "\"/>\n";
    }
    for (std::size_t r = 0; r < plan.paths.size(); ++r)
    {
      std::vector<Vec2> pts{wg.node(_layout->agents[r].start).position};
      for (const auto& s : plan.paths[r])
        pts.push_back(s.kind == StepKind::move ? g.arc(s.arc).target : g.position(s.node));
      polyline(os, "planned", r, pts);
    }
    if (sim && trace)
      for (std::size_t r = 0; r < trace->robots.size(); ++r)
      {
        std::vector<Vec2> pts;
        for (Time t{0}; t <= trace->end; t += std::chrono::seconds(1))
          pts.push_back(sim->pose(*trace, r, t).xy);
        polyline(os, "realized", r, pts);
      }
    os << "</svg>\n";
  }

private:
  Vec2 px(Vec2 p) const { return {(p.x - _min.x + _pad) * _scale, (_max.y - p.y + _pad) * _scale}; }

  static const char* fill(NodeKind k)
  {
    switch (k)
    {
      case NodeKind::shelf: return "#8a6d3b";
      case NodeKind::workstation: return "#3b6d8a";
      case NodeKind::waiting: return "#6d8a3b";
      case NodeKind::charging: return "#8a3b6d";
      case NodeKind::junction: return "#999";
    }
    return "#999";
  }

  void polyline(std::ostream& os, const char* cls, std::size_t r, const std::vector<Vec2>& pts) const
  {
    static const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    os << "<polyline class=\"" << cls << "\" data-robot=\"" << _layout->agents[r].id << "\" stroke=\""
       << colors[r % 6] << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
      const Vec2 p = px(pts[i]);
      os << (i ? " " : "") << p.x << ',' << p.y;
    }
    os << "\"/>\n";
  }

  const Layout* _layout;
  double _scale;
  double _pad;
  Vec2 _min{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 _max{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
};

} // namespace wmapf

#endif // WMAPF__SVG_HPP
