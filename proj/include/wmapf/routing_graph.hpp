#ifndef WMAPF__ROUTING_GRAPH_HPP
#define WMAPF__ROUTING_GRAPH_HPP

#include <wmapf/geometry.hpp>
#include <wmapf/kinematics.hpp>
#include <wmapf/time.hpp>
#include <wmapf/warehouse.hpp>

#include <json.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <queue>
#include <unordered_map>
#include <vector>

namespace wmapf {

//==============================================================================
enum class RoutingNodeKind { start, stop, arrive, depart };

inline const char* to_string(RoutingNodeKind k)
{
  switch (k)
  {
    case RoutingNodeKind::start: return "start";
    case RoutingNodeKind::stop: return "stop";
    case RoutingNodeKind::arrive: return "arrive";
    case RoutingNodeKind::depart: return "depart";
  }
  return "?";
}

/// A robot standing at warehouse node `base`. Direction nodes (arrive /
/// depart) fix the axis of travel: arrive-from(w) points away from w,
/// depart-to(w) points at w. Whether the robot faces along that heading or
/// backwards is part of the search state, not of the node.
struct RoutingNode
{
  int id = 0;
  int base = 0;
  RoutingNodeKind kind = RoutingNodeKind::start;
  int neighbor = -1;
  double heading = 0.0;

  bool is_direction() const
  {
    return kind == RoutingNodeKind::arrive || kind == RoutingNodeKind::depart;
  }
};

enum class ArcKind
{
  straight,
  shortcut,
  reverse_link,
  pass_through,
  u_turn,
  turn_cw,
  turn_ccw,
  wait_loop,
  start_link,
  stop_link,
};

inline const char* to_string(ArcKind k)
{
  switch (k)
  {
    case ArcKind::straight: return "straight";
    case ArcKind::shortcut: return "shortcut";
    case ArcKind::reverse_link: return "reverse-link";
    case ArcKind::pass_through: return "pass-through";
    case ArcKind::u_turn: return "u-turn";
    case ArcKind::turn_cw: return "turn-cw";
    case ArcKind::turn_ccw: return "turn-ccw";
    case ArcKind::wait_loop: return "wait-loop";
    case ArcKind::start_link: return "start-link";
    case ArcKind::stop_link: return "stop-link";
  }
  return "?";
}

struct RoutingArc
{
  int id = 0;
  int from = 0;
  int to = 0;
  ArcKind kind = ArcKind::straight;
  Vec2 origin;
  Vec2 target;
  double length = 0.0;    // translation, meters
  double rotation = 0.0;  // signed, counter-clockwise positive
  double speed_limit = 0.0;
  int hops = 0;           // warehouse edges covered by a translation
  bool flips_orientation = false;
  std::array<Duration, 2> duration{};      // indexed by load
  std::array<MotionProfile, 2> profile{};  // indexed by load

  bool is_translation() const
  {
    return kind == ArcKind::straight || kind == ArcKind::shortcut;
  }

  bool is_rotation() const
  {
    return kind == ArcKind::u_turn || kind == ArcKind::turn_cw || kind == ArcKind::turn_ccw;
  }

  bool is_motion() const { return is_translation() || is_rotation(); }
};

/// How arc durations are derived. Only `dynamics` is physically faithful;
/// the other two reproduce the simplified baselines.
enum class DurationModel
{
  dynamics,
  constant_edge_time,
  no_inertia,
};

inline const char* to_string(DurationModel m)
{
  switch (m)
  {
    case DurationModel::dynamics: return "dynamics";
    case DurationModel::constant_edge_time: return "constant";
    case DurationModel::no_inertia: return "no-inertia";
  }
  return "?";
}

inline DurationModel duration_model_from(const std::string& s)
{
  if (s == "dynamics") return DurationModel::dynamics;
  if (s == "constant") return DurationModel::constant_edge_time;
  if (s == "no-inertia") return DurationModel::no_inertia;
  throw ModelError("unknown duration model '" + s + "'");
}

struct GraphOptions
{
  /// Arc durations are rounded up to this grid; keeps every reachable time on
  /// a common lattice so duplicate detection is exact.
  Duration tick = std::chrono::milliseconds(100);
  /// Duration of the wait loops.
  Duration wait = std::chrono::seconds(1);
  bool shortcuts = true;
  double collinear_tolerance = 0.5 * std::numbers::pi / 180.0;
  DurationModel model = DurationModel::dynamics;

  json to_json() const
  {
    return json{{"tick", to_seconds(tick)}, {"wait", to_seconds(wait)},
                {"shortcuts", shortcuts}, {"duration_model", wmapf::to_string(model)}};
  }

  static GraphOptions from_json(const json& j)
  {
    GraphOptions o;
    o.tick = from_seconds(j.value("tick", to_seconds(o.tick)));
    o.wait = from_seconds(j.value("wait", to_seconds(o.wait)));
    o.shortcuts = j.value("shortcuts", o.shortcuts);
    o.model = duration_model_from(j.value("duration_model", std::string("dynamics")));
    return o;
  }
};

//==============================================================================
class RoutingMultiGraph
{
public:
  const std::vector<RoutingNode>& nodes() const { return _nodes; }
  const std::vector<RoutingArc>& arcs() const { return _arcs; }
  const RoutingNode& node(int i) const { return _nodes[i]; }
  const RoutingArc& arc(int i) const { return _arcs[i]; }
  const std::vector<int>& out_arcs(int node) const { return _out[node]; }
  const std::vector<int>& in_arcs(int node) const { return _in[node]; }

  int start_node(int base) const { return _start[base]; }
  int stop_node(int base) const { return _stop[base]; }
  const std::vector<int>& direction_nodes(int base) const { return _directions[base]; }

  int arrive_node(int base, int neighbor) const { return _arrive.at(key(base, neighbor)); }
  int depart_node(int base, int neighbor) const { return _depart.at(key(base, neighbor)); }

  Vec2 position(int base) const { return _positions[base]; }
  std::size_t warehouse_size() const { return _positions.size(); }
  const GraphOptions& options() const { return _options; }
  const KinematicLimits& limits() const { return _limits; }

  /// Physical yaw of a robot at direction node `n`.
  double yaw(int n, bool backward) const
  {
    return wrap_angle(_nodes[n].heading + (backward ? std::numbers::pi : 0.0));
  }

  /// Travel orientation at direction node `n` for a physical yaw, if the yaw
  /// lies on the node's axis.
  std::optional<bool> orientation_for(int n, double yaw, double tol = 1e-3) const
  {
    if (same_angle(yaw, _nodes[n].heading, tol))
      return false;
    if (same_angle(yaw, _nodes[n].heading + std::numbers::pi, tol))
      return true;
    return std::nullopt;
  }

  json to_json() const
  {
    json jn = json::array();
    for (const auto& n : _nodes)
    {
      json x{{"id", n.id}, {"base", n.base}, {"kind", wmapf::to_string(n.kind)}};
      if (n.is_direction())
      {
        x["neighbor"] = n.neighbor;
        x["yaw"] = n.heading;
      }
      jn.push_back(std::move(x));
    }
    json ja = json::array();
    for (const auto& a : _arcs)
    {
      ja.push_back({{"id", a.id}, {"from", a.from}, {"to", a.to},
                    {"kind", wmapf::to_string(a.kind)},
                    {"duration", {to_seconds(a.duration[0]), to_seconds(a.duration[1])}},
                    {"length", a.length}, {"rotation", a.rotation},
                    {"flips_orientation", a.flips_orientation}});
    }
    return json{{"nodes", jn}, {"arcs", ja}, {"options", _options.to_json()}};
  }

  friend RoutingMultiGraph build_topology(const WarehouseGraph&, const KinematicLimits&, const GraphOptions&);
  friend void precompute_durations(RoutingMultiGraph&, const KinematicLimits&);

private:
  static std::int64_t key(int a, int b) { return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b); }

  int add_node(int base, RoutingNodeKind kind, int neighbor, double heading)
  {
    const int id = static_cast<int>(_nodes.size());
    _nodes.push_back({id, base, kind, neighbor, heading});
    _out.emplace_back();
    _in.emplace_back();
    return id;
  }

  RoutingArc& add_arc(int from, int to, ArcKind kind)
  {
    RoutingArc a;
    a.id = static_cast<int>(_arcs.size());
    a.from = from;
    a.to = to;
    a.kind = kind;
    a.origin = a.target = _positions[_nodes[from].base];
    _out[from].push_back(a.id);
    _in[to].push_back(a.id);
    _arcs.push_back(a);
    return _arcs.back();
  }

  std::vector<RoutingNode> _nodes;
  std::vector<RoutingArc> _arcs;
  std::vector<std::vector<int>> _out;
  std::vector<std::vector<int>> _in;
  std::vector<int> _start;
  std::vector<int> _stop;
  std::vector<std::vector<int>> _directions;
  std::unordered_map<std::int64_t, int> _arrive;
  std::unordered_map<std::int64_t, int> _depart;
  std::vector<Vec2> _positions;
  double _mean_edge = 0.0;
  GraphOptions _options;
  KinematicLimits _limits;
};

//==============================================================================
/// Node and arc structure without durations.
inline RoutingMultiGraph build_topology(
  const WarehouseGraph& wg, const KinematicLimits& limits, const GraphOptions& options)
{
  RoutingMultiGraph g;
  g._options = options;
  g._limits = limits;
  const int n = static_cast<int>(wg.size());
  for (const auto& node : wg.nodes())
    g._positions.push_back(node.position);
  g._start.resize(n);
  g._stop.resize(n);
  g._directions.resize(n);

  double total = 0.0;
  for (const auto& a : wg.arcs())
    total += a.length;
  g._mean_edge = wg.arcs().empty() ? 1.0 : total / static_cast<double>(wg.arcs().size());

  const double pi = std::numbers::pi;
  const double tol = options.collinear_tolerance;

  for (int u = 0; u < n; ++u)
  {
    const Vec2 pu = wg.node(u).position;
    g._start[u] = g.add_node(u, RoutingNodeKind::start, -1, 0.0);
    g._stop[u] = g.add_node(u, RoutingNodeKind::stop, -1, 0.0);
    for (int w : wg.neighbors(u))
    {
      const Vec2 pw = wg.node(w).position;
      const int arr = g.add_node(u, RoutingNodeKind::arrive, w, heading_of(pw, pu));
      const int dep = g.add_node(u, RoutingNodeKind::depart, w, heading_of(pu, pw));
      g._arrive[RoutingMultiGraph::key(u, w)] = arr;
      g._depart[RoutingMultiGraph::key(u, w)] = dep;
      g._directions[u].push_back(arr);
      g._directions[u].push_back(dep);
    }
  }

  for (int u = 0; u < n; ++u)
  {
    const auto& dirs = g._directions[u];
    for (int d : dirs)
      g.add_arc(g._start[u], d, ArcKind::start_link);
    for (int d : dirs)
      g.add_arc(d, g._stop[u], ArcKind::stop_link);

    for (int w : wg.neighbors(u))
    {
      const int arr = g.arrive_node(u, w);
      const int dep = g.depart_node(u, w);
      g.add_arc(arr, dep, ArcKind::reverse_link).flips_orientation = true;
      g.add_arc(dep, arr, ArcKind::reverse_link).flips_orientation = true;
      if (wg.node(u).turnable)
      {
        g.add_arc(arr, dep, ArcKind::u_turn).rotation = pi;
        g.add_arc(dep, arr, ArcKind::u_turn).rotation = pi;
      }
    }

    // Node triplets a-u-b.
    for (int a : wg.neighbors(u))
    {
      for (int b : wg.neighbors(u))
      {
        if (a == b)
          continue;
        const int arr = g.arrive_node(u, a);
        const int dep = g.depart_node(u, b);
        const double delta = wrap_angle(g._nodes[dep].heading - g._nodes[arr].heading);
        if (std::abs(delta) <= tol)
        {
          g.add_arc(arr, dep, ArcKind::pass_through);
          continue;
        }
        if (std::abs(pi - std::abs(delta)) <= tol)
          continue;
        auto& keep = g.add_arc(arr, dep, delta > 0 ? ArcKind::turn_ccw : ArcKind::turn_cw);
        keep.rotation = delta;
        const double other = delta > 0 ? delta - pi : delta + pi;
        auto& flip = g.add_arc(arr, dep, other > 0 ? ArcKind::turn_ccw : ArcKind::turn_cw);
        flip.rotation = other;
        flip.flips_orientation = true;
      }
    }

    for (int d : dirs)
      g.add_arc(d, d, ArcKind::wait_loop);
  }

  // Straight arcs and collinear shortcuts.
  for (const auto& e : wg.arcs())
  {
    const int u = e.from;
    const int w = e.to;
    const int dep = g.depart_node(u, w);
    {
      auto& a = g.add_arc(dep, g.arrive_node(w, u), ArcKind::straight);
      a.origin = wg.node(u).position;
      a.target = wg.node(w).position;
      a.length = e.length;
      a.speed_limit = e.speed_limit;
      a.hops = 1;
    }
    if (!options.shortcuts)
      continue;

    const double dir0 = heading_of(wg.node(u).position, wg.node(w).position);
    int prev = u;
    int cur = w;
    double length = e.length;
    double speed = e.speed_limit;
    int hops = 1;
    std::vector<char> visited(n, 0);
    visited[u] = visited[w] = 1;
    while (true)
    {
      std::optional<int> next_arc;
      for (int ai : wg.out_arcs(cur))
      {
        const auto& cand = wg.arcs()[ai];
        if (cand.to == prev || visited[cand.to])
          continue;
        const double d = heading_of(wg.node(cur).position, wg.node(cand.to).position);
        if (std::abs(wrap_angle(d - dir0)) <= tol)
        {
          next_arc = ai;
          break;
        }
      }
      if (!next_arc)
        break;
      const auto& step = wg.arcs()[*next_arc];
      length += step.length;
      speed = std::min(speed, step.speed_limit);
      ++hops;
      prev = cur;
      cur = step.to;
      visited[cur] = 1;

      auto& a = g.add_arc(dep, g.arrive_node(cur, prev), ArcKind::shortcut);
      a.origin = wg.node(u).position;
      a.target = wg.node(cur).position;
      a.length = length;
      a.speed_limit = speed;
      a.hops = hops;
    }
  }
  return g;
}

/// Fill the per-load duration and motion profile of every arc. Motion arcs
/// start and end at rest.
inline void precompute_durations(RoutingMultiGraph& g, const KinematicLimits& limits)
{
  const auto& opt = g._options;
  for (auto& a : g._arcs)
  {
    for (int l = 0; l < 2; ++l)
    {
      const bool loaded = l == 1;
      MotionProfile p;
      Duration d{0};
      if (a.is_translation())
      {
        const double v = std::min(limits.max_speed, a.speed_limit);
        switch (opt.model)
        {
          case DurationModel::dynamics:
            p = segment_time(a.length, 0.0, v, 0.0, limits, loaded);
            break;
          case DurationModel::no_inertia:
            p = MotionProfile::constant_speed(a.length, a.length / v);
            break;
          case DurationModel::constant_edge_time:
            p = MotionProfile::constant_speed(a.length, a.hops * g._mean_edge / v);
            break;
        }
        d = ceil_to(ceil_seconds(p.duration()), opt.tick);
      }
      else if (a.is_rotation())
      {
        const double angle = std::abs(a.rotation);
        if (opt.model == DurationModel::dynamics)
          p = turn_time(angle, limits, loaded);
        else
          p = MotionProfile::constant_speed(angle, angle / limits.max_angular_speed);
        d = ceil_to(ceil_seconds(p.duration()), opt.tick);
      }
      else if (a.kind == ArcKind::wait_loop)
      {
        d = opt.wait;
      }
      a.profile[l] = p;
      a.duration[l] = d;
    }
  }
}

inline RoutingMultiGraph build_routing_graph(
  const WarehouseGraph& wg, const KinematicLimits& limits, const GraphOptions& options = {})
{
  auto g = build_topology(wg, limits, options);
  precompute_durations(g, limits);
  return g;
}

//==============================================================================
/// Obstacle-free shortest-path durations h(v, goal, load) toward a warehouse
/// node reached in any orientation. Backward trees are computed per goal on
/// first use and cached; lookups are safe from concurrent readers.
class HeuristicTable
{
public:
  using Tree = std::vector<Duration>;

  explicit HeuristicTable(const RoutingMultiGraph& graph)
  : _graph(&graph)
  {
  }

  const RoutingMultiGraph& graph() const { return *_graph; }

  /// Lower bound on the duration from routing node `from` to warehouse node
  /// `goal`. kForever when unreachable.
  Duration operator()(int from, int goal, bool loaded) const
  {
    return (*tree(goal, loaded))[from];
  }

  /// Lower bound between two warehouse nodes, ignoring the start heading.
  Duration between(int base_from, int base_to, bool loaded) const
  {
    return (*this)(_graph->start_node(base_from), base_to, loaded);
  }

  std::shared_ptr<const Tree> tree(int goal, bool loaded) const
  {
    const std::int64_t k = goal * 2 + (loaded ? 1 : 0);
    {
      std::lock_guard lock(_mutex);
      if (const auto it = _trees.find(k); it != _trees.end())
        return it->second;
    }
    auto t = std::make_shared<const Tree>(backward_tree(goal, loaded));
    std::lock_guard lock(_mutex);
    return _trees.emplace(k, std::move(t)).first->second;
  }

  /// Refined bound that also honours a required heading at the goal. States
  /// are (routing node, travel orientation).
  Duration oriented(int from, bool backward, int goal, double goal_yaw, bool loaded) const
  {
    const auto key = std::make_tuple(goal, static_cast<std::int64_t>(std::llround(goal_yaw * 1e4)), loaded);
    std::shared_ptr<const Tree> t;
    {
      std::lock_guard lock(_mutex);
      if (const auto it = _oriented.find(key); it != _oriented.end())
        t = it->second;
    }
    if (!t)
    {
      auto fresh = std::make_shared<const Tree>(oriented_tree(goal, goal_yaw, loaded));
      std::lock_guard lock(_mutex);
      t = _oriented.emplace(key, std::move(fresh)).first->second;
    }
    return (*t)[2 * from + (backward ? 1 : 0)];
  }

private:
  Tree backward_tree(int goal, bool loaded) const
  {
    const auto& g = *_graph;
    Tree dist(g.nodes().size(), kForever);
    using Item = std::pair<Duration, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
    const int target = g.stop_node(goal);
    dist[target] = Duration{0};
    q.emplace(Duration{0}, target);
    while (!q.empty())
    {
      const auto [d, v] = q.top();
      q.pop();
      if (d > dist[v])
        continue;
      for (int ai : g.in_arcs(v))
      {
        const auto& a = g.arc(ai);
        if (a.kind == ArcKind::wait_loop)
          continue;
        const Duration nd = d + a.duration[loaded ? 1 : 0];
        if (nd < dist[a.from])
        {
          dist[a.from] = nd;
          q.emplace(nd, a.from);
        }
      }
    }
    return dist;
  }

  Tree oriented_tree(int goal, double goal_yaw, bool loaded) const
  {
    const auto& g = *_graph;
    Tree dist(2 * g.nodes().size(), kForever);
    using Item = std::pair<Duration, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> q;
    for (int d : g.direction_nodes(goal))
    {
      if (const auto o = g.orientation_for(d, goal_yaw))
      {
        const int s = 2 * d + (*o ? 1 : 0);
        dist[s] = Duration{0};
        q.emplace(Duration{0}, s);
      }
    }
    while (!q.empty())
    {
      const auto [d, s] = q.top();
      q.pop();
      if (d > dist[s])
        continue;
      const int v = s / 2;
      const bool back = s % 2 == 1;
      for (int ai : g.in_arcs(v))
      {
        const auto& a = g.arc(ai);
        if (a.kind == ArcKind::wait_loop || a.kind == ArcKind::start_link
            || a.kind == ArcKind::stop_link)
          continue;
        const bool prev_back = a.flips_orientation ? !back : back;
        const int ps = 2 * a.from + (prev_back ? 1 : 0);
        const Duration nd = d + a.duration[loaded ? 1 : 0];
        if (nd < dist[ps])
        {
          dist[ps] = nd;
          q.emplace(nd, ps);
        }
      }
    }
    return dist;
  }

  const RoutingMultiGraph* _graph;
  mutable std::mutex _mutex;
  mutable std::unordered_map<std::int64_t, std::shared_ptr<const Tree>> _trees;
  mutable std::map<std::tuple<int, std::int64_t, bool>, std::shared_ptr<const Tree>> _oriented;
};

} // namespace wmapf

#endif // WMAPF__ROUTING_GRAPH_HPP
