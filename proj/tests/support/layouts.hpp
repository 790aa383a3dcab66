#ifndef WMAPF_TESTS__LAYOUTS_HPP
#define WMAPF_TESTS__LAYOUTS_HPP

#include <wmapf/collision.hpp>
#include <wmapf/ipp.hpp>
#include <wmapf/trajectory.hpp>
#include <wmapf/warehouse.hpp>

#include <utility>
#include <vector>

namespace fixtures {

using namespace wmapf;

struct NodeSpec
{
  Vec2 xy;
  NodeKind kind = NodeKind::junction;
};

/// Bidirectional layout with one robot per (start, waiting) pair.
inline Layout make_layout(const std::vector<NodeSpec>& nodes, const std::vector<std::pair<int, int>>& edges,
                          const std::vector<std::pair<int, int>>& robots, double speed_limit = 0.2)
{
  std::vector<WarehouseNode> wn;
  for (std::size_t i = 0; i < nodes.size(); ++i)
  {
    WarehouseNode n;
    n.id = static_cast<int>(i);
    n.position = nodes[i].xy;
    n.kind = nodes[i].kind;
    n.turnable = true;
    wn.push_back(n);
  }
  std::vector<WarehouseArc> arcs;
  for (auto [a, b] : edges)
  {
    const double d = distance(nodes[a].xy, nodes[b].xy);
    arcs.push_back({a, b, d, speed_limit});
    arcs.push_back({b, a, d, speed_limit});
  }
  Layout l;
  l.graph = WarehouseGraph(std::move(wn), std::move(arcs));
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].kind == NodeKind::workstation)
      l.workstations.push_back(static_cast<int>(i));
  for (std::size_t r = 0; r < robots.size(); ++r)
  {
    AgentSpec a;
    a.id = static_cast<int>(r);
    a.start = robots[r].first;
    a.waiting = robots[r].second;
    a.footprint = rectangle_footprint(0.9, 0.6);
    a.limits = l.limits;
    l.agents.push_back(a);
  }
  validate(l);
  return l;
}

/// Straight corridor of `kinds` at 1.2 m pitch along x.
inline Layout line_layout(const std::vector<NodeKind>& kinds, const std::vector<std::pair<int, int>>& robots)
{
  std::vector<NodeSpec> nodes;
  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < kinds.size(); ++i)
  {
    nodes.push_back({{1.2 * static_cast<double>(i), 0.0}, kinds[i]});
    if (i > 0)
      edges.emplace_back(static_cast<int>(i) - 1, static_cast<int>(i));
  }
  return make_layout(nodes, edges, robots);
}

/// Generated one-corridor layout small enough for batch tests.
inline Layout compact_layout(int robots, int rows = 1)
{
  auto p = layout_template(rows == 1 ? "1row" : rows == 2 ? "2row" : "3row");
  p.shelves = 3;
  p.positions = 6;
  auto l = generate_layout(p);
  l.agents.resize(robots);
  return l;
}

inline GraphOptions coarse_graph()
{
  GraphOptions g;
  g.tick = std::chrono::seconds(1);
  return g;
}

inline Order make_order(int id, std::vector<int> shelves, OrderDirection dir = OrderDirection::pickup,
                        Duration release = Duration{0}, Duration action = std::chrono::seconds(10))
{
  Order o;
  o.id = id;
  o.release = release;
  o.direction = dir;
  for (int s : shelves)
    o.items.push_back({s, action, Duration{0}});
  return o;
}

/// Everything a plan claims: a stand at the start pose until the first step,
/// the steps, and the final pose held open-ended.
inline std::vector<OccupancyRecord> plan_occupancy(const PlanningContext& ctx, const Plan& plan, int robot)
{
  const auto& g = ctx.graph();
  const auto& cache = ctx.sweeps(robot);
  const auto& steps = plan.paths[robot];
  const auto& agent = ctx.layout().agents[robot];
  std::vector<OccupancyRecord> out;
  if (steps.empty())
  {
    out.emplace_back(robot, Time{0}, kForever, cache.at(g.position(agent.start), agent.start_yaw.value_or(0.0)));
    return out;
  }
  if (steps.front().t0 > Time{0})
    out.emplace_back(robot, Time{0}, steps.front().t0, cache.at(g.position(agent.start), agent.start_yaw.value_or(0.0)));
  auto rest = occupancy(g, cache, robot, steps, false, true);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

/// Whether any robot's claims meet another's in a table of all of them.
inline bool replay_collides(const PlanningContext& ctx, const Plan& plan, Duration margin = Duration{0})
{
  ReservationTable table(margin);
  std::vector<std::vector<OccupancyRecord>> all;
  for (int r = 0; r < static_cast<int>(plan.paths.size()); ++r)
  {
    all.push_back(plan_occupancy(ctx, plan, r));
    table.reserve(all.back());
  }
  for (const auto& recs : all)
    if (table.collides(recs))
      return true;
  return false;
}

} // namespace fixtures

#endif
