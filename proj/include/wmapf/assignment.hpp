#ifndef WMAPF__ASSIGNMENT_HPP
#define WMAPF__ASSIGNMENT_HPP

#include <wmapf/routing_graph.hpp>
#include <wmapf/time.hpp>
#include <wmapf/warehouse.hpp>

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

namespace wmapf {

//==============================================================================
// Collision-free travel estimates

namespace detail {

inline Duration leg(const HeuristicTable& h, int from, int to, bool loaded)
{
  const Duration d = h.between(from, to, loaded);
  if (d == kForever)
    throw ModelError("no route between nodes " + std::to_string(from) + " and " + std::to_string(to));
  return d;
}

} // namespace detail

/// Ideal time from `from` until the robot stands at the task's workstation.
inline Duration ideal_to_workstation(const HeuristicTable& h, int from, const Task& task)
{
  Duration d = detail::leg(h, from, task.pickup, false);
  if (!task.workstation_is_pickup)
    d += task.pickup_duration + detail::leg(h, task.pickup, task.delivery, true);
  return d;
}

/// Ideal time from `from` to the end of the task's drop-off.
inline Duration ideal_task_time(const HeuristicTable& h, int from, const Task& task)
{
  return detail::leg(h, from, task.pickup, false) + task.pickup_duration
    + detail::leg(h, task.pickup, task.delivery, true) + task.delivery_duration;
}

inline Duration workstation_action(const Task& task)
{
  return task.workstation_is_pickup ? task.pickup_duration : task.delivery_duration;
}

//==============================================================================
struct AgentState
{
  Time available{0};
  int node = 0;
};

struct WorkstationState
{
  Time available{0};
};

struct TaskAssignment
{
  Task task;
  int agent = 0;        // index into Layout::agents
  int workstation = 0;  // node index
  Time start{0};
  Time workstation_arrival{0};
  Time end{0};
};

struct OrderAssignment
{
  int order = 0;
  int workstation = 0;  // node index
  Time release{0};
  std::vector<int> tasks;  // indices into Assignment::tasks, in assignment order
  Time workstation_start{0};
  Time workstation_end{0};
};

struct Assignment
{
  std::vector<OrderAssignment> orders;  // FIFO
  std::vector<TaskAssignment> tasks;
  std::vector<std::vector<int>> per_agent;

  json to_json(const Layout& layout) const
  {
    const auto& g = layout.graph;
    json jo = json::array();
    for (const auto& o : orders)
      jo.push_back({{"order", o.order}, {"workstation", g.node(o.workstation).id},
                    {"release", to_seconds(o.release)}, {"tasks", o.tasks},
                    {"workstation_start", to_seconds(o.workstation_start)},
                    {"workstation_end", to_seconds(o.workstation_end)}});
    json jt = json::array();
    for (const auto& t : tasks)
      jt.push_back({{"order", t.task.order}, {"item", t.task.item},
                    {"agent", layout.agents[t.agent].id},
                    {"pickup", g.node(t.task.pickup).id}, {"delivery", g.node(t.task.delivery).id},
                    {"start", to_seconds(t.start)},
                    {"workstation_arrival", to_seconds(t.workstation_arrival)},
                    {"end", to_seconds(t.end)}});
    return {{"orders", jo}, {"tasks", jt}};
  }
};

/// Orders sorted by release date, ties by id.
inline std::vector<Order> fifo(std::vector<Order> orders)
{
  std::stable_sort(orders.begin(), orders.end(), [](const Order& a, const Order& b) {
    return a.release != b.release ? a.release < b.release : a.id < b.id;
  });
  return orders;
}

/// Rule-based assignment over the collision-free schedule. Each order goes to
/// the earliest available workstation; each of its tasks to the earliest
/// available agent, ties broken by proximity to the pickup and then by agent
/// order. `cap` > 0 limits the number of agents serving one order.
inline Assignment assign(
  const std::vector<Order>& orders, const Layout& layout, const HeuristicTable& h, int cap = 0)
{
  if (layout.workstations.empty())
    throw ModelError("assign: layout has no workstation");
  if (layout.agents.empty())
    throw ModelError("assign: layout has no agent");

  std::vector<AgentState> agents(layout.agents.size());
  for (std::size_t a = 0; a < agents.size(); ++a)
    agents[a].node = layout.agents[a].start;
  std::vector<WorkstationState> stations(layout.workstations.size());

  Assignment out;
  out.per_agent.resize(agents.size());
  for (const auto& order : fifo(orders))
  {
    std::size_t w = 0;
    for (std::size_t i = 1; i < stations.size(); ++i)
      if (stations[i].available < stations[w].available)
        w = i;
    const int ws = layout.workstations[w];

    OrderAssignment oa;
    oa.order = order.id;
    oa.workstation = ws;
    oa.release = order.release;
    oa.workstation_start = kForever;
    Time ws_end = stations[w].available;

    std::set<int> used;
    for (const auto& task : tasks_of(order, ws))
    {
      int best = -1;
      Duration best_reach = kForever;
      for (int a = 0; a < static_cast<int>(agents.size()); ++a)
      {
        if (cap > 0 && static_cast<int>(used.size()) >= cap && !used.contains(a))
          continue;
        const Duration reach = detail::leg(h, agents[a].node, task.pickup, false);
        if (best < 0 || agents[a].available < agents[best].available
            || (agents[a].available == agents[best].available && reach < best_reach))
        {
          best = a;
          best_reach = reach;
        }
      }
      used.insert(best);

      auto& st = agents[best];
      const Duration to_ws = ideal_to_workstation(h, st.node, task);
      const Time start = std::max({st.available, order.release, stations[w].available - to_ws});
      TaskAssignment ta;
      ta.task = task;
      ta.agent = best;
      ta.workstation = ws;
      ta.start = start;
      ta.workstation_arrival = start + to_ws;
      ta.end = start + ideal_task_time(h, st.node, task);
      st.available = ta.end;
      st.node = task.delivery;

      oa.workstation_start = std::min(oa.workstation_start, ta.workstation_arrival);
      ws_end = std::max(ws_end, ta.workstation_arrival + workstation_action(task));
      oa.tasks.push_back(static_cast<int>(out.tasks.size()));
      out.per_agent[best].push_back(static_cast<int>(out.tasks.size()));
      out.tasks.push_back(ta);
    }
    if (oa.tasks.empty())
      oa.workstation_start = stations[w].available;
    oa.workstation_end = ws_end;
    stations[w].available = ws_end;
    out.orders.push_back(std::move(oa));
  }
  return out;
}

} // namespace wmapf

#endif // WMAPF__ASSIGNMENT_HPP
