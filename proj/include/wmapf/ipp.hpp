#ifndef WMAPF__IPP_HPP
#define WMAPF__IPP_HPP

#include <wmapf/assignment.hpp>
#include <wmapf/collision.hpp>
#include <wmapf/routing_graph.hpp>
#include <wmapf/trajectory.hpp>
#include <wmapf/vpstar.hpp>
#include <wmapf/warehouse.hpp>

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace wmapf {

struct PlannerOptions
{
  /// Time margin added around every reservation.
  Duration margin{0};
  /// Reserve the way back to the waiting place after each task. Off is the
  /// ablation where robots park at their last drop-off.
  bool reserve_waiting = true;
  /// Plan each leg between consecutive via points on its own (ablation).
  bool sequential = false;
  SearchOptions search;
  Duration wait_quantum = std::chrono::seconds(1);
  int cap = 0;

  json to_json() const
  {
    return {{"margin", to_seconds(margin)}, {"reserve_waiting", reserve_waiting},
            {"sequential", sequential}, {"penalty", search.penalty},
            {"two_criteria", search.two_criteria}, {"first_solution", search.first_solution},
            {"wait_quantum", to_seconds(wait_quantum)}, {"cap", cap}};
  }

  static PlannerOptions from_json(const json& j)
  {
    PlannerOptions o;
    o.margin = from_seconds(j.value("margin", 0.0));
    o.reserve_waiting = j.value("reserve_waiting", true);
    o.sequential = j.value("sequential", false);
    o.search.penalty = j.value("penalty", true);
    o.search.two_criteria = j.value("two_criteria", false);
    o.search.first_solution = j.value("first_solution", true);
    o.wait_quantum = from_seconds(j.value("wait_quantum", 1.0));
    o.cap = j.value("cap", 0);
    return o;
  }
};

/// What happened to one task. Node fields are node indices.
struct TaskRecord
{
  int order = 0;
  int item = 0;
  int robot = 0;  // index into Layout::agents
  int workstation = 0;
  int pickup = 0;
  int delivery = 0;
  Time ready{0};   // robot available when the task came up
  Time depart{0};  // start of the search for this task
  Time pickup_arrival{0};
  Time pickup_end{0};
  Time delivery_arrival{0};
  Time delivery_end{0};
  Time workstation_start{0};
  Time workstation_end{0};
  /// Collision-free duration from the departure pose.
  Duration ideal{0};
  bool waited = false;
  /// Whether the way back to the waiting place planned with this task was
  /// eventually driven.
  bool w_path_kept = false;
  std::uint64_t visited = 0;
  double wall_time = 0.0;

  Duration actual() const { return delivery_end - depart; }

  json to_json() const
  {
    return {{"order", order}, {"item", item}, {"robot", robot}, {"workstation", workstation},
            {"pickup", pickup}, {"delivery", delivery},
            {"ready", to_seconds(ready)}, {"depart", to_seconds(depart)},
            {"pickup_arrival", to_seconds(pickup_arrival)}, {"pickup_end", to_seconds(pickup_end)},
            {"delivery_arrival", to_seconds(delivery_arrival)},
            {"delivery_end", to_seconds(delivery_end)},
            {"workstation_start", to_seconds(workstation_start)},
            {"workstation_end", to_seconds(workstation_end)},
            {"ideal", to_seconds(ideal)}, {"waited", waited},
            {"w_path", w_path_kept ? "kept" : "discarded"},
            {"visited", visited}, {"wall_time", wall_time}};
  }

  static TaskRecord from_json(const json& j)
  {
    TaskRecord r;
    r.order = j.at("order").get<int>();
    r.item = j.at("item").get<int>();
    r.robot = j.at("robot").get<int>();
    r.workstation = j.at("workstation").get<int>();
    r.pickup = j.at("pickup").get<int>();
    r.delivery = j.at("delivery").get<int>();
    const auto t = [&](const char* k) { return from_seconds(j.at(k).get<double>()); };
    r.ready = t("ready");
    r.depart = t("depart");
    r.pickup_arrival = t("pickup_arrival");
    r.pickup_end = t("pickup_end");
    r.delivery_arrival = t("delivery_arrival");
    r.delivery_end = t("delivery_end");
    r.workstation_start = t("workstation_start");
    r.workstation_end = t("workstation_end");
    r.ideal = t("ideal");
    r.waited = j.value("waited", false);
    r.w_path_kept = j.value("w_path", std::string("discarded")) == "kept";
    r.visited = j.value("visited", std::uint64_t{0});
    r.wall_time = j.value("wall_time", 0.0);
    return r;
  }
};

struct Plan
{
  bool feasible = false;
  std::string failure;
  std::vector<Trajectory> paths;  // per agent index
  std::vector<TaskRecord> tasks;  // in planning order
  Time makespan{0};
  std::uint64_t visited = 0;
  double wall_time = 0.0;
  PlannerOptions options;
  GraphOptions graph;

  json to_json(const Layout& layout) const
  {
    json robots = json::array();
    for (std::size_t r = 0; r < paths.size(); ++r)
    {
      json steps = json::array();
      for (const auto& s : paths[r])
        steps.push_back(s.to_json());
      robots.push_back({{"agent", layout.agents[r].id}, {"steps", steps}});
    }
    json jt = json::array();
    for (const auto& t : tasks)
      jt.push_back(t.to_json());
    json j{{"feasible", feasible}, {"makespan", to_seconds(makespan)},
           {"stats", {{"visited", visited}, {"wall_time", wall_time}}},
           {"options", options.to_json()}, {"graph", graph.to_json()},
           {"layout", wmapf::to_json(layout)}, {"robots", robots}, {"tasks", jt}};
    if (!feasible)
      j["failure"] = failure;
    return j;
  }
};

struct LoadedPlan
{
  Layout layout;
  Plan plan;
};

inline LoadedPlan plan_from_json(const json& j)
{
  try
  {
    LoadedPlan out;
    out.layout = layout_from_json(j.at("layout"));
    auto& p = out.plan;
    p.feasible = j.at("feasible").get<bool>();
    p.failure = j.value("failure", std::string());
    p.makespan = from_seconds(j.at("makespan").get<double>());
    p.visited = j.at("stats").value("visited", std::uint64_t{0});
    p.wall_time = j.at("stats").value("wall_time", 0.0);
    p.options = PlannerOptions::from_json(j.at("options"));
    p.graph = GraphOptions::from_json(j.at("graph"));
    p.paths.resize(out.layout.agents.size());
    for (const auto& jr : j.at("robots"))
    {
      const int id = jr.at("agent").get<int>();
      const auto it = std::find_if(out.layout.agents.begin(), out.layout.agents.end(),
                                   [&](const AgentSpec& a) { return a.id == id; });
      if (it == out.layout.agents.end())
        throw ParseError("plan refers to unknown agent " + std::to_string(id));
      auto& steps = p.paths[it - out.layout.agents.begin()];
      for (const auto& js : jr.at("steps"))
        steps.push_back(Step::from_json(js));
    }
    for (const auto& jt : j.at("tasks"))
      p.tasks.push_back(TaskRecord::from_json(jt));
    return out;
  }
  catch (const json::exception& e)
  {
    throw ParseError(std::string("malformed plan: ") + e.what());
  }
}

inline LoadedPlan load_plan(const std::filesystem::path& path)
{
  return plan_from_json(read_json_file(path));
}

/// Optimistic departure time that brings the robot to the workstation no
/// earlier than it is free, never before the robot is free or the order is
/// released.
inline Time compute_earliest_start(
  const HeuristicTable& h, Time ready, int node, const Task& task, Time workstation_free,
  Time release)
{
  const Duration to_ws = ideal_to_workstation(h, node, task);
  return std::max({ready, release, workstation_free - to_ws});
}

//==============================================================================
/// What planning needs that depends on the layout only: routing graph,
/// heuristic and swept volumes per robot shape. Shared by every instance
/// planned on the layout; not thread safe.
class PlanningContext
{
public:
  PlanningContext(const Layout& layout, const GraphOptions& options = {})
  : _layout(&layout), _graph(build_routing_graph(layout.graph, layout.limits, options)),
    _heuristic(_graph)
  {
    std::vector<Polygon> shapes;
    for (const auto& a : layout.agents)
    {
      const Polygon shape = a.padded_footprint();
      auto it = std::find(shapes.begin(), shapes.end(), shape);
      if (it == shapes.end())
      {
        shapes.push_back(shape);
        _caches.push_back(std::make_unique<SweepCache>(_graph, shape));
        it = shapes.end() - 1;
      }
      _cache_of.push_back(static_cast<int>(it - shapes.begin()));
    }
  }

  PlanningContext(const PlanningContext&) = delete;
  PlanningContext& operator=(const PlanningContext&) = delete;

  const Layout& layout() const { return *_layout; }
  const RoutingMultiGraph& graph() const { return _graph; }
  const HeuristicTable& heuristic() const { return _heuristic; }
  const SweepCache& sweeps(int robot) const { return *_caches[_cache_of.at(robot)]; }

private:
  const Layout* _layout;
  RoutingMultiGraph _graph;
  HeuristicTable _heuristic;
  std::vector<std::unique_ptr<SweepCache>> _caches;
  std::vector<int> _cache_of;
};

//==============================================================================
/// Interleaved prioritized planning: orders in FIFO sequence, within an order
/// the earliest available robot plans its next task first.
class Planner
{
public:
  explicit Planner(const PlanningContext& context, PlannerOptions options = {})
  : _ctx(&context), _layout(&context.layout()), _graph(&context.graph()),
    _h(&context.heuristic()), _opt(options), _table(options.margin)
  {
  }

  const ReservationTable& table() const { return _table; }
  const SweepCache& sweeps(int robot) const { return _ctx->sweeps(robot); }

  Plan run(const Assignment& assignment)
  {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    Plan plan;
    plan.options = _opt;
    plan.graph = _graph->options();
    const auto done = [&](Plan& p) {
      p.wall_time = std::chrono::duration<double>(clock::now() - t0).count();
      return std::move(p);
    };

    const auto& agents = _layout->agents;
    _robots.assign(agents.size(), {});
    for (std::size_t r = 0; r < agents.size(); ++r)
    {
      auto& s = _robots[r];
      s.node = agents[r].start;
      s.yaw = agents[r].start_yaw.value_or(0.0);
      hold(static_cast<int>(r), s.node, s.yaw, Time{0});
    }
    // Robots away from their waiting place get a reserved way there first.
    for (std::size_t r = 0; r < agents.size() && _opt.reserve_waiting; ++r)
    {
      auto& s = _robots[r];
      const int robot = static_cast<int>(r);
      if (s.node == agents[r].waiting)
        continue;
      const std::vector<ViaPoint> vias{{s.node, {}, s.yaw, false, Duration{0}},
                                       {agents[r].waiting, {}, {}, false, Duration{0}}};
      auto so = _opt.search;
      so.hold_at_goal = true;
      const auto res = vp_star(*_h, sweeps(robot), _table, robot, vias, Time{0}, so);
      plan.visited += res.stats.visited;
      if (!res.feasible)
      {
        plan.failure = "no reserved way to the waiting place for agent " + std::to_string(agents[r].id);
        return done(plan);
      }
      _table.release_provisional(robot);
      s.w_path = res.steps;
      reserve(robot, s.w_path, true, true);
    }

    std::map<int, Time> ws_free;
    for (const auto& oa : assignment.orders)
    {
      const Time free = ws_free[oa.workstation];
      Time busy_until = free;
      std::vector<int> pending = oa.tasks;
      while (!pending.empty())
      {
        std::stable_sort(pending.begin(), pending.end(), [&](int a, int b) {
          const int ra = assignment.tasks[a].agent, rb = assignment.tasks[b].agent;
          return _robots[ra].ready != _robots[rb].ready ? _robots[ra].ready < _robots[rb].ready : ra < rb;
        });
        const auto& ta = assignment.tasks[pending.front()];
        pending.erase(pending.begin());
        auto rec = plan_task(ta, free, oa.release, plan);
        if (!rec)
        {
          plan.failure = "no trajectory for order " + std::to_string(ta.task.order) + " item "
            + std::to_string(ta.task.item) + " (agent " + std::to_string(agents[ta.agent].id) + ")";
          return done(plan);
        }
        busy_until = std::max(busy_until, rec->workstation_end);
        plan.makespan = std::max(plan.makespan, rec->delivery_end);
        plan.tasks.push_back(*rec);
        _robots[ta.agent].last_task = static_cast<int>(plan.tasks.size()) - 1;
      }
      ws_free[oa.workstation] = busy_until;
    }

    plan.paths.resize(agents.size());
    for (std::size_t r = 0; r < agents.size(); ++r)
    {
      auto& s = _robots[r];
      if (!s.w_path.empty())
      {
        if (s.last_task >= 0)
          plan.tasks[s.last_task].w_path_kept = true;
        s.path.insert(s.path.end(), s.w_path.begin(), s.w_path.end());
      }
      plan.paths[r] = std::move(s.path);
    }
    plan.feasible = true;
    return done(plan);
  }

private:
  struct RobotState
  {
    Time ready{0};
    int node = 0;
    double yaw = 0.0;
    Trajectory path;    // committed
    Trajectory w_path;  // provisional way back to the waiting place
    int last_task = -1;
  };

  void reserve(int robot, std::span<const Step> steps, bool provisional, bool hold_at_end)
  {
    _table.reserve(occupancy(*_graph, sweeps(robot), robot, steps, provisional, hold_at_end));
  }

  void hold(int robot, int node, double yaw, Time from)
  {
    _table.reserve(OccupancyRecord(robot, from, kForever, sweeps(robot).at(_graph->position(node), yaw), true));
  }

  void append(RobotState& s, std::span<const Step> steps)
  {
    if (steps.empty())
      return;
    s.path.insert(s.path.end(), steps.begin(), steps.end());
    const auto e = end_of(*_graph, steps.back());
    s.node = e.node;
    s.yaw = e.yaw;
    s.ready = steps.back().t1;
  }

  SearchResult search(int robot, std::span<const ViaPoint> vias, Time start, bool hold_at_goal,
                      TaskRecord& rec, Plan& plan)
  {
    auto so = _opt.search;
    so.hold_at_goal = hold_at_goal;
    auto res = vp_star(*_h, sweeps(robot), _table, robot, vias, start, so);
    rec.visited += res.stats.visited;
    rec.wall_time += res.stats.wall_time;
    plan.visited += res.stats.visited;
    return res;
  }

  std::optional<TaskRecord> plan_task(const TaskAssignment& ta, Time ws_free, Time release, Plan& plan)
  {
    const int robot = ta.agent;
    auto& s = _robots[robot];
    const auto& task = ta.task;
    const int home = _layout->agents[robot].waiting;

    TaskRecord rec;
    rec.order = task.order;
    rec.item = task.item;
    rec.robot = robot;
    rec.workstation = ta.workstation;
    rec.pickup = task.pickup;
    rec.delivery = task.delivery;
    rec.ready = s.ready;

    const Time start = compute_earliest_start(*_h, s.ready, s.node, task, ws_free, release);
    if (start > s.ready)
    {
      // Go and wait at the waiting place.
      rec.waited = true;
      Trajectory way;
      if (_opt.reserve_waiting)
      {
        way = s.w_path;
        if (!way.empty() && s.last_task >= 0)
          plan.tasks[s.last_task].w_path_kept = true;
      }
      else if (s.node != home)
      {
        const std::vector<ViaPoint> vias{{s.node, {}, s.yaw, false, Duration{0}},
                                         {home, {}, {}, false, Duration{0}}};
        auto res = search(robot, vias, s.ready, true, rec, plan);
        if (!res.feasible)
          return std::nullopt;
        way = std::move(res.steps);
      }
      s.w_path.clear();
      _table.release_provisional(robot);
      reserve(robot, way, false, false);
      append(s, way);
      const Time again = compute_earliest_start(*_h, s.ready, s.node, task, ws_free, release);
      const Duration wt = ceil_to(std::max(Duration{0}, again - s.ready), _opt.wait_quantum);
      if (wt > Duration{0})
      {
        const Step w{StepKind::wait, -1, s.node, s.ready, s.ready + wt, false, false, s.yaw};
        reserve(robot, std::span(&w, 1), false, false);
        append(s, std::span(&w, 1));
      }
    }
    else
    {
      s.w_path.clear();
      _table.release_provisional(robot);
    }

    rec.depart = s.ready;
    rec.ideal = ideal_task_time(*_h, s.node, task);
    const auto& g = _layout->graph;
    const ViaPoint from{s.node, {}, s.yaw, false, Duration{0}};
    const ViaPoint pick{task.pickup, g.node(task.pickup).action_yaw, {}, true, task.pickup_duration};
    const ViaPoint drop{task.delivery, g.node(task.delivery).action_yaw, {}, false, task.delivery_duration};
    const ViaPoint back{home, {}, {}, false, Duration{0}};

    Trajectory path, w_path;
    if (!_opt.sequential)
    {
      std::vector<ViaPoint> vias{from, pick, drop};
      if (_opt.reserve_waiting)
        vias.push_back(back);
      auto res = search(robot, vias, s.ready, true, rec, plan);
      if (!res.feasible)
        return std::nullopt;
      rec.pickup_arrival = res.via_arrival[1];
      rec.pickup_end = res.via_departure[1];
      rec.delivery_arrival = res.via_arrival[2];
      if (_opt.reserve_waiting)
      {
        rec.delivery_end = res.via_departure[2];
        path.assign(res.steps.begin(), res.steps.begin() + res.split);
        w_path.assign(res.steps.begin() + res.split, res.steps.end());
      }
      else
      {
        // The drop-off is covered by the open-ended stay; spell it out.
        path = std::move(res.steps);
        rec.delivery_end = rec.delivery_arrival + task.delivery_duration;
        if (task.delivery_duration > Duration{0})
          path.push_back({StepKind::action, -1, task.delivery, rec.delivery_arrival, rec.delivery_end,
                          true, false, res.end_pose.yaw});
      }
    }
    else
    {
      // One leg at a time; each leg commits to its own earliest arrival.
      ViaPoint a = from;
      Time t = s.ready;
      const auto leg = [&](ViaPoint goal, bool hold_at_goal) -> std::optional<SearchResult> {
        const std::vector<ViaPoint> vias{a, goal};
        auto res = search(robot, vias, t, hold_at_goal, rec, plan);
        if (!res.feasible)
          return std::nullopt;
        a = {goal.node, {}, res.end_pose.yaw, goal.loaded_out, Duration{0}};
        t = res.end;
        return res;
      };
      const auto r1 = leg(pick, false);
      if (!r1)
        return std::nullopt;
      rec.pickup_arrival = r1->arrival;
      rec.pickup_end = r1->end;
      path = r1->steps;
      const auto r2 = leg(drop, !_opt.reserve_waiting);
      if (!r2)
        return std::nullopt;
      rec.delivery_arrival = r2->arrival;
      rec.delivery_end = r2->arrival + task.delivery_duration;
      path.insert(path.end(), r2->steps.begin(), r2->steps.end());
      if (!_opt.reserve_waiting && task.delivery_duration > Duration{0})
        path.push_back({StepKind::action, -1, task.delivery, rec.delivery_arrival, rec.delivery_end,
                        true, false, r2->end_pose.yaw});
      if (_opt.reserve_waiting)
      {
        t = rec.delivery_end;
        const auto r3 = leg(back, true);
        if (!r3)
          return std::nullopt;
        w_path = r3->steps;
      }
    }

    if (task.workstation_is_pickup)
    {
      rec.workstation_start = rec.pickup_arrival;
      rec.workstation_end = rec.pickup_end;
    }
    else
    {
      rec.workstation_start = rec.delivery_arrival;
      rec.workstation_end = rec.delivery_end;
    }

    reserve(robot, path, false, false);
    append(s, path);
    s.ready = rec.delivery_end;
    if (_opt.reserve_waiting)
    {
      s.w_path = std::move(w_path);
      reserve(robot, s.w_path, true, false);
      if (s.w_path.empty())
        hold(robot, s.node, s.yaw, s.ready);
      else
      {
        const auto e = end_of(*_graph, s.w_path.back());
        hold(robot, e.node, e.yaw, s.w_path.back().t1);
      }
    }
    else
    {
      hold(robot, s.node, s.yaw, s.ready);
    }
    return rec;
  }

  const PlanningContext* _ctx;
  const Layout* _layout;
  const RoutingMultiGraph* _graph;
  const HeuristicTable* _h;
  PlannerOptions _opt;
  ReservationTable _table;
  std::vector<RobotState> _robots;
};

inline Plan plan(const PlanningContext& context, const Assignment& assignment,
                 const PlannerOptions& options = {})
{
  Planner p(context, options);
  return p.run(assignment);
}

} // namespace wmapf

#endif // WMAPF__IPP_HPP
