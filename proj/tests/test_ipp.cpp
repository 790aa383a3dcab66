#include <wmapf/assignment.hpp>
#include <wmapf/ipp.hpp>
#include <wmapf/simulator.hpp>

#include <support/layouts.hpp>

#include <gtest/gtest.h>

#include <map>

using namespace wmapf;
using fixtures::make_order;
using std::chrono::seconds;

namespace {

using K = NodeKind;

json steps_json(const Trajectory& t)
{
  json j = json::array();
  for (const auto& s : t)
    j.push_back(s.to_json());
  return j;
}

json paths_json(const Plan& p)
{
  json j = json::array();
  for (const auto& t : p.paths)
    j.push_back(steps_json(t));
  return j;
}

void expect_plan_invariants(const PlanningContext& ctx, const Plan& p, const Assignment& a,
                            Duration margin = Duration{0})
{
  EXPECT_FALSE(fixtures::replay_collides(ctx, p, margin));
  for (const auto& path : p.paths)
    for (std::size_t i = 1; i < path.size(); ++i)
      EXPECT_EQ(path[i].t0, path[i - 1].t1);

  // Each robot's availability only advances.
  std::map<int, Time> last;
  for (const auto& t : p.tasks)
  {
    EXPECT_GE(t.ready, last[t.robot]);
    EXPECT_GE(t.depart, t.ready);
    EXPECT_GE(t.delivery_end, t.depart);
    last[t.robot] = t.delivery_end;
  }

  EXPECT_EQ(workstation_violations(p.tasks), 0);
  // Orders use each workstation in FIFO sequence.
  std::map<int, int> rank;
  for (std::size_t i = 0; i < a.orders.size(); ++i)
    rank[a.orders[i].order] = static_cast<int>(i);
  std::map<int, std::map<int, std::pair<Time, Time>>> spans;  // ws -> rank -> span
  for (const auto& t : p.tasks)
  {
    auto [it, fresh] = spans[t.workstation].try_emplace(rank[t.order], t.workstation_start, t.workstation_end);
    if (!fresh)
    {
      it->second.first = std::min(it->second.first, t.workstation_start);
      it->second.second = std::max(it->second.second, t.workstation_end);
    }
  }
  for (const auto& [ws, by_rank] : spans)
  {
    Time end{0};
    for (const auto& [r, span] : by_rank)
    {
      EXPECT_GE(span.first, end) << "workstation " << ws;
      end = span.second;
    }
  }

  Time mk{0};
  for (const auto& t : p.tasks)
    mk = std::max(mk, t.delivery_end);
  EXPECT_EQ(p.makespan, mk);
}

} // namespace

TEST(EarliestStart, Examples)
{
  const auto l = fixtures::line_layout({K::waiting, K::junction, K::shelf, K::junction, K::workstation}, {{0, 0}});
  PlanningContext ctx(l);
  const auto& h = ctx.heuristic();
  const auto task = tasks_of(make_order(0, {2}), 4).front();
  const Duration to_ws = h.between(0, 2, false) + seconds(10) + h.between(2, 4, true);

  EXPECT_EQ(compute_earliest_start(h, Time{seconds(5)}, 0, task, Time{0}, Time{0}), Time{seconds(5)});
  const Time busy{seconds(500)};
  EXPECT_EQ(compute_earliest_start(h, Time{seconds(5)}, 0, task, busy, Time{0}), busy - to_ws);
  EXPECT_EQ(compute_earliest_start(h, Time{seconds(5)}, 0, task, Time{0}, Time{seconds(40)}), Time{seconds(40)});

  // A delivery order reaches the workstation before the first travel leg.
  const auto back = tasks_of(make_order(0, {2}, OrderDirection::delivery), 4).front();
  EXPECT_EQ(compute_earliest_start(h, Time{0}, 0, back, busy, Time{0}), busy - h.between(0, 4, false));
}

TEST(Ipp, SingleRobotIsOneViaPointSearch)
{
  const auto l = fixtures::line_layout({K::waiting, K::junction, K::shelf, K::junction, K::workstation}, {{0, 0}});
  PlanningContext ctx(l);
  const auto a = assign({make_order(0, {2})}, l, ctx.heuristic());
  const auto p = plan(ctx, a);
  ASSERT_TRUE(p.feasible) << p.failure;

  const auto& g = l.graph;
  const std::vector<ViaPoint> vias{{0, {}, 0.0, false, Duration{0}},
                                   {2, g.node(2).action_yaw, {}, true, seconds(10)},
                                   {4, g.node(4).action_yaw, {}, false, Duration{0}},
                                   {0, {}, {}, false, Duration{0}}};
  SearchOptions so;
  so.hold_at_goal = true;
  const ReservationTable empty;
  const auto r = vp_star(ctx.heuristic(), ctx.sweeps(0), empty, 0, vias, Time{0}, so);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(steps_json(p.paths[0]), steps_json(r.steps));
  ASSERT_EQ(p.tasks.size(), 1u);
  EXPECT_EQ(p.tasks[0].pickup_arrival, r.via_arrival[1]);
  EXPECT_EQ(p.tasks[0].delivery_end, r.via_departure[2]);
  EXPECT_TRUE(p.tasks[0].w_path_kept);
  // Nothing in the way: no regret beyond heuristic slack.
  EXPECT_EQ(p.tasks[0].actual(), p.tasks[0].ideal);
}

TEST(Ipp, SharedWorkstationServesItemsOneAfterAnother)
{
  const auto l = fixtures::compact_layout(2);
  PlanningContext ctx(l, fixtures::coarse_graph());
  const auto shelves = l.shelves();
  const auto a = assign({make_order(0, {shelves[0], shelves.back()})}, l, ctx.heuristic());
  ASSERT_EQ(a.per_agent[0].size() + a.per_agent[1].size(), 2u);
  const auto p = plan(ctx, a);
  ASSERT_TRUE(p.feasible) << p.failure;
  ASSERT_EQ(p.tasks.size(), 2u);
  auto t = p.tasks;
  std::sort(t.begin(), t.end(), [](const auto& x, const auto& y) { return x.workstation_start < y.workstation_start; });
  EXPECT_GE(t[1].workstation_start, t[0].workstation_end);
  expect_plan_invariants(ctx, p, a);
}

TEST(Ipp, RandomBatchInvariants)
{
  for (int robots = 2; robots <= 4; ++robots)
  {
    const auto l = fixtures::compact_layout(robots);
    PlanningContext ctx(l, fixtures::coarse_graph());
    const Simulator sim(l, ctx.graph().options());
    for (std::uint64_t seed = 0; seed < 4; ++seed)
    {
      const auto a = assign(generate_scenario(l, 5, seed), l, ctx.heuristic());
      const auto p = plan(ctx, a);
      ASSERT_TRUE(p.feasible) << p.failure;
      expect_plan_invariants(ctx, p, a);
      const auto tr = sim.execute(p);
      EXPECT_FALSE(tr.collision) << "robots " << robots << " seed " << seed;

      const auto back = plan_from_json(p.to_json(l));
      EXPECT_EQ(back.plan.to_json(back.layout), p.to_json(l));
    }
  }
}

TEST(Ipp, TimeMarginIsHonoured)
{
  const auto l = fixtures::compact_layout(3);
  PlanningContext ctx(l, fixtures::coarse_graph());
  PlannerOptions o;
  o.margin = seconds(4);
  for (std::uint64_t seed = 0; seed < 3; ++seed)
  {
    const auto a = assign(generate_scenario(l, 4, seed), l, ctx.heuristic());
    const auto p = plan(ctx, a, o);
    ASSERT_TRUE(p.feasible) << p.failure;
    expect_plan_invariants(ctx, p, a, o.margin);
  }
}

TEST(Ipp, Deterministic)
{
  const auto l = fixtures::compact_layout(3);
  PlanningContext ctx(l, fixtures::coarse_graph());
  const auto a = assign(generate_scenario(l, 4, 11), l, ctx.heuristic());
  EXPECT_EQ(paths_json(plan(ctx, a)), paths_json(plan(ctx, a)));
}

TEST(Ipp, RobotAwayFromWaitingPlaceIsSentThere)
{
  const auto l = fixtures::line_layout({K::waiting, K::junction, K::shelf, K::junction, K::workstation}, {{3, 0}});
  PlanningContext ctx(l);
  const auto p = plan(ctx, assign({}, l, ctx.heuristic()));
  ASSERT_TRUE(p.feasible) << p.failure;
  ASSERT_FALSE(p.paths[0].empty());
  EXPECT_EQ(end_of(ctx.graph(), p.paths[0].back()).node, 0);
}

TEST(Ipp, AblationsKeepPlansSoundWhenFeasible)
{
  const auto l = fixtures::compact_layout(3);
  PlanningContext ctx(l, fixtures::coarse_graph());
  for (int mode = 0; mode < 2; ++mode)
  {
    PlannerOptions o;
    o.sequential = mode == 0;
    o.reserve_waiting = mode == 1 ? false : true;
    for (std::uint64_t seed = 0; seed < 4; ++seed)
    {
      const auto a = assign(generate_scenario(l, 4, seed), l, ctx.heuristic());
      const auto p = plan(ctx, a, o);
      if (!p.feasible)
      {
        EXPECT_FALSE(p.failure.empty());
        continue;
      }
      EXPECT_FALSE(fixtures::replay_collides(ctx, p));
      EXPECT_EQ(workstation_violations(p.tasks), 0);
    }
  }
}

TEST(Ipp, SequentialMatchesViaPointsInEmptyWarehouse)
{
  const auto l = fixtures::line_layout({K::waiting, K::junction, K::shelf, K::junction, K::workstation}, {{0, 0}});
  PlanningContext ctx(l);
  const auto a = assign({make_order(0, {2})}, l, ctx.heuristic());
  PlannerOptions seq;
  seq.sequential = true;
  const auto p1 = plan(ctx, a);
  const auto p2 = plan(ctx, a, seq);
  ASSERT_TRUE(p1.feasible);
  ASSERT_TRUE(p2.feasible);
  EXPECT_EQ(p1.tasks[0].pickup_arrival, p2.tasks[0].pickup_arrival);
  EXPECT_EQ(p1.tasks[0].delivery_end, p2.tasks[0].delivery_end);
  EXPECT_EQ(p1.makespan, p2.makespan);
}

TEST(Ipp, SequentialLegsFallIntoDeadEndTrap)
{
  // Dead-end aisle 2-3-4 with the shelf at its end. Another robot enters the
  // aisle just as the pick finishes. Planned leg by leg, the robot grabs the
  // earliest pick and is then trapped; planned through all via points it
  // waits outside instead.
  const auto l = fixtures::line_layout({K::waiting, K::junction, K::junction, K::junction, K::shelf}, {{0, 0}});
  PlanningContext ctx(l);
  const auto& h = ctx.heuristic();
  const auto& cache = ctx.sweeps(0);
  const auto& g = ctx.graph();
  const Duration action = seconds(30);
  const ViaPoint from{0, {}, 0.0, false, Duration{0}};
  const ViaPoint pick{4, {}, {}, true, action};
  const ViaPoint out{1, {}, {}, false, Duration{0}};

  const ReservationTable empty;
  const auto free_leg = vp_star(h, cache, empty, 0, std::vector<ViaPoint>{from, pick}, Time{0});
  ASSERT_TRUE(free_leg.feasible);
  const Time done = free_leg.end;

  ReservationTable table;
  const auto stand = [&](int node, Time t0, Time t1) {
    table.reserve(OccupancyRecord(7, t0, t1, cache.at(g.position(node), 0.0)));
  };
  stand(3, done - seconds(5), done + seconds(2));
  stand(4, done + seconds(2), done + seconds(10));
  stand(3, done + seconds(10), done + seconds(17));

  const auto leg1 = vp_star(h, cache, table, 0, std::vector<ViaPoint>{from, pick}, Time{0});
  ASSERT_TRUE(leg1.feasible);
  EXPECT_EQ(leg1.end, done);
  const ViaPoint at_pick{4, {}, leg1.end_pose.yaw, true, Duration{0}};
  const auto leg2 = vp_star(h, cache, table, 0, std::vector<ViaPoint>{at_pick, out}, leg1.end);
  EXPECT_FALSE(leg2.feasible);

  const auto whole = vp_star(h, cache, table, 0, std::vector<ViaPoint>{from, pick, out}, Time{0});
  ASSERT_TRUE(whole.feasible);
  EXPECT_GE(whole.via_arrival[1], done + seconds(17));
  EXPECT_FALSE(table.collides(occupancy(g, cache, 0, whole.steps)));
}
