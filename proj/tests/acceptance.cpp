// Acceptance batch: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Instances run on compact generated layouts with a 1 s duration grid
// so the whole batch fits in minutes on one core.

#include <wmapf/wmapf.hpp>

#include <support/dense.hpp>
#include <support/euler.hpp>
#include <support/instances.hpp>
#include <support/layouts.hpp>
#include <support/time_expanded.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace wmapf;
using std::chrono::seconds;

namespace {

struct Verdict
{
  bool pass = false;
  std::string detail;
};

int failures = 0;
int ran = 0;
std::vector<int> only;  // criteria named on the command line, all if empty

void criterion(int id, const char* name, const std::function<Verdict()>& body)
{
  if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end())
    return;
  ++ran;
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try
  {
    v = body();
  }
  catch (const std::exception& e)
  {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += !v.pass;
  std::printf("%s %2d %-26s %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), dt);
  std::fflush(stdout);
}

template <class... T>
std::string fmt(const T&... x)
{
  std::ostringstream os;
  os.precision(4);
  (os << ... << x);
  return os.str();
}

bool within(const Quartiles& a, const Quartiles& b, double rel)
{
  const auto ok = [rel](double x, double y) { return std::abs(x - y) <= rel * std::max(std::abs(x), std::abs(y)); };
  return ok(a.q1, b.q1) && ok(a.q2, b.q2) && ok(a.q3, b.q3);
}

SearchOptions exhaustive(bool hold)
{
  SearchOptions o;
  o.first_solution = false;
  o.hold_at_goal = hold;
  return o;
}

/// A compact layout with its planning context, built once per robot count.
struct Bench
{
  Layout layout;
  PlanningContext ctx;

  Bench(int robots, int rows = 1, GraphOptions go = fixtures::coarse_graph())
  : layout(fixtures::compact_layout(robots, rows)), ctx(layout, go)
  {
  }

  Assignment assignment(std::uint64_t seed, int orders = 5) const
  {
    return assign(generate_scenario(layout, orders, seed), layout, ctx.heuristic());
  }
};

//==============================================================================

Verdict vpstar_optimality()
{
  const auto t0 = std::chrono::steady_clock::now();
  int feasible = 0, infeasible = 0, mismatch = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
  {
    const auto in = fixtures::random_instance(seed);
    const auto r = vp_star(*in.heuristic, *in.sweeps, in.table, 0, in.vias, in.start, exhaustive(in.hold_at_goal));
    const auto want = oracle::earliest_arrival(*in.graph, *in.sweeps, in.table, 0, in.vias, in.start,
                                               in.hold_at_goal, in.table.static_after() + seconds(400));
    if (r.feasible != want.has_value() || (want && r.arrival != *want))
      ++mismatch;
    (want ? feasible : infeasible)++;
  }
  const double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {mismatch == 0 && took < 60.0,
          fmt("200 instances (", feasible, " feasible, ", infeasible, " infeasible), ", mismatch,
              " mismatches, ", took, " s")};
}

Verdict kinematics()
{
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const KinematicLimits nominal;
  double worst = 0.0;
  int n = 0;
  while (n < 1000)
  {
    double d, vi = 0.0, vf = 0.0, err;
    AxisLimits ax;
    switch (n % 4)
    {
      case 0:  // default limits, rest to rest
      {
        ax = nominal.linear(u(rng) < 0.5);
        d = 0.01 + 6.0 * u(rng);
        err = segment_time(d, 0.0, ax.max_speed, 0.0, ax).duration()
              - oracle::euler_time(d, 0.0, ax.max_speed, 0.0, ax.accel, ax.decel);
        break;
      }
      case 1:  // default limits, turns in place
      {
        const bool loaded = u(rng) < 0.5;
        ax = nominal.angular(loaded);
        d = std::numbers::pi * (0.05 + 0.95 * u(rng));
        err = turn_time(d, nominal, loaded).duration() - oracle::euler_time(d, 0.0, ax.max_speed, 0.0, ax.accel, ax.decel);
        break;
      }
      default:  // random limits and boundary speeds
      {
        const double V = 0.1 + 0.9 * u(rng);
        ax = AxisLimits{V, 0.1 + u(rng), 0.1 + u(rng)};
        d = 0.01 + 5.0 * u(rng);
        vi = V * u(rng);
        vf = V * u(rng);
        if (vi * vi - 2 * ax.decel * d > vf * vf)
          continue;
        err = segment_time(d, vi, V, vf, ax).duration() - oracle::euler_time(d, vi, V, vf, ax.accel, ax.decel);
      }
    }
    worst = std::max(worst, std::abs(err));
    ++n;
  }
  return {worst <= 0.010, fmt("1000 segments/turns, worst |closed form - Euler| = ", worst * 1e3, " ms")};
}

Verdict completeness()
{
  std::vector<std::unique_ptr<Bench>> benches;
  std::vector<std::unique_ptr<Simulator>> sims;
  for (int robots = 2; robots <= 4; ++robots)
  {
    benches.push_back(std::make_unique<Bench>(robots));
    sims.push_back(std::make_unique<Simulator>(benches.back()->layout, benches.back()->ctx.graph().options()));
  }
  int planned = 0, collided = 0, violations = 0;
  for (std::uint64_t s = 0; s < 100; ++s)
  {
    const int k = static_cast<int>(s % 3);
    const auto p = plan(benches[k]->ctx, benches[k]->assignment(1000 + s));
    if (!p.feasible)
      continue;
    ++planned;
    const auto tr = sims[k]->execute(p);
    collided += tr.collision.has_value();
    violations += workstation_violations(tr.tasks);
  }
  return {planned == 100 && collided == 0 && violations == 0,
          fmt(planned, "/100 planned (2-4 robots), ", collided, " collisions, ", violations,
              " workstation violations")};
}

struct PenaltyBatch
{
  std::vector<double> ratio, mk_penalty, mk_plain, mk_mono, mk_two, visited_mono, visited_two;
};

const PenaltyBatch& penalty_batch()
{
  static const PenaltyBatch b = [] {
    PenaltyBatch b;
    for (int robots : {3, 4})
    {
      const Bench bench(robots);
      for (std::uint64_t s = 0; s < 25; ++s)
      {
        const auto a = bench.assignment(s);
        PlannerOptions with, without, two;
        without.search.penalty = false;
        two.search.two_criteria = true;
        const auto p = plan(bench.ctx, a, with);
        const auto q = plan(bench.ctx, a, without);
        const auto t = plan(bench.ctx, a, two);
        if (p.feasible && q.feasible)
        {
          b.ratio.push_back(static_cast<double>(q.visited) / static_cast<double>(p.visited));
          b.mk_penalty.push_back(makespan_minutes(p));
          b.mk_plain.push_back(makespan_minutes(q));
        }
        if (p.feasible && t.feasible)
        {
          b.visited_mono.push_back(static_cast<double>(p.visited));
          b.visited_two.push_back(static_cast<double>(t.visited));
          b.mk_mono.push_back(makespan_minutes(p));
          b.mk_two.push_back(makespan_minutes(t));
        }
      }
    }
    return b;
  }();
  return b;
}

Verdict penalty_ablation()
{
  const auto& b = penalty_batch();
  if (b.ratio.size() < 50)
    return {false, fmt("only ", b.ratio.size(), " instances planned in both modes")};
  const double m = median(b.ratio);
  const auto a = quartiles(b.mk_penalty), c = quartiles(b.mk_plain);
  return {m >= 2.0 && within(a, c, 0.05),
          fmt(b.ratio.size(), " instances, median visited ratio ", m, ", makespan Q1/Q2/Q3 ", a.q1, "/", a.q2, "/",
              a.q3, " vs ", c.q1, "/", c.q2, "/", c.q3, " min")};
}

struct AblationBatch
{
  int fail[3][3] = {};  // [robots - 2][ipp, sequential, no reservation]
  int seq_only = 0;     // sequential fails where IPP succeeds, 4 robots
};

const AblationBatch& ablation_batch()
{
  static const AblationBatch b = [] {
    AblationBatch b;
    for (int robots = 2; robots <= 4; ++robots)
    {
      const Bench bench(robots);
      for (std::uint64_t s = 0; s < 100; ++s)
      {
        const auto a = bench.assignment(s);
        PlannerOptions ipp, seq, nores;
        seq.sequential = true;
        nores.reserve_waiting = false;
        const bool ok = plan(bench.ctx, a, ipp).feasible;
        const bool sok = plan(bench.ctx, a, seq).feasible;
        const bool nok = plan(bench.ctx, a, nores).feasible;
        b.fail[robots - 2][0] += !ok;
        b.fail[robots - 2][1] += !sok;
        b.fail[robots - 2][2] += !nok;
        if (robots == 4 && ok && !sok)
          ++b.seq_only;
      }
    }
    return b;
  }();
  return b;
}

Verdict sequential()
{
  const auto& b = ablation_batch();
  const bool monotone = b.fail[0][1] <= b.fail[1][1] && b.fail[1][1] <= b.fail[2][1];
  return {b.seq_only >= 1 && monotone,
          fmt("sequential failures 2/3/4 robots: ", b.fail[0][1], "/", b.fail[1][1], "/", b.fail[2][1],
              " of 100; ", b.seq_only, " at 4 robots where IPP succeeds")};
}

Verdict waiting_reservation()
{
  const auto& b = ablation_batch();
  bool ok = true;
  for (int k = 0; k < 3; ++k)
    ok = ok && b.fail[k][2] > b.fail[k][0];
  return {ok, fmt("failures without/with reservation, 2/3/4 robots: ", b.fail[0][2], "/", b.fail[0][0], ", ",
                  b.fail[1][2], "/", b.fail[1][0], ", ", b.fail[2][2], "/", b.fail[2][0], " of 100")};
}

Verdict margins()
{
  const Bench bench(3);
  const Simulator sim(bench.layout, bench.ctx.graph().options());
  std::vector<double> ttf_med, wall_med;
  std::vector<Quartiles> mk;
  for (int delta : {0, 2, 4})
  {
    std::vector<double> ttf, wall, span;
    for (std::uint64_t s = 0; s < 10; ++s)
    {
      PlannerOptions po;
      po.margin = seconds(delta);
      const auto p = plan(bench.ctx, bench.assignment(s), po);
      if (!p.feasible)
        return {false, fmt("instance ", s, " infeasible at margin ", delta, " s")};
      wall.push_back(p.wall_time);
      span.push_back(makespan_minutes(p));
      for (std::uint64_t k = 0; k < 100; ++k)
      {
        const auto tr = sim.execute(p, NoiseModel::pert(k));
        ttf.push_back(tr.collision ? to_seconds(tr.collision->t) / 60.0 : std::numeric_limits<double>::infinity());
      }
    }
    ttf_med.push_back(median(ttf));
    wall_med.push_back(median(wall));
    mk.push_back(quartiles(span));
  }
  const bool ttf_ok = ttf_med[0] <= ttf_med[1] && ttf_med[1] <= ttf_med[2];
  const bool wall_ok = wall_med[0] <= wall_med[1] && wall_med[1] <= wall_med[2];
  const bool mk_ok = within(mk[0], mk[1], 0.10) && within(mk[0], mk[2], 0.10) && within(mk[1], mk[2], 0.10);
  return {ttf_ok && wall_ok && mk_ok,
          fmt("margin 0/2/4 s: median ttf ", ttf_med[0], "/", ttf_med[1], "/", ttf_med[2], " min, median wall ",
              wall_med[0], "/", wall_med[1], "/", wall_med[2], " s, median makespan ", mk[0].q2, "/", mk[1].q2,
              "/", mk[2].q2, " min")};
}

Verdict layouts()
{
  int trends = 0;
  std::string detail;
  for (int robots = 2; robots <= 4; ++robots)
  {
    double m[3];
    for (int rows = 1; rows <= 3; ++rows)
    {
      const Bench bench(robots, rows);
      std::vector<double> rg;
      for (std::uint64_t s = 0; s < 50; ++s)
      {
        const auto p = plan(bench.ctx, bench.assignment(s));
        if (p.feasible)
          rg.push_back(regret_percent(p.tasks));
      }
      m[rows - 1] = rg.empty() ? std::numeric_limits<double>::quiet_NaN() : median(rg);
    }
    trends += m[0] >= m[1] && m[1] >= m[2];
    detail += fmt(robots, " robots ", m[0], "/", m[1], "/", m[2], "%; ");
  }
  return {trends >= 2, fmt("median regret 1/2/3 corridors: ", detail, trends, "/3 ordered")};
}

Verdict dynamics()
{
  GraphOptions naive = fixtures::coarse_graph();
  naive.model = DurationModel::no_inertia;
  const Bench real(4), simple(4, 1, naive);
  const Simulator sim_real(real.layout, real.ctx.graph().options());
  const Simulator sim_simple(simple.layout, naive);
  int base_hit = 0, ipp_hit = 0, base_n = 0, ipp_n = 0;
  for (std::uint64_t s = 0; s < 100; ++s)
  {
    const auto p = plan(real.ctx, real.assignment(2000 + s));
    const auto q = plan(simple.ctx, simple.assignment(2000 + s));
    if (p.feasible)
    {
      ++ipp_n;
      ipp_hit += sim_real.execute(p).collision.has_value();
    }
    if (q.feasible)
    {
      ++base_n;
      base_hit += sim_simple.execute(q).collision.has_value();
    }
  }
  return {base_hit >= 90 && ipp_hit == 0 && ipp_n == 100,
          fmt("no-inertia plans collide on ", base_hit, "/", base_n, ", IPP plans on ", ipp_hit, "/", ipp_n)};
}

Verdict two_criteria()
{
  const auto& b = penalty_batch();
  const double v1 = median(b.visited_mono), v2 = median(b.visited_two);
  const auto a = quartiles(b.mk_mono), c = quartiles(b.mk_two);

  int checked = 0, worse = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
  {
    const auto in = fixtures::random_instance(seed);
    auto two = exhaustive(in.hold_at_goal);
    two.two_criteria = true;
    const auto r1 = vp_star(*in.heuristic, *in.sweeps, in.table, 0, in.vias, in.start, exhaustive(in.hold_at_goal));
    const auto r2 = vp_star(*in.heuristic, *in.sweeps, in.table, 0, in.vias, in.start, two);
    if (!r1.feasible || !r2.feasible)
    {
      worse += r1.feasible != r2.feasible;
      continue;
    }
    ++checked;
    worse += r1.arrival / two.bucket != r2.arrival / two.bucket || r2.moving > r1.moving;
  }
  return {v2 <= v1 && within(a, c, 0.10) && worse == 0,
          fmt("median visited ", v2, " vs ", v1, " (", b.visited_two.size(), " instances), median makespan ",
              c.q2, " vs ", a.q2, " min; ", worse, " of ", checked, " oracle instances move more at equal bucket")};
}

Verdict collision_soundness()
{
  int pairs = 0, free = 0, counter = 0;
  for (std::uint64_t seed = 0; pairs < 500; ++seed)
  {
    std::mt19937_64 rng(seed);
    const auto wg = fixtures::random_graph(rng);
    const auto g = build_routing_graph(wg, KinematicLimits{});
    const SweepCache sweeps(g, fixtures::robot_shape());
    std::uniform_int_distribution<int> node(0, static_cast<int>(wg.size()) - 1);
    std::uniform_int_distribution<int> delay(0, 10);
    for (int k = 0; k < 5 && pairs < 500; ++k, ++pairs)
    {
      const auto a = fixtures::random_walk(rng, g, node(rng), Time{seconds(delay(rng))}, seconds(30));
      const auto b = fixtures::random_walk(rng, g, node(rng), Time{seconds(delay(rng))}, seconds(30));
      ReservationTable table;
      table.reserve(occupancy(g, sweeps, 1, a));
      if (table.collides(occupancy(g, sweeps, 2, b)))
        continue;
      ++free;
      bool hit = false;
      for (int i = 0; i <= 4500 && !hit; ++i)
      {
        const double t = 0.01 * i;
        const auto pa = oracle::pose_at(g, a, t), pb = oracle::pose_at(g, b, t);
        hit = pa && pb && intersects(sweeps.at(pa->xy, pa->yaw), sweeps.at(pb->xy, pb->yaw));
      }
      counter += hit;
    }
  }
  return {counter == 0 && free > 0,
          fmt(pairs, " pairs, ", free, " cleared by the reservation check, ", counter,
              " of them overlap under 10 ms sampling")};
}

} // namespace

int main(int argc, char** argv)
{
  for (int i = 1; i < argc; ++i)
    only.push_back(std::atoi(argv[i]));
  criterion(1, "vpstar-optimality", vpstar_optimality);
  criterion(2, "kinematics-oracle", kinematics);
  criterion(3, "completeness", completeness);
  criterion(4, "penalty-ablation", penalty_ablation);
  criterion(5, "sequential-ablation", sequential);
  criterion(6, "waiting-reservation", waiting_reservation);
  criterion(7, "time-margins", margins);
  criterion(8, "layout-trend", layouts);
  criterion(9, "need-for-dynamics", dynamics);
  criterion(10, "two-criteria", two_criteria);
  criterion(11, "collision-soundness", collision_soundness);
  std::printf("%d of %d criteria failed\n", failures, ran);
  return failures == 0 ? 0 : 1;
}
