#ifndef WMAPF__SIMULATOR_HPP
#define WMAPF__SIMULATOR_HPP

#include <wmapf/collision.hpp>
#include <wmapf/ipp.hpp>
#include <wmapf/routing_graph.hpp>
#include <wmapf/time.hpp>
#include <wmapf/trajectory.hpp>
#include <wmapf/warehouse.hpp>

#include <json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

namespace wmapf {

//==============================================================================
// Noise

/// Beta-PERT draw on [min, max] peaking at `mode`.
inline double pert_sample(double min, double max, double mode, std::mt19937_64& rng)
{
  if (!(min <= mode && mode <= max))
    throw ModelError("pert: need min <= mode <= max");
  if (max == min)
    return min;
  const double alpha = 1.0 + 4.0 * (mode - min) / (max - min);
  const double beta = 1.0 + 4.0 * (max - mode) / (max - min);
  std::gamma_distribution<double> ga(alpha, 1.0), gb(beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return min + (max - min) * x / (x + y);
}

struct NoiseModel
{
  enum class Kind { none, pert };
  Kind kind = Kind::none;
  double min = 1.0;
  double max = 1.1;
  double mode = 1.01;
  std::uint64_t seed = 0;

  static NoiseModel pert(std::uint64_t seed)
  {
    NoiseModel n;
    n.kind = Kind::pert;
    n.seed = seed;
    return n;
  }

  void validate() const
  {
    if (!(min <= mode && mode <= max) || !(min > 0.0))
      throw ModelError("noise: need 0 < min <= mode <= max");
  }
};

//==============================================================================
// Execution

/// A planned step as it actually happened. A move covers its arc in
/// `motion`, then rests until `t1`.
struct RealizedStep
{
  Step planned;
  Time t0{0};
  Time t1{0};
  double factor = 1.0;
  Duration motion{0};
};

struct CollisionEvent
{
  Time t{0};
  int a = 0;
  int b = 0;
};

struct ExecutionTrace
{
  std::vector<std::vector<RealizedStep>> robots;
  std::optional<CollisionEvent> collision;
  std::vector<TaskRecord> tasks;  // plan tasks with realized times
  Time end{0};                    // last realized step end, or the collision time

  Time time_to_failure() const { return collision ? collision->t : kForever; }
};

struct ExecutionOptions
{
  Duration dt = std::chrono::milliseconds(50);
};

/// Replays plans on the physically faithful dynamics. Move steps follow the
/// rest-to-rest profile of their arc, stretched by a noise factor drawn per
/// traversal; the delay this adds over the planned profile shifts the rest
/// of the robot's timeline, while waits and actions keep their planned
/// length. Footprints are checked for exact overlap every `dt`.
class Simulator
{
public:
  Simulator(const Layout& layout, const GraphOptions& planned)
  : _layout(&layout)
  {
    if (layout.agents.empty())
      throw ModelError("simulate: layout has no agent");
    const auto& limits = layout.limits;
    _planned = build_routing_graph(layout.graph, limits, planned);
    GraphOptions real = planned;
    real.model = DurationModel::dynamics;
    _real = build_routing_graph(layout.graph, limits, real);
    for (const auto& a : layout.agents)
      _shapes.push_back(a.padded_footprint());
  }

  const RoutingMultiGraph& graph() const { return _real; }

  ExecutionTrace execute(const Plan& plan, const NoiseModel& noise = {}, const ExecutionOptions& opt = {}) const
  {
    noise.validate();
    if (plan.paths.size() != _layout->agents.size())
      throw ModelError("simulate: plan has " + std::to_string(plan.paths.size()) + " paths for "
                       + std::to_string(_layout->agents.size()) + " agents");
    if (opt.dt.count() <= 0)
      throw ModelError("simulate: dt must be positive");

    std::mt19937_64 rng(noise.seed);
    ExecutionTrace tr;
    tr.robots.resize(plan.paths.size());
    for (std::size_t r = 0; r < plan.paths.size(); ++r)
    {
      Duration shift{0};
      for (const auto& s : plan.paths[r])
      {
        if (s.t1 < s.t0)
          throw ModelError("simulate: step ends before it starts");
        if (s.kind == StepKind::move && (s.arc < 0 || s.arc >= static_cast<int>(_real.arcs().size())))
          throw ModelError("simulate: unknown arc " + std::to_string(s.arc));
        RealizedStep x{s, s.t0 + shift, s.t1 + shift, 1.0, Duration{0}};
        if (s.kind == StepKind::move)
        {
          const int l = s.loaded ? 1 : 0;
          if (noise.kind == NoiseModel::Kind::pert)
            x.factor = pert_sample(noise.min, noise.max, noise.mode, rng);
          const double real = _real.arc(s.arc).profile[l].duration() * x.factor;
          const double planned = _planned.arc(s.arc).profile[l].duration();
          x.motion = ceil_seconds(real);
          const Duration extra = std::max(Duration{0}, x.motion - ceil_seconds(planned));
          shift += extra;
          x.t1 += extra;
        }
        tr.robots[r].push_back(x);
      }
      if (!tr.robots[r].empty())
        tr.end = std::max(tr.end, tr.robots[r].back().t1);
    }

    tr.tasks = plan.tasks;
    for (auto& t : tr.tasks)
    {
      const auto m = [&](Time x) { return realized_time(tr, t.robot, x); };
      t.pickup_arrival = m(t.pickup_arrival);
      t.pickup_end = m(t.pickup_end);
      t.delivery_arrival = m(t.delivery_arrival);
      t.delivery_end = m(t.delivery_end);
      t.workstation_start = m(t.workstation_start);
      t.workstation_end = m(t.workstation_end);
    }

    const std::size_t n = tr.robots.size();
    std::vector<Polygon> fp(n);
    std::vector<Aabb> box(n);
    for (Time t{0}; t <= tr.end && !tr.collision; t += opt.dt)
    {
      for (std::size_t r = 0; r < n; ++r)
      {
        const Pose p = pose(tr, r, t);
        fp[r] = footprint(_shapes[r], p.xy, p.yaw);
        box[r] = bounding_box(fp[r]);
      }
      for (std::size_t a = 0; a < n && !tr.collision; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
          if (box[a].overlaps(box[b]) && intersects(fp[a], fp[b]))
          {
            tr.collision = CollisionEvent{t, static_cast<int>(a), static_cast<int>(b)};
            tr.end = t;
            break;
          }
    }
    return tr;
  }

  /// Realized pose of robot `r` at `t`. Before its first step a robot stands
  /// where that step begins; after the last it keeps its final pose.
  Pose pose(const ExecutionTrace& tr, std::size_t r, Time t) const
  {
    const auto& steps = tr.robots[r];
    if (steps.empty())
    {
      const auto& a = _layout->agents[r];
      return {_layout->graph.node(a.start).position, a.start_yaw.value_or(0.0)};
    }
    auto it = std::upper_bound(steps.begin(), steps.end(), t,
                               [](Time x, const RealizedStep& s) { return x < s.t0; });
    if (it == steps.begin())
      return start_pose(steps.front().planned);
    const auto& s = *std::prev(it);
    if (t >= s.t1)
    {
      const auto e = end_of(_real, s.planned);
      return {_real.position(e.node), e.yaw};
    }
    return pose_in(s, t);
  }

  /// Footprint-level samples in JSON lines, one per robot every `dt`, then
  /// the collision event if any.
  void write_jsonl(std::ostream& os, const ExecutionTrace& tr, Duration dt) const
  {
    for (Time t{0}; t <= tr.end; t += dt)
      for (std::size_t r = 0; r < tr.robots.size(); ++r)
      {
        const Pose p = pose(tr, r, t);
        os << json{{"t", to_seconds(t)}, {"robot", _layout->agents[r].id}, {"x", p.xy.x},
                   {"y", p.xy.y}, {"yaw", p.yaw}, {"loaded", loaded_at(tr, r, t)}}.dump()
           << '\n';
      }
    if (tr.collision)
      os << json{{"event", "collision"}, {"t", to_seconds(tr.collision->t)},
                 {"robots", {_layout->agents[tr.collision->a].id, _layout->agents[tr.collision->b].id}}}.dump()
         << '\n';
  }

private:
  Pose start_pose(const Step& s) const
  {
    if (s.kind != StepKind::move)
      return {_real.position(s.node), s.yaw};
    const auto& a = _real.arc(s.arc);
    return pose_on_arc(_real, a, s.backward, a.profile[s.loaded ? 1 : 0], 0.0);
  }

  Pose pose_in(const RealizedStep& s, Time t) const
  {
    if (s.planned.kind != StepKind::move)
      return {_real.position(s.planned.node), s.planned.yaw};
    const auto& a = _real.arc(s.planned.arc);
    return pose_on_arc(_real, a, s.planned.backward, a.profile[s.planned.loaded ? 1 : 0],
                       to_seconds(t - s.t0) / s.factor);
  }

  static bool loaded_at(const ExecutionTrace& tr, std::size_t r, Time t)
  {
    const auto& steps = tr.robots[r];
    auto it = std::upper_bound(steps.begin(), steps.end(), t,
                               [](Time x, const RealizedStep& s) { return x < s.t0; });
    if (it == steps.begin())
      return !steps.empty() && steps.front().planned.loaded;
    return std::prev(it)->planned.loaded;
  }

  /// Realized instant of a planned instant on robot `r`'s timeline.
  static Time realized_time(const ExecutionTrace& tr, int r, Time planned)
  {
    Duration shift{0};
    for (const auto& s : tr.robots[r])
    {
      if (s.planned.t1 > planned)
        break;
      shift = s.t1 - s.planned.t1;
    }
    return planned + shift;
  }

  const Layout* _layout;
  RoutingMultiGraph _planned;
  RoutingMultiGraph _real;
  std::vector<Polygon> _shapes;
};

/// Pairs of distinct orders whose workstation spans overlap at a common
/// workstation.
inline int workstation_violations(const std::vector<TaskRecord>& tasks)
{
  std::map<std::pair<int, int>, std::pair<Time, Time>> span;  // (workstation, order)
  for (const auto& t : tasks)
  {
    auto [it, fresh] = span.try_emplace({t.workstation, t.order}, t.workstation_start, t.workstation_end);
    if (!fresh)
    {
      it->second.first = std::min(it->second.first, t.workstation_start);
      it->second.second = std::max(it->second.second, t.workstation_end);
    }
  }
  int bad = 0;
  for (auto a = span.begin(); a != span.end(); ++a)
    for (auto b = std::next(a); b != span.end() && b->first.first == a->first.first; ++b)
      if (a->second.first < b->second.second && b->second.first < a->second.second)
        ++bad;
  return bad;
}

} // namespace wmapf

#endif // WMAPF__SIMULATOR_HPP
