#ifndef WMAPF__TRAJECTORY_HPP
#define WMAPF__TRAJECTORY_HPP

#include <wmapf/collision.hpp>
#include <wmapf/routing_graph.hpp>
#include <wmapf/time.hpp>

#include <json.hpp>

#include <string>
#include <vector>

namespace wmapf {

enum class StepKind { move, wait, action };

inline const char* to_string(StepKind k)
{
  switch (k)
  {
    case StepKind::move: return "move";
    case StepKind::wait: return "wait";
    case StepKind::action: return "action";
  }
  return "?";
}

inline StepKind step_kind_from(const std::string& s)
{
  if (s == "move") return StepKind::move;
  if (s == "wait") return StepKind::wait;
  if (s == "action") return StepKind::action;
  throw ParseError("unknown step kind '" + s + "'");
}

/// One timed piece of a robot trajectory. Moves reference a routing arc and
/// the travel orientation the robot had when entering it; waits and actions
/// hold a pose at a warehouse node.
struct Step
{
  StepKind kind = StepKind::wait;
  int arc = -1;
  int node = -1;  // warehouse node index where the step begins
  Time t0{0};
  Time t1{0};
  bool loaded = false;
  bool backward = false;
  double yaw = 0.0;  // yaw at t0

  Duration duration() const { return t1 - t0; }

  json to_json() const
  {
    json j{{"kind", wmapf::to_string(kind)}, {"node", node},
           {"t_start", to_seconds(t0)}, {"t_end", to_seconds(t1)},
           {"loaded", loaded}, {"yaw", yaw}};
    if (kind == StepKind::move)
    {
      j["arc"] = arc;
      j["backward"] = backward;
    }
    return j;
  }

  static Step from_json(const json& j)
  {
    Step s;
    s.kind = step_kind_from(j.at("kind").get<std::string>());
    s.node = j.at("node").get<int>();
    s.t0 = from_seconds(j.at("t_start").get<double>());
    s.t1 = from_seconds(j.at("t_end").get<double>());
    s.loaded = j.value("loaded", false);
    s.yaw = j.value("yaw", 0.0);
    if (s.kind == StepKind::move)
    {
      s.arc = j.at("arc").get<int>();
      s.backward = j.value("backward", false);
    }
    return s;
  }
};

using Trajectory = std::vector<Step>;

struct EndPose
{
  int node = -1;
  double yaw = 0.0;
};

/// Pose reached at the end of a step.
inline EndPose end_of(const RoutingMultiGraph& g, const Step& s)
{
  if (s.kind != StepKind::move)
    return {s.node, s.yaw};
  const auto& a = g.arc(s.arc);
  double yaw = s.yaw;
  if (a.is_rotation())
    yaw = wrap_angle(yaw + a.rotation);
  return {g.node(a.to).base, yaw};
}

/// Occupancy claims of a trajectory. With `hold_at_end` the final pose is
/// claimed open-ended.
inline std::vector<OccupancyRecord> occupancy(
  const RoutingMultiGraph& g, const SweepCache& cache, int robot,
  std::span<const Step> steps, bool provisional = false, bool hold_at_end = false)
{
  std::vector<OccupancyRecord> out;
  for (const auto& s : steps)
  {
    if (s.kind == StepKind::move)
    {
      auto r = sweep_arc(cache, robot, s.arc, s.backward, s.loaded, s.t0, provisional);
      out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
    }
    else if (s.t1 > s.t0)
    {
      out.emplace_back(robot, s.t0, s.t1, cache.at(g.position(s.node), s.yaw), provisional);
    }
  }
  if (hold_at_end && !steps.empty())
  {
    const auto e = end_of(g, steps.back());
    out.emplace_back(robot, steps.back().t1, kForever, cache.at(g.position(e.node), e.yaw), provisional);
  }
  return out;
}

/// Total duration spent moving.
inline Duration move_time(std::span<const Step> steps)
{
  Duration d{0};
  for (const auto& s : steps)
    if (s.kind == StepKind::move)
      d += s.duration();
  return d;
}

} // namespace wmapf

#endif // WMAPF__TRAJECTORY_HPP
