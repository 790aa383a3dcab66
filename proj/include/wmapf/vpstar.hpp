#ifndef WMAPF__VPSTAR_HPP
#define WMAPF__VPSTAR_HPP

#include <wmapf/collision.hpp>
#include <wmapf/routing_graph.hpp>
#include <wmapf/time.hpp>
#include <wmapf/trajectory.hpp>

#include <algorithm>
#include <chrono>
#include <limits>
#include <memory>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace wmapf {

//==============================================================================
/// A warehouse node the robot has to visit, in order. via[0] describes the
/// robot's state at the start of the search: its node, heading (out_yaw) and
/// load (loaded_out).
struct ViaPoint
{
  int node = 0;
  std::optional<double> in_yaw;
  std::optional<double> out_yaw;
  bool loaded_out = false;
  Duration action{0};
};

struct SearchOptions
{
  bool penalty = true;
  Duration penalty_unit = std::chrono::seconds(1000);
  bool first_solution = true;
  /// Secondary criterion: arrivals in the same `bucket` are equivalent and
  /// less time spent moving is preferred among them.
  bool two_criteria = false;
  Duration bucket = std::chrono::seconds(2);
  /// The last via point must be claimable forever instead of for its action.
  bool hold_at_goal = false;
  bool oriented_heuristic = false;
  std::size_t max_expansions = 5'000'000;
};

struct SearchStats
{
  std::size_t visited = 0;
  std::size_t pushed = 0;
  double wall_time = 0.0;
};

struct SearchResult
{
  bool feasible = false;
  bool aborted = false;  // expansion limit hit
  Trajectory steps;
  /// steps[0, split) ends with the action at the next-to-last via point;
  /// the remainder is the trailing leg to the last one.
  std::size_t split = 0;
  Time split_time{0};
  Time arrival{0};  // last via point reached, before its action
  Time end{0};      // end of the last step
  EndPose end_pose;
  Duration moving{0};
  /// Per via point: time reached, and time its action ends.
  std::vector<Time> via_arrival;
  std::vector<Time> via_departure;
  SearchStats stats;
};

/// Extra heap score keeping the search focused on reaching the next via
/// point: nothing once a single via point remains.
inline Duration penalty(int vp, int k, Duration unit = std::chrono::seconds(1000))
{
  return unit * std::max(0, k - 2 - vp);
}

//==============================================================================
/// Lower bound on the remaining duration from routing node `v` after having
/// reached via point `vp`, through the remaining via points. Excludes the
/// action at the last via point.
class ViaHeuristic
{
public:
  ViaHeuristic(const HeuristicTable& h, std::span<const ViaPoint> vias, bool oriented = false)
  : _h(&h), _vias(vias.begin(), vias.end()), _oriented(oriented)
  {
    const int k = static_cast<int>(_vias.size());
    const auto& g = h.graph();
    _suffix.assign(std::max(k, 1), Duration{0});
    _actions.assign(std::max(k, 1), Duration{0});
    for (int i = 0; i + 1 < k; ++i)
      _trees.push_back(h.tree(_vias[i + 1].node, _vias[i].loaded_out));
    for (int i = k - 2; i >= 1; --i)
    {
      const Duration leg = (*_trees[i])[g.start_node(_vias[i].node)];
      _suffix[i] = saturating_add(saturating_add(_vias[i].action, leg), _suffix[i + 1]);
      _actions[i] = _vias[i].action + _actions[i + 1];
    }
  }

  int size() const { return static_cast<int>(_vias.size()); }

  Duration operator()(int v, bool backward, int vp) const
  {
    if (vp + 1 >= size())
      return Duration{0};
    const auto& next = _vias[vp + 1];
    Duration first = (*_trees[vp])[v];
    if (_oriented && next.in_yaw && _h->graph().node(v).is_direction())
      first = _h->oriented(v, backward, next.node, *next.in_yaw, _vias[vp].loaded_out);
    return saturating_add(first, _suffix[vp + 1]);
  }

  /// Action time still to come between via vp + 1 and the last via point.
  Duration actions_after(int vp) const
  {
    return vp + 1 < size() ? _actions[vp + 1] : Duration{0};
  }

private:
  const HeuristicTable* _h;
  std::vector<ViaPoint> _vias;
  bool _oriented;
  std::vector<std::shared_ptr<const HeuristicTable::Tree>> _trees;
  std::vector<Duration> _suffix;
  std::vector<Duration> _actions;
};

inline Duration bar_h(const HeuristicTable& h, int v, bool backward, int vp,
                      std::span<const ViaPoint> vias)
{
  return ViaHeuristic(h, vias)(v, backward, vp);
}

//==============================================================================
namespace detail {

struct Label
{
  int parent = -1;
  int arc = -1;  // -1: root, -2: via point action
  int node = 0;
  bool backward = false;
  int vp = 0;
  Time tau{0};
  Duration moved{0};
};

struct FrontEntry
{
  Time tau;
  Duration moved;
  int label;
};

struct QueueItem
{
  Duration hs;
  int remaining;
  Duration moved;
  int node;
  std::uint64_t seq;
  int label;

  bool operator>(const QueueItem& o) const
  {
    if (hs != o.hs) return hs > o.hs;
    if (remaining != o.remaining) return remaining > o.remaining;
    if (moved != o.moved) return moved > o.moved;
    if (node != o.node) return node > o.node;
    return seq > o.seq;
  }
};

struct StateKey
{
  int node;
  int vp;
  bool backward;
  std::int64_t time;

  bool operator==(const StateKey&) const = default;
};

struct StateKeyHash
{
  std::size_t operator()(const StateKey& k) const
  {
    std::uint64_t h = static_cast<std::uint64_t>(k.time) * 0x9E3779B97F4A7C15ull;
    h ^= (static_cast<std::uint64_t>(k.node) << 5) ^ (static_cast<std::uint64_t>(k.vp) << 1)
      ^ static_cast<std::uint64_t>(k.backward);
    h *= 0xBF58476D1CE4E5B9ull;
    return static_cast<std::size_t>(h ^ (h >> 31));
  }
};

} // namespace detail

//==============================================================================
/// Walk the predecessor links from `terminal` and emit timed steps.
inline SearchResult reconstruct(
  const RoutingMultiGraph& g, std::span<const detail::Label> labels, int terminal,
  std::span<const ViaPoint> vias)
{
  SearchResult r;
  std::vector<int> chain;
  for (int i = terminal; i >= 0; i = labels[i].parent)
    chain.push_back(i);
  std::reverse(chain.begin(), chain.end());

  const int k = static_cast<int>(vias.size());
  const auto yaw_of = [&](const detail::Label& l) {
    return g.node(l.node).is_direction() ? g.yaw(l.node, l.backward)
                                         : vias[0].out_yaw.value_or(0.0);
  };
  bool split_set = k < 2 || k - 2 == 0;
  r.via_arrival.assign(k, labels[chain.front()].tau);
  r.via_departure.assign(k, labels[chain.front()].tau);
  for (std::size_t c = 1; c < chain.size(); ++c)
  {
    const auto& prev = labels[chain[c - 1]];
    const auto& cur = labels[chain[c]];
    const bool loaded = vias[prev.vp].loaded_out;
    const int base = g.node(prev.node).base;
    if (cur.arc == -2)
    {
      r.via_arrival[cur.vp] = prev.tau;
      r.via_departure[cur.vp] = cur.tau;
      if (cur.tau > prev.tau)
        r.steps.push_back({StepKind::action, -1, base, prev.tau, cur.tau, loaded, false, yaw_of(prev)});
      if (cur.vp == k - 2)
      {
        r.split = r.steps.size();
        r.split_time = cur.tau;
        split_set = true;
      }
      continue;
    }
    const auto& arc = g.arc(cur.arc);
    if (arc.kind == ArcKind::wait_loop)
    {
      auto& last = r.steps;
      if (!last.empty() && last.back().kind == StepKind::wait && last.back().node == base
          && last.back().t1 == prev.tau)
        last.back().t1 = cur.tau;
      else
        r.steps.push_back({StepKind::wait, -1, base, prev.tau, cur.tau, loaded, false, yaw_of(prev)});
      continue;
    }
    if (cur.tau == prev.tau)
      continue;
    r.steps.push_back({StepKind::move, cur.arc, base, prev.tau, cur.tau, loaded, prev.backward, yaw_of(prev)});
  }
  if (!split_set)
    r.split = r.steps.size();
  if (k < 2 || k - 2 == 0)
    r.split_time = labels[chain.front()].tau;

  const auto& last = labels[terminal];
  r.feasible = true;
  r.arrival = last.tau;
  r.end = last.tau;
  r.via_arrival[k - 1] = last.tau;
  r.via_departure[k - 1] = last.tau;
  r.end_pose = {g.node(last.node).base, yaw_of(last)};
  r.moving = last.moved;
  return r;
}

//==============================================================================
/// Earliest arrival through `vias` in order, starting at `start`, avoiding
/// every claim in `table` that belongs to another robot.
inline SearchResult vp_star(
  const HeuristicTable& heuristic, const SweepCache& sweeps, const ReservationTable& table,
  int robot, std::span<const ViaPoint> vias, Time start, const SearchOptions& opt = {})
{
  using clock = std::chrono::steady_clock;
  const auto t_begin = clock::now();
  const auto& g = heuristic.graph();
  const int k = static_cast<int>(vias.size());
  SearchResult fail;
  const auto finish = [&](SearchResult r) {
    r.stats.wall_time = std::chrono::duration<double>(clock::now() - t_begin).count();
    return r;
  };
  if (k == 0)
    return finish(fail);

  const auto stay_for = [&](int vp) {
    return vp == k - 1 && opt.hold_at_goal ? kForever : vias[vp].action;
  };

  if (k == 1)
  {
    const auto& v = vias[0];
    const double yaw = v.out_yaw.value_or(0.0);
    if (!can_stay(table, sweeps, robot, g.position(v.node), yaw, start, stay_for(0)))
      return finish(fail);
    SearchResult r;
    r.feasible = true;
    r.arrival = r.end = r.split_time = start;
    r.end_pose = {v.node, yaw};
    if (v.action.count() > 0)
    {
      r.steps.push_back({StepKind::action, -1, v.node, start, start + v.action, v.loaded_out, false, yaw});
      r.end = start + v.action;
    }
    r.via_arrival = {start};
    r.via_departure = {r.end};
    return finish(r);
  }

  const ViaHeuristic hbar(heuristic, vias, opt.oriented_heuristic);
  const Time static_after = table.static_after();
  const std::int64_t static_key = std::numeric_limits<std::int64_t>::min();

  std::vector<detail::Label> labels;
  std::priority_queue<detail::QueueItem, std::vector<detail::QueueItem>, std::greater<>> queue;
  std::unordered_set<detail::StateKey, detail::StateKeyHash> seen;
  std::unordered_map<detail::StateKey, Time, detail::StateKeyHash> static_best;
  // Two criteria: pushed (arrival, move) pairs per state and bucket.
  std::unordered_map<detail::StateKey, std::vector<detail::FrontEntry>, detail::StateKeyHash> pareto;
  std::vector<char> superseded;
  std::uint64_t seq = 0;
  SearchStats stats;

  std::optional<int> best;
  Time best_tau = kForever;
  std::int64_t best_bucket = std::numeric_limits<std::int64_t>::max();
  Duration best_move = kForever;

  const auto bucket_of = [&](Time t) { return t.count() / opt.bucket.count(); };
  // Bucket-wide dominance is a speed-up that can cost the optimum, so an
  // exhaustive search keeps exact instants.
  const bool coarse = opt.two_criteria && opt.first_solution;

  const auto bound = [&](const detail::Label& l) {
    return hbar(l.node, l.backward, l.vp);
  };

  // Returns false when the state is dominated or pruned.
  const auto admit = [&](const detail::Label& l, Duration h) {
    if (h == kForever)
      return false;
    const Time f = l.tau + h;
    if (!opt.two_criteria)
    {
      if (best && f > best_tau)
        return false;
      if (l.tau >= static_after)
      {
        const detail::StateKey key{l.node, l.vp, l.backward, static_key};
        auto [it, fresh] = static_best.try_emplace(key, l.tau);
        if (!fresh)
        {
          if (it->second <= l.tau)
            return false;
          it->second = l.tau;
        }
        return true;
      }
      return seen.insert({l.node, l.vp, l.backward, l.tau.count()}).second;
    }

    const Duration move_lb = l.moved + (h - hbar.actions_after(l.vp));
    if (best)
    {
      const auto b = bucket_of(f);
      if (b > best_bucket || (b == best_bucket && move_lb >= best_move))
        return false;
    }
    // States compare Pareto on (arrival, move time) within one arrival
    // bucket when stopping at the first solution, or at one exact instant
    // when searching exhaustively; once the table is static time no longer
    // matters.
    const std::int64_t slot = l.tau >= static_after ? static_key : coarse ? bucket_of(l.tau) : l.tau.count();
    auto& front = pareto[{l.node, l.vp, l.backward, slot}];
    for (const auto& p : front)
    {
      if (p.moved <= l.moved && p.tau <= l.tau)
        return false;
    }
    std::erase_if(front, [&](const auto& p) {
      if (p.tau < l.tau || p.moved < l.moved)
        return false;
      superseded[p.label] = 1;
      return true;
    });
    front.push_back({l.tau, l.moved, static_cast<int>(labels.size())});
    return true;
  };

  const auto push = [&](detail::Label l) {
    const Duration h = bound(l);
    if (!admit(l, h))
      return;
    const int id = static_cast<int>(labels.size());
    labels.push_back(l);
    superseded.push_back(0);
    Duration hs = l.tau + h;
    if (opt.penalty)
      hs += penalty(l.vp, k, opt.penalty_unit);
    queue.push({hs, k - 1 - l.vp, opt.two_criteria ? l.moved : Duration{0}, l.node, seq++, id});
    ++stats.pushed;
  };

  const auto matches = [&](int node, bool backward, const ViaPoint& v) {
    const auto& n = g.node(node);
    if (!n.is_direction() || n.base != v.node)
      return false;
    return !v.in_yaw || same_angle(g.yaw(node, backward), *v.in_yaw, 1e-3);
  };

  push({-1, -1, g.start_node(vias[0].node), false, 0, start, Duration{0}});

  while (!queue.empty())
  {
    const auto item = queue.top();
    queue.pop();
    const detail::Label cur = labels[item.label];

    // Stale or no longer useful.
    if (!opt.two_criteria)
    {
      if (best && cur.tau + bound(cur) > best_tau)
        continue;
      if (cur.tau >= static_after)
      {
        const auto it = static_best.find({cur.node, cur.vp, cur.backward, static_key});
        if (it != static_best.end() && it->second < cur.tau)
          continue;
      }
    }
    else if (superseded[item.label])
    {
      continue;
    }
    else if (best)
    {
      const Duration h = bound(cur);
      const auto b = bucket_of(cur.tau + h);
      if (b > best_bucket || (b == best_bucket && cur.moved + (h - hbar.actions_after(cur.vp)) >= best_move))
        continue;
    }

    if (++stats.visited > opt.max_expansions)
    {
      fail.aborted = true;
      break;
    }

    const bool loaded = vias[cur.vp].loaded_out;
    const auto& next = vias[cur.vp + 1];
    if (matches(cur.node, cur.backward, next))
    {
      const int nvp = cur.vp + 1;
      const double yaw = g.yaw(cur.node, cur.backward);
      if (can_stay(table, sweeps, robot, g.position(next.node), yaw, cur.tau, stay_for(nvp)))
      {
        if (nvp == k - 1)
        {
          const bool better = opt.two_criteria
            ? (!best || bucket_of(cur.tau) < best_bucket
               || (bucket_of(cur.tau) == best_bucket && cur.moved < best_move))
            : (!best || cur.tau < best_tau);
          if (better)
          {
            best = item.label;
            best_tau = cur.tau;
            best_bucket = bucket_of(cur.tau);
            best_move = cur.moved;
          }
          if (opt.first_solution)
            break;
          continue;
        }
        push({item.label, -2, cur.node, cur.backward, nvp, cur.tau + next.action, cur.moved});
      }
    }

    const auto& node = g.node(cur.node);
    for (int ai : g.out_arcs(cur.node))
    {
      const auto& a = g.arc(ai);
      if (a.kind == ArcKind::stop_link)
        continue;
      if (a.kind == ArcKind::wait_loop && cur.tau >= static_after)
        continue;
      if (node.kind == RoutingNodeKind::start)
      {
        if (!vias[0].out_yaw)
        {
          push({item.label, ai, a.to, false, cur.vp, cur.tau, cur.moved});
          push({item.label, ai, a.to, true, cur.vp, cur.tau, cur.moved});
        }
        else if (const auto o = g.orientation_for(a.to, *vias[0].out_yaw))
          push({item.label, ai, a.to, *o, cur.vp, cur.tau, cur.moved});
        continue;
      }
      const Duration d = a.duration[loaded ? 1 : 0];
      if (coarse && a.kind == ArcKind::wait_loop)
      {
        // A wait that stays in the current bucket is dominated by not
        // waiting, so waits run on into the next bucket.
        Time t = cur.tau;
        bool free = true;
        while (free && bucket_of(t) == bucket_of(cur.tau))
        {
          free = arc_is_free(table, sweeps, robot, ai, cur.backward, loaded, t);
          t += d;
        }
        if (free)
          push({item.label, ai, a.to, cur.backward, cur.vp, t, cur.moved});
        continue;
      }
      if (d.count() > 0 && !arc_is_free(table, sweeps, robot, ai, cur.backward, loaded, cur.tau))
        continue;
      const bool back = a.flips_orientation ? !cur.backward : cur.backward;
      push({item.label, ai, a.to, back, cur.vp, cur.tau + d,
            a.is_motion() ? cur.moved + d : cur.moved});
    }
  }

  if (!best)
  {
    fail.stats = stats;
    return finish(fail);
  }
  SearchResult r = reconstruct(g, labels, *best, vias);
  const auto& last = vias[k - 1];
  if (!opt.hold_at_goal && last.action.count() > 0)
  {
    r.steps.push_back({StepKind::action, -1, last.node, r.arrival, r.arrival + last.action,
                       vias[k - 2].loaded_out, false, r.end_pose.yaw});
    r.end = r.arrival + last.action;
  }
  r.via_departure.back() = r.end;
  r.stats = stats;
  return finish(r);
}

} // namespace wmapf

#endif // WMAPF__VPSTAR_HPP
