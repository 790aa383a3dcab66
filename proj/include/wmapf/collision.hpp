#ifndef WMAPF__COLLISION_HPP
#define WMAPF__COLLISION_HPP

#include <wmapf/geometry.hpp>
#include <wmapf/routing_graph.hpp>
#include <wmapf/time.hpp>
#include <wmapf/warehouse.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <span>
#include <vector>

namespace wmapf {

//==============================================================================
struct Configuration
{
  Time tau{0};
  Vec2 xy;
  double yaw = 0.0;
  double speed = 0.0;
  double angular_speed = 0.0;
  bool loaded = false;
};

inline Polygon footprint(std::span<const Vec2> padded_shape, Vec2 xy, double yaw)
{
  return transform(padded_shape, xy, yaw);
}

inline Polygon footprint(const AgentSpec& spec, const Configuration& c)
{
  return transform(spec.padded_footprint(), c.xy, c.yaw);
}

/// Space claimed by one robot over [t0, t1). An open-ended claim has
/// t1 == kForever.
struct OccupancyRecord
{
  int robot = -1;
  Time t0{0};
  Time t1{0};
  Polygon region;
  Aabb box;
  bool provisional = false;

  OccupancyRecord() = default;

  OccupancyRecord(int robot_, Time t0_, Time t1_, Polygon region_, bool provisional_ = false)
  : robot(robot_), t0(t0_), t1(t1_), region(std::move(region_)),
    box(bounding_box(region)), provisional(provisional_)
  {
  }

  bool open_ended() const { return t1 == kForever; }
};

/// Interval test with a symmetric margin; intervals are half-open.
inline bool overlaps_in_time(Time a0, Time a1, Time b0, Time b1, Duration margin)
{
  const Time hi = b1 == kForever ? kForever : b1 + margin;
  const Time lo = b0 - margin;
  return a0 < hi && (a1 == kForever || lo < a1);
}

//==============================================================================
class ReservationTable
{
public:
  explicit ReservationTable(Duration margin = Duration{0},
                            Duration bucket = std::chrono::seconds(1))
  : _margin(margin), _bucket(bucket)
  {
  }

  Duration margin() const { return _margin; }
  Duration bucket() const { return _bucket; }
  std::size_t size() const { return _live; }

  void reserve(OccupancyRecord r)
  {
    const int id = static_cast<int>(_records.size());
    const std::size_t b0 = bucket_of(r.t0);
    if (r.open_ended())
      _persistent.push_back(id);
    else
    {
      const std::size_t b1 = bucket_of(r.t1 - Duration{1});
      if (_buckets.size() <= b1)
        _buckets.resize(b1 + 1);
      for (std::size_t b = b0; b <= b1; ++b)
        _buckets[b].push_back(id);
    }
    _records.push_back(std::move(r));
    _alive.push_back(1);
    ++_live;
    _static_dirty = true;
  }

  void reserve(std::span<const OccupancyRecord> records)
  {
    for (const auto& r : records)
      reserve(r);
  }

  /// Drop every record of a robot.
  void release(int robot)
  {
    release_if([robot](const OccupancyRecord& r) { return r.robot == robot; });
  }

  /// Drop only the provisional records of a robot.
  void release_provisional(int robot)
  {
    release_if([robot](const OccupancyRecord& r) {
      return r.robot == robot && r.provisional;
    });
  }

  void commit(int robot)
  {
    for (std::size_t i = 0; i < _records.size(); ++i)
      if (_alive[i] && _records[i].robot == robot)
        _records[i].provisional = false;
  }

  /// True if `region` over [t0, t1) meets a record of any other robot.
  bool collides(int robot, Time t0, Time t1, std::span<const Vec2> region, const Aabb& box) const
  {
    const auto hit = [&](int id) {
      const auto& r = _records[id];
      return _alive[id] && r.robot != robot
        && overlaps_in_time(t0, t1, r.t0, r.t1, _margin)
        && r.box.overlaps(box) && intersects(region, r.region);
    };
    for (int id : _persistent)
      if (hit(id))
        return true;
    if (_buckets.empty())
      return false;
    const Time lo = t0 - _margin;
    const std::size_t b0 = bucket_of(lo);
    if (b0 >= _buckets.size())
      return false;
    std::size_t b1 = _buckets.size() - 1;
    if (t1 != kForever)
      b1 = std::min(b1, bucket_of(t1 + _margin));
    for (std::size_t b = b0; b <= b1; ++b)
      for (int id : _buckets[b])
        if (hit(id))
          return true;
    return false;
  }

  bool collides(const OccupancyRecord& candidate) const
  {
    return collides(candidate.robot, candidate.t0, candidate.t1, candidate.region, candidate.box);
  }

  bool collides(std::span<const OccupancyRecord> candidates) const
  {
    for (const auto& c : candidates)
      if (collides(c))
        return true;
    return false;
  }

  /// From this instant on, the table no longer changes with time for anyone
  /// (only open-ended claims remain in effect, margin included).
  Time static_after() const
  {
    if (_static_dirty)
    {
      Time t{0};
      for (std::size_t i = 0; i < _records.size(); ++i)
      {
        if (!_alive[i])
          continue;
        const auto& r = _records[i];
        t = std::max(t, r.open_ended() ? r.t0 : r.t1);
      }
      _static = t + _margin;
      _static_dirty = false;
    }
    return _static;
  }

  template<typename Fn>
  void for_each(Fn&& fn) const
  {
    for (std::size_t i = 0; i < _records.size(); ++i)
      if (_alive[i])
        fn(_records[i]);
  }

  json to_json() const
  {
    json out = json::array();
    for_each([&](const OccupancyRecord& r) {
      json poly = json::array();
      for (const auto& p : r.region)
        poly.push_back({p.x, p.y});
      out.push_back({{"robot", r.robot}, {"t0", to_seconds(r.t0)},
                     {"t1", r.open_ended() ? json(nullptr) : json(to_seconds(r.t1))},
                     {"provisional", r.provisional}, {"region", poly}});
    });
    return json{{"margin", to_seconds(_margin)}, {"bucket", to_seconds(_bucket)},
                {"records", out}};
  }

private:
  std::size_t bucket_of(Time t) const
  {
    if (t.count() <= 0)
      return 0;
    return static_cast<std::size_t>(t.count() / _bucket.count());
  }

  template<typename Pred>
  void release_if(Pred&& pred)
  {
    bool any = false;
    for (std::size_t i = 0; i < _records.size(); ++i)
    {
      if (_alive[i] && pred(_records[i]))
      {
        _alive[i] = 0;
        --_live;
        any = true;
      }
    }
    if (!any)
      return;
    const auto dead = [this](int id) { return !_alive[id]; };
    std::erase_if(_persistent, dead);
    for (auto& b : _buckets)
      std::erase_if(b, dead);
    _static_dirty = true;
  }

  Duration _margin;
  Duration _bucket;
  std::vector<OccupancyRecord> _records;
  std::vector<char> _alive;
  std::size_t _live = 0;
  std::vector<std::vector<int>> _buckets;
  std::vector<int> _persistent;
  mutable Time _static{0};
  mutable bool _static_dirty = true;
};

//==============================================================================
/// A piece of an arc sweep, with times relative to the arc's start.
struct SweptChunk
{
  Duration begin{0};
  Duration end{0};
  Polygon region;
  Aabb box;
};

/// Robot pose `t` into a traversal of `arc` entered in orientation `backward`.
struct Pose
{
  Vec2 xy;
  double yaw = 0.0;
};

inline Pose pose_on_arc(
  const RoutingMultiGraph& g, const RoutingArc& arc, bool backward,
  const MotionProfile& profile, double t)
{
  const double yaw0 = g.node(arc.from).is_direction() ? g.yaw(arc.from, backward) : 0.0;
  const double tp = std::clamp(t, 0.0, profile.duration());
  if (arc.is_translation())
  {
    const double s = arc.length > 0.0 ? profile.state_at(tp).distance / arc.length : 1.0;
    return {arc.origin + (arc.target - arc.origin) * s, yaw0};
  }
  if (arc.is_rotation())
  {
    const double a = profile.state_at(tp).distance;
    return {arc.origin, wrap_angle(yaw0 + (arc.rotation >= 0.0 ? a : -a))};
  }
  return {arc.origin, yaw0};
}

/// Conservative swept regions of a robot shape along every routing arc, cut
/// into chunks of `chunk` length. Each region is the hull of footprints
/// sampled every `sample`, grown by the largest displacement of any shape
/// point between consecutive samples. Filled lazily per (arc, orientation,
/// load); not thread safe.
class SweepCache
{
public:
  SweepCache(const RoutingMultiGraph& graph, Polygon padded_shape,
             Duration sample = std::chrono::milliseconds(100),
             Duration chunk = std::chrono::seconds(1))
  : _graph(&graph), _shape(std::move(padded_shape)), _radius(radius(_shape)),
    _sample(sample), _chunk(chunk), _cache(graph.arcs().size() * 4)
  {
  }

  const RoutingMultiGraph& graph() const { return *_graph; }
  const Polygon& shape() const { return _shape; }

  const std::vector<SweptChunk>& arc(int arc_id, bool backward, bool loaded) const
  {
    auto& slot = _cache[arc_id * 4 + (backward ? 2 : 0) + (loaded ? 1 : 0)];
    if (!slot)
      slot = sweep(_graph->arc(arc_id), backward, loaded);
    return *slot;
  }

  Polygon at(Vec2 xy, double yaw) const { return footprint(_shape, xy, yaw); }

private:
  std::vector<SweptChunk> sweep(const RoutingArc& a, bool backward, bool loaded) const
  {
    const Duration total = a.duration[loaded ? 1 : 0];
    const auto& profile = a.profile[loaded ? 1 : 0];
    std::vector<SweptChunk> out;
    for (Duration c0{0}; c0 < total; c0 += _chunk)
    {
      const Duration c1 = std::min(total, c0 + _chunk);
      std::vector<Vec2> pts;
      double grow = 0.0;
      std::optional<Pose> prev;
      for (Duration t = c0;; t += _sample)
      {
        t = std::min(t, c1);
        const Pose p = pose_on_arc(*_graph, a, backward, profile, to_seconds(t));
        for (const auto& v : footprint(_shape, p.xy, p.yaw))
          pts.push_back(v);
        if (prev)
        {
          const double moved = distance(prev->xy, p.xy)
            + std::abs(wrap_angle(p.yaw - prev->yaw)) * _radius;
          grow = std::max(grow, moved);
        }
        prev = p;
        if (t == c1)
          break;
      }
      SweptChunk ch;
      ch.begin = c0;
      ch.end = c1;
      ch.region = dilate(convex_hull(std::move(pts)), grow);
      ch.box = bounding_box(ch.region);
      out.push_back(std::move(ch));
    }
    return out;
  }

  const RoutingMultiGraph* _graph;
  Polygon _shape;
  double _radius;
  Duration _sample;
  Duration _chunk;
  mutable std::vector<std::optional<std::vector<SweptChunk>>> _cache;
};

/// Records for traversing `arc` from time `start`.
inline std::vector<OccupancyRecord> sweep_arc(
  const SweepCache& cache, int robot, int arc, bool backward, bool loaded, Time start,
  bool provisional = false)
{
  std::vector<OccupancyRecord> out;
  for (const auto& ch : cache.arc(arc, backward, loaded))
    out.emplace_back(robot, start + ch.begin, start + ch.end, ch.region, provisional);
  return out;
}

/// Whether traversing `arc` from `start` is free of other robots' claims.
inline bool arc_is_free(
  const ReservationTable& table, const SweepCache& cache, int robot, int arc,
  bool backward, bool loaded, Time start)
{
  for (const auto& ch : cache.arc(arc, backward, loaded))
    if (table.collides(robot, start + ch.begin, start + ch.end, ch.region, ch.box))
      return false;
  return true;
}

/// Whether the robot can stand still at `xy` with `yaw` over
/// [start, start + duration). A kForever duration asks for an open-ended stay.
inline bool can_stay(
  const ReservationTable& table, const SweepCache& cache, int robot, Vec2 xy, double yaw,
  Time start, Duration duration)
{
  if (duration.count() == 0)
    return true;
  const Polygon region = cache.at(xy, yaw);
  const Time end = duration == kForever ? kForever : start + duration;
  return !table.collides(robot, start, end, region, bounding_box(region));
}

/// The reservation table as one robot sees it, answering the questions of
/// `arc_is_free` and `can_stay` from per-region lists of blocked times. Each
/// swept chunk or standing pose is matched against the table once, through
/// a uniform grid; later queries are binary searches. The table must not
/// change while the index is in use.
class ConflictIndex
{
public:
  /// Queries must not start before `from`.
  ConflictIndex(const ReservationTable& table, const SweepCache& cache, int robot,
                Time from = Time{0}, double cell = 1.0)
  : _cache(&cache), _margin(table.margin()), _cell(cell),
    _arcs(cache.graph().arcs().size() * 4)
  {
    // Claims sharing a region (the same sweep chunk or standing pose at other
    // times) are tested against a query region only once.
    std::unordered_map<std::uint64_t, std::vector<int>> by_hash;
    table.for_each([&](const OccupancyRecord& r) {
      if (r.robot == robot)
        return;
      const Time hi = r.open_ended() ? kForever : r.t1 + _margin;
      if (hi <= from)
        return;
      const Blocked b{r.t0 - _margin, hi};
      auto& same = by_hash[hash(r.region)];
      for (int id : same)
        if (_regions[id].polygon == r.region)
        {
          _regions[id].times.push_back(b);
          return;
        }
      const int id = static_cast<int>(_regions.size());
      same.push_back(id);
      _regions.push_back({r.region, r.box, {b}});
      for_cells(r.box, [&](std::int64_t key) { _grid[key].push_back(id); });
    });
    _stamp.assign(_regions.size(), 0);
  }

  bool arc_is_free(int arc, bool backward, bool loaded, Time start) const
  {
    const auto& chunks = _cache->arc(arc, backward, loaded);
    auto& slot = _arcs[arc * 4 + (backward ? 2 : 0) + (loaded ? 1 : 0)];
    if (!slot)
    {
      slot.emplace();
      for (const auto& ch : chunks)
        slot->push_back(blocked(ch.region, ch.box));
    }
    for (std::size_t i = 0; i < chunks.size(); ++i)
      if (!free((*slot)[i], start + chunks[i].begin, start + chunks[i].end))
        return false;
    return true;
  }

  bool can_stay(Vec2 xy, double yaw, Time start, Duration duration) const
  {
    if (duration.count() == 0)
      return true;
    const auto key = std::make_tuple(std::llround(xy.x * 1e4), std::llround(xy.y * 1e4),
                                     std::llround(wrap_angle(yaw) * 1e6));
    auto it = _stays.find(key);
    if (it == _stays.end())
    {
      const Polygon region = _cache->at(xy, yaw);
      it = _stays.emplace(key, blocked(region, bounding_box(region))).first;
    }
    return free(it->second, start, duration == kForever ? kForever : start + duration);
  }

private:
  /// Open interval (lo, hi) of times a claim rules out, margin included.
  struct Blocked
  {
    Time lo;
    Time hi;
  };
  using Blocks = std::vector<Blocked>;

  struct Region
  {
    Polygon polygon;
    Aabb box;
    Blocks times;
  };

  static std::uint64_t hash(std::span<const Vec2> poly)
  {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& v : poly)
      for (double c : {v.x, v.y})
      {
        std::uint64_t bits;
        std::memcpy(&bits, &c, sizeof bits);
        h = (h ^ bits) * 0x100000001b3ull;
      }
    return h;
  }

  template<typename Fn>
  void for_cells(const Aabb& box, Fn&& fn) const
  {
    const auto x0 = static_cast<std::int64_t>(std::floor(box.min_x / _cell));
    const auto x1 = static_cast<std::int64_t>(std::floor(box.max_x / _cell));
    const auto y0 = static_cast<std::int64_t>(std::floor(box.min_y / _cell));
    const auto y1 = static_cast<std::int64_t>(std::floor(box.max_y / _cell));
    for (auto x = x0; x <= x1; ++x)
      for (auto y = y0; y <= y1; ++y)
        fn((x << 32) ^ (y & 0xffffffff));
  }

  Blocks blocked(std::span<const Vec2> region, const Aabb& box) const
  {
    ++_query;
    Blocks out;
    for_cells(box, [&](std::int64_t key) {
      const auto it = _grid.find(key);
      if (it == _grid.end())
        return;
      for (int id : it->second)
      {
        if (_stamp[id] == _query)
          continue;
        _stamp[id] = _query;
        const auto& r = _regions[id];
        if (r.box.overlaps(box) && intersects(region, r.polygon))
          out.insert(out.end(), r.times.begin(), r.times.end());
      }
    });
    std::sort(out.begin(), out.end(), [](const Blocked& a, const Blocked& b) { return a.lo < b.lo; });
    Blocks merged;
    for (const auto& b : out)
    {
      if (!merged.empty() && b.lo < merged.back().hi)
        merged.back().hi = std::max(merged.back().hi, b.hi);
      else
        merged.push_back(b);
    }
    return merged;
  }

  /// Whether [a0, a1) meets none of the blocked intervals.
  static bool free(const Blocks& blocks, Time a0, Time a1)
  {
    const auto it = std::partition_point(blocks.begin(), blocks.end(),
                                         [&](const Blocked& b) { return b.hi <= a0; });
    return it == blocks.end() || (a1 != kForever && a1 <= it->lo);
  }

  const SweepCache* _cache;
  Duration _margin;
  double _cell;
  std::vector<Region> _regions;
  std::unordered_map<std::int64_t, std::vector<int>> _grid;
  mutable std::vector<std::uint32_t> _stamp;
  mutable std::uint32_t _query = 0;
  mutable std::vector<std::optional<std::vector<Blocks>>> _arcs;
  mutable std::map<std::tuple<long long, long long, long long>, Blocks> _stays;
};

} // namespace wmapf

#endif // WMAPF__COLLISION_HPP
