#ifndef WMAPF__TIME_HPP
#define WMAPF__TIME_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>

namespace wmapf {

// All planner times are integer microseconds measured from the start of the
// planning iteration. Integer arithmetic keeps reservation bucketing and
// duplicate detection exact across platforms.
using Duration = std::chrono::microseconds;
using Time = Duration;

inline constexpr Duration kForever = Duration::max();

inline Duration from_seconds(double s)
{
  return Duration(static_cast<std::int64_t>(std::llround(s * 1e6)));
}

inline double to_seconds(Duration d)
{
  if (d == kForever)
    return std::numeric_limits<double>::infinity();
  return static_cast<double>(d.count()) * 1e-6;
}

/// Round a non-negative duration up to the next multiple of `tick`.
/// A zero tick leaves the value untouched.
inline Duration ceil_to(Duration d, Duration tick)
{
  if (tick.count() <= 0 || d == kForever)
    return d;
  const auto q = (d.count() + tick.count() - 1) / tick.count();
  return Duration(q * tick.count());
}

/// Seconds rounded up to whole microseconds so that stored durations never
/// undercut the continuous value they stand for.
inline Duration ceil_seconds(double s)
{
  return Duration(static_cast<std::int64_t>(std::ceil(s * 1e6 - 1e-6)));
}

inline Duration saturating_add(Duration a, Duration b)
{
  if (a == kForever || b == kForever)
    return kForever;
  return a + b;
}

} // namespace wmapf

#endif // WMAPF__TIME_HPP
