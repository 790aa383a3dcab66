#ifndef WMAPF__METRICS_HPP
#define WMAPF__METRICS_HPP

#include <wmapf/ipp.hpp>
#include <wmapf/time.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace wmapf {

/// Latest task completion, in minutes.
inline double makespan_minutes(std::span<const TaskRecord> tasks)
{
  Time end{0};
  for (const auto& t : tasks)
    end = std::max(end, t.delivery_end);
  return to_seconds(end) / 60.0;
}

inline double makespan_minutes(const Plan& plan) { return makespan_minutes(plan.tasks); }

/// Excess of actual over collision-free task processing time, summed over
/// tasks, in percent.
inline double regret_percent(std::span<const TaskRecord> tasks)
{
  double actual = 0.0, ideal = 0.0;
  for (const auto& t : tasks)
  {
    actual += to_seconds(t.actual());
    ideal += to_seconds(t.ideal);
  }
  return ideal > 0.0 ? 100.0 * (actual / ideal - 1.0) : 0.0;
}

struct Quartiles
{
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
};

/// Linear interpolation between order statistics (R type 7). Infinite
/// samples (runs that never failed) are allowed.
inline double quantile(std::vector<double> v, double p)
{
  if (v.empty())
    throw ModelError("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double w = h - static_cast<double>(lo);
  if (v[lo] == v[hi] || w == 0.0)
    return v[lo];
  return std::isinf(v[hi]) ? v[hi] : v[lo] + w * (v[hi] - v[lo]);
}

inline Quartiles quartiles(const std::vector<double>& v)
{
  return {quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)};
}

inline double median(const std::vector<double>& v) { return quantile(v, 0.5); }

//==============================================================================
struct InstanceReport
{
  std::string instance;
  int robots = 0;
  bool feasible = false;
  double makespan = 0.0;  // minutes
  double regret = 0.0;    // percent
  double wall_time = 0.0; // seconds
  std::uint64_t visited = 0;
  std::optional<double> time_to_failure;  // minutes; infinity when none occurred
};

inline InstanceReport report_of(const std::string& name, const Plan& plan)
{
  InstanceReport r;
  r.instance = name;
  r.robots = static_cast<int>(plan.paths.size());
  r.feasible = plan.feasible;
  r.makespan = makespan_minutes(plan);
  r.regret = regret_percent(plan.tasks);
  r.wall_time = plan.wall_time;
  r.visited = plan.visited;
  return r;
}

inline const char* kReportColumns = "instance,robots,feasible,makespan_min,regret_pct,wall_time_s,visited,ttf_min";

/// One row per instance, then Q1/Q2/Q3 rows over the feasible ones.
inline void write_csv(std::ostream& os, std::span<const InstanceReport> rows)
{
  const auto num = [&](double x) {
    if (std::isinf(x))
      os << "inf";
    else
      os << std::setprecision(6) << x;
  };
  os << kReportColumns << '\n';
  for (const auto& r : rows)
  {
    os << r.instance << ',' << r.robots << ',' << (r.feasible ? 1 : 0) << ',';
    num(r.makespan);
    os << ',';
    num(r.regret);
    os << ',';
    num(r.wall_time);
    os << ',' << r.visited << ',';
    if (r.time_to_failure)
      num(*r.time_to_failure);
    os << '\n';
  }

  std::vector<double> mk, rg, wt, vs, ttf;
  for (const auto& r : rows)
  {
    if (!r.feasible)
      continue;
    mk.push_back(r.makespan);
    rg.push_back(r.regret);
    wt.push_back(r.wall_time);
    vs.push_back(static_cast<double>(r.visited));
    if (r.time_to_failure)
      ttf.push_back(*r.time_to_failure);
  }
  if (mk.empty())
    return;
  const double ps[] = {0.25, 0.5, 0.75};
  const char* names[] = {"Q1", "Q2", "Q3"};
  for (int i = 0; i < 3; ++i)
  {
    os << names[i] << ",," << ',';
    num(quantile(mk, ps[i]));
    os << ',';
    num(quantile(rg, ps[i]));
    os << ',';
    num(quantile(wt, ps[i]));
    os << ',';
    num(quantile(vs, ps[i]));
    os << ',';
    if (!ttf.empty())
      num(quantile(ttf, ps[i]));
    os << '\n';
  }
}

} // namespace wmapf

#endif // WMAPF__METRICS_HPP
