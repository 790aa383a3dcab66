#ifndef WMAPF__KINEMATICS_HPP
#define WMAPF__KINEMATICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wmapf {

//==============================================================================
class KinematicsError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

/// Acceleration bounds for one load state.
struct LoadLimits
{
  double accel = 0.5;
  double decel = 0.5;
  double angular_accel = 0.5;
  double angular_decel = 0.5;

  bool operator==(const LoadLimits&) const = default;
};

/// Speed and rate limits along one axis (linear or angular) for one load state.
struct AxisLimits
{
  double max_speed = 0.0;
  double accel = 0.0;
  double decel = 0.0;
};

struct KinematicLimits
{
  double max_speed = 0.2;          // m/s
  double max_angular_speed = 0.2;  // rad/s
  LoadLimits unloaded{0.5, 0.5, 0.5, 0.5};
  LoadLimits loaded{0.25, 0.25, 0.25, 0.25};

  bool operator==(const KinematicLimits&) const = default;

  const LoadLimits& for_load(bool is_loaded) const
  {
    return is_loaded ? loaded : unloaded;
  }

  AxisLimits linear(bool is_loaded) const
  {
    const auto& l = for_load(is_loaded);
    return {max_speed, l.accel, l.decel};
  }

  AxisLimits angular(bool is_loaded) const
  {
    const auto& l = for_load(is_loaded);
    return {max_angular_speed, l.angular_accel, l.angular_decel};
  }

  void validate() const
  {
    const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    for (const auto* l : {&unloaded, &loaded})
    {
      if (!positive(l->accel) || !positive(l->decel)
          || !positive(l->angular_accel) || !positive(l->angular_decel))
        throw KinematicsError("kinematic limits: accelerations must be positive");
    }
    if (!positive(max_speed) || !positive(max_angular_speed))
      throw KinematicsError("kinematic limits: speeds must be positive");
    if (loaded.accel > unloaded.accel || loaded.decel > unloaded.decel
        || loaded.angular_accel > unloaded.angular_accel
        || loaded.angular_decel > unloaded.angular_decel)
      throw KinematicsError(
        "kinematic limits: loaded accelerations must not exceed unloaded ones");
  }
};

struct ProfileState
{
  double distance = 0.0;
  double speed = 0.0;
};

//==============================================================================
/// Time-optimal accelerate / cruise / decelerate profile along one axis.
/// The same type describes linear segments (meters) and in-place turns
/// (radians). constant_speed() builds the ramp-free profile used by the
/// no-inertia baselines.
class MotionProfile
{
public:
  MotionProfile() = default;

  double distance() const { return _distance; }
  double initial_speed() const { return _v0; }
  double peak_speed() const { return _peak; }
  double final_speed() const { return _v1; }
  double accel_time() const { return _t_acc; }
  double cruise_time() const { return _t_cruise; }
  double decel_time() const { return _t_dec; }
  double duration() const { return _t_acc + _t_cruise + _t_dec; }

  ProfileState state_at(double t) const
  {
    const double total = duration();
    if (t < -1e-9 || t > total + 1e-9)
    {
      std::ostringstream msg;
      msg << "state_at: t=" << t << " outside [0, " << total << "]";
      throw std::out_of_range(msg.str());
    }
    t = std::clamp(t, 0.0, total);
    if (t >= total)
      return {_distance, _v1};

    if (t < _t_acc)
    {
      const double a = (_peak - _v0) / _t_acc;
      return {_v0 * t + 0.5 * a * t * t, _v0 + a * t};
    }
    const double d_acc = 0.5 * (_v0 + _peak) * _t_acc;
    t -= _t_acc;
    if (t < _t_cruise)
      return {d_acc + _peak * t, _peak};

    t -= _t_cruise;
    const double d = d_acc + _peak * _t_cruise;
    const double a = (_peak - _v1) / _t_dec;
    const double s = std::min(_distance, d + _peak * t - 0.5 * a * t * t);
    return {s, _peak - a * t};
  }

  /// Constant speed over `total` seconds; no ramps.
  static MotionProfile constant_speed(double distance, double total)
  {
    MotionProfile p;
    p._distance = distance;
    if (distance <= 0.0 || total <= 0.0)
    {
      p._t_cruise = std::max(0.0, total);
      return p;
    }
    p._peak = distance / total;
    p._v0 = p._v1 = p._peak;
    p._t_cruise = total;
    return p;
  }

  friend MotionProfile segment_time(double, double, double, double, const AxisLimits&);

private:
  double _distance = 0.0;
  double _v0 = 0.0;
  double _peak = 0.0;
  double _v1 = 0.0;
  double _t_acc = 0.0;
  double _t_cruise = 0.0;
  double _t_dec = 0.0;
};

//==============================================================================
/// Shortest time to cover `d` starting at `v_i`, never exceeding `V`, and
/// finishing no faster than `V_f`. The robot always accelerates or decelerates
/// at its limit toward the desired speed.
inline MotionProfile segment_time(
  double d, double v_i, double V, double V_f, const AxisLimits& lim)
{
  if (!(d >= 0.0) || !(v_i >= 0.0) || !(V > 0.0) || !(V_f >= 0.0)
      || v_i > V + 1e-12 || V_f > V + 1e-12)
  {
    std::ostringstream msg;
    msg << "segment_time: invalid arguments d=" << d << " v_i=" << v_i
        << " V=" << V << " V_f=" << V_f;
    throw KinematicsError(msg.str());
  }

  const double a = lim.accel;
  const double b = lim.decel;
  MotionProfile p;
  p._distance = d;
  p._v0 = v_i;

  // Cannot shed enough speed before the end of the segment.
  const double stop_sq = v_i * v_i - 2.0 * b * d;
  if (stop_sq > V_f * V_f + 1e-12)
  {
    std::ostringstream msg;
    msg << "segment_time: cannot decelerate from " << v_i << " to " << V_f
        << " within " << d << " (short by "
        << (v_i * v_i - V_f * V_f) / (2.0 * b) - d << " m)";
    throw KinematicsError(msg.str());
  }

  if (d == 0.0)
  {
    p._peak = p._v1 = v_i;
    return p;
  }

  // Highest reachable terminal speed.
  const double v_f = std::min(V_f, std::sqrt(v_i * v_i + 2.0 * a * d));
  double peak = std::sqrt(
    (2.0 * a * b * d + b * v_i * v_i + a * v_f * v_f) / (a + b));
  peak = std::min(peak, V);
  peak = std::max({peak, v_i, v_f});

  p._peak = peak;
  p._v1 = v_f;
  p._t_acc = (peak - v_i) / a;
  p._t_dec = (peak - v_f) / b;
  const double d_ramps = (peak * peak - v_i * v_i) / (2.0 * a)
    + (peak * peak - v_f * v_f) / (2.0 * b);
  p._t_cruise = std::max(0.0, (d - d_ramps) / peak);
  return p;
}

inline MotionProfile segment_time(
  double d, double v_i, double V, double V_f,
  const KinematicLimits& limits, bool loaded)
{
  const auto axis = limits.linear(loaded);
  const double cap = std::min(V, axis.max_speed);
  return segment_time(d, v_i, cap, std::min(V_f, cap), axis);
}

/// Rest-to-rest rotation in place by `angle` radians.
inline MotionProfile turn_time(double angle, const KinematicLimits& limits, bool loaded)
{
  if (!(angle >= 0.0))
    throw KinematicsError("turn_time: angle must be non-negative");
  const auto axis = limits.angular(loaded);
  return segment_time(angle, 0.0, axis.max_speed, 0.0, axis);
}

} // namespace wmapf

#endif // WMAPF__KINEMATICS_HPP
