#ifndef WMAPF__GEOMETRY_HPP
#define WMAPF__GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace wmapf {

struct Vec2
{
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

inline Vec2 rotate(Vec2 v, double angle)
{
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Wrap an angle into (-pi, pi].
inline double wrap_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi)
    a += two_pi;
  else if (a > std::numbers::pi)
    a -= two_pi;
  return a;
}

inline bool same_angle(double a, double b, double tol = 1e-6)
{
  return std::abs(wrap_angle(a - b)) <= tol;
}

inline double heading_of(Vec2 from, Vec2 to)
{
  return std::atan2(to.y - from.y, to.x - from.x);
}

struct Aabb
{
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  bool overlaps(const Aabb& o) const
  {
    return !(max_x < o.min_x || o.max_x < min_x
             || max_y < o.min_y || o.max_y < min_y);
  }
};

/// Convex polygon, counter-clockwise vertex order.
using Polygon = std::vector<Vec2>;

inline Aabb bounding_box(std::span<const Vec2> pts)
{
  Aabb box{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
  for (const auto& p : pts)
  {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

inline double signed_area(std::span<const Vec2> poly)
{
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i)
    a += poly[i].cross(poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

/// Andrew's monotone chain. Collinear points are dropped.
inline Polygon convex_hull(std::vector<Vec2> pts)
{
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3)
    return pts;

  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  const auto turn = [](Vec2 o, Vec2 a, Vec2 b) { return (a - o).cross(b - o); };
  for (const auto& p : pts)
  {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= 0)
      --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;)
  {
    while (k >= lower && turn(hull[k - 2], hull[k - 1], pts[i]) <= 0)
      --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

/// Place a robot-frame polygon at `xy` with heading `yaw`.
inline Polygon transform(std::span<const Vec2> shape, Vec2 xy, double yaw)
{
  Polygon out;
  out.reserve(shape.size());
  for (const auto& p : shape)
    out.push_back(xy + rotate(p, yaw));
  return out;
}

/// Minkowski sum with the axis-aligned square [-r, r]^2. The result contains
/// every point within distance r of the input.
inline Polygon dilate(std::span<const Vec2> poly, double r)
{
  if (r <= 0.0)
    return Polygon(poly.begin(), poly.end());
  std::vector<Vec2> pts;
  pts.reserve(4 * poly.size());
  for (const auto& p : poly)
  {
    pts.push_back({p.x - r, p.y - r});
    pts.push_back({p.x + r, p.y - r});
    pts.push_back({p.x + r, p.y + r});
    pts.push_back({p.x - r, p.y + r});
  }
  return convex_hull(std::move(pts));
}

/// Move every edge of a convex CCW polygon outward by `d` (mitered offset).
inline Polygon offset(std::span<const Vec2> poly, double d)
{
  const std::size_t n = poly.size();
  if (d == 0.0 || n < 3)
    return Polygon(poly.begin(), poly.end());
  Polygon out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    const Vec2 prev = poly[(i + n - 1) % n];
    const Vec2 cur = poly[i];
    const Vec2 next = poly[(i + 1) % n];
    const Vec2 e0 = cur - prev;
    const Vec2 e1 = next - cur;
    const Vec2 n0 = Vec2{e0.y, -e0.x} * (1.0 / e0.norm());
    const Vec2 n1 = Vec2{e1.y, -e1.x} * (1.0 / e1.norm());
    const Vec2 bis = n0 + n1;
    const double scale = d / (1.0 + n0.dot(n1)) ;
    out.push_back(cur + bis * scale);
  }
  return out;
}

namespace detail {

inline void project(std::span<const Vec2> poly, Vec2 axis, double& lo, double& hi)
{
  lo = hi = poly[0].dot(axis);
  for (const auto& p : poly)
  {
    const double v = p.dot(axis);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
}

inline bool separated_along_edges(std::span<const Vec2> a, std::span<const Vec2> b)
{
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    const Vec2 e = a[(i + 1) % a.size()] - a[i];
    const Vec2 axis{-e.y, e.x};
    double lo_a, hi_a, lo_b, hi_b;
    project(a, axis, lo_a, hi_a);
    project(b, axis, lo_b, hi_b);
    if (hi_a < lo_b || hi_b < lo_a)
      return true;
  }
  return false;
}

} // namespace detail

/// Separating-axis test for convex polygons. Touching boundaries count as an
/// intersection.
inline bool intersects(std::span<const Vec2> a, std::span<const Vec2> b)
{
  if (a.empty() || b.empty())
    return false;
  if (a.size() == 1 && b.size() == 1)
    return a[0] == b[0];
  if (a.size() >= 2 && detail::separated_along_edges(a, b))
    return false;
  if (b.size() >= 2 && detail::separated_along_edges(b, a))
    return false;
  return true;
}

/// Largest distance from the origin to a vertex.
inline double radius(std::span<const Vec2> shape)
{
  double r = 0.0;
  for (const auto& p : shape)
    r = std::max(r, p.norm());
  return r;
}

inline bool is_convex_ccw(std::span<const Vec2> poly)
{
  if (poly.size() < 3)
    return false;
  for (std::size_t i = 0; i < poly.size(); ++i)
  {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    const Vec2 c = poly[(i + 2) % poly.size()];
    if ((b - a).cross(c - b) < -1e-12)
      return false;
  }
  return signed_area(poly) > 1e-12;
}

} // namespace wmapf

#endif // WMAPF__GEOMETRY_HPP
