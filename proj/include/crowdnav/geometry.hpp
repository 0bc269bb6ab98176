#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crowdnav {

/// Tolerance used for every degeneracy and orientation test, in meters.
inline constexpr double kGeomEps = 1e-9;

inline constexpr double kPi = 3.14159265358979323846;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {a.x * s, a.y * s}; }
  friend constexpr Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
  Point2& operator+=(Point2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
/// z-component of the 3D cross product; > 0 when b is counter-clockwise of a.
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
constexpr double squared_norm(Point2 a) { return dot(a, a); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline double bearing(Point2 from, Point2 to) { return std::atan2(to.y - from.y, to.x - from.x); }
inline Point2 unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }
inline Point2 rotate(Point2 p, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);
/// Normalizes an angle into [0, 2*pi).
double normalize_angle_positive(double theta);

struct Segment {
  Point2 a;
  Point2 b;
};

/// Five-vertex group space in the named order (left, center, right,
/// right offset, left offset). `outline` is the simple closed ring used for
/// distance queries and export; it equals the named vertices unless the raw
/// ring self-intersected and had to be repaired.
struct Pentagon {
  std::array<Point2, 5> vertices{};
  std::vector<Point2> outline;

  Point2 left() const { return vertices[0]; }
  Point2 center() const { return vertices[1]; }
  Point2 right() const { return vertices[2]; }
  Point2 right_offset() const { return vertices[3]; }
  Point2 left_offset() const { return vertices[4]; }
  bool repaired() const;
};

/// Counter-clockwise convex polygon. One or two vertices are allowed and
/// describe a point or a segment.
struct ConvexHullShape {
  std::vector<Point2> vertices;
};

/// Egg-shaped personal space. The radius at body-frame angle phi is
///   r_axis(phi) = base * (rear + (1 - rear + front_gain * speed / base) * max(0, cos phi))
///   r(phi)      = (1 - sin^2 phi) * r_axis(phi) + sin^2 phi * side_ratio * base
/// so the shape is a circle of `base_radius` at zero speed with unit ratios.
struct EggParams {
  double base_radius = 0.5;
  double front_gain = 0.4;
  double side_ratio = 0.9;
  double rear_ratio = 0.8;

  void validate() const;
};

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a point set spans half a turn or more around the observer.
class GroupSurroundsRobot : public std::runtime_error {
 public:
  GroupSurroundsRobot() : std::runtime_error("group surrounds robot") {}
};

double point_segment_distance(Point2 p, const Segment& seg);

/// True when `p` is strictly inside the closed ring (non-zero winding number).
bool point_in_polygon(Point2 p, std::span<const Point2> ring);

/// Distance from `p` to the region bounded by `ring`; 0 on the boundary or inside.
double point_polygon_distance(Point2 p, std::span<const Point2> ring);
double point_polygon_distance(Point2 p, const Pentagon& poly);
double point_polygon_distance(Point2 p, const ConvexHullShape& poly);

ConvexHullShape convex_hull(std::span<const Point2> points);

/// True if no two non-adjacent edges of the closed ring cross properly.
bool is_simple_polygon(std::span<const Point2> ring);

double polygon_area(std::span<const Point2> ring);

double egg_radius(double body_angle, double speed, const EggParams& params);

std::vector<Point2> egg_boundary(Point2 center, double heading, double speed, const EggParams& params,
                                 std::size_t n);

struct AngularExtremes {
  std::size_t left_index = 0;
  std::size_t right_index = 0;
};

/// Indices of the points with the largest (left) and smallest (right) bearing
/// seen from `observer`, with bearings unwrapped around their circular mean.
/// Ties go to the point closer to the observer, then to the lower index.
AngularExtremes angular_extreme_indices(std::span<const Point2> points, Point2 observer);

std::pair<Point2, Point2> angular_extremes(std::span<const Point2> points, Point2 observer);

/// Signed bearing of `p` relative to `reference` as seen from `observer`, in (-pi, pi].
double relative_bearing(Point2 p, Point2 observer, double reference);

/// Circular mean of the bearings of `points` seen from `observer`.
double mean_bearing(std::span<const Point2> points, Point2 observer);

}  // namespace crowdnav
