#include "crowdnav/geometry.hpp"

#include <algorithm>
#include <limits>

namespace crowdnav {

double wrap_angle(double theta) {
  double w = std::remainder(theta, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

double normalize_angle_positive(double theta) {
  double w = std::fmod(theta, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  if (w >= 2.0 * kPi) w = 0.0;
  return w;
}

bool Pentagon::repaired() const {
  if (outline.size() != vertices.size()) return true;
  return !std::equal(outline.begin(), outline.end(), vertices.begin());
}

void EggParams::validate() const {
  if (!(base_radius > 0.0)) throw std::invalid_argument("egg base_radius must be > 0");
  if (!(front_gain >= 0.0)) throw std::invalid_argument("egg front_gain must be >= 0");
  if (!(side_ratio > 0.0 && side_ratio <= 1.0)) throw std::invalid_argument("egg side_ratio must be in (0, 1]");
  if (!(rear_ratio > 0.0 && rear_ratio <= 1.0)) throw std::invalid_argument("egg rear_ratio must be in (0, 1]");
}

double point_segment_distance(Point2 p, const Segment& seg) {
  const Point2 ab = seg.b - seg.a;
  const double len_sq = squared_norm(ab);
  if (len_sq <= kGeomEps * kGeomEps) return distance(p, seg.a);
  const double t = std::clamp(dot(p - seg.a, ab) / len_sq, 0.0, 1.0);
  return distance(p, seg.a + ab * t);
}

bool point_in_polygon(Point2 p, std::span<const Point2> ring) {
  if (ring.size() < 3) return false;
  int winding = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point2 a = ring[i];
    const Point2 b = ring[(i + 1) % ring.size()];
    const double side = cross(b - a, p - a);
    if (a.y <= p.y) {
      if (b.y > p.y && side > 0.0) ++winding;
    } else if (b.y <= p.y && side < 0.0) {
      --winding;
    }
  }
  return winding != 0;
}

double point_polygon_distance(Point2 p, std::span<const Point2> ring) {
  if (ring.empty()) return std::numeric_limits<double>::infinity();
  if (ring.size() == 1) return distance(p, ring[0]);
  if (point_in_polygon(p, ring)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t edges = ring.size() == 2 ? 1 : ring.size();
  for (std::size_t i = 0; i < edges; ++i) {
    best = std::min(best, point_segment_distance(p, {ring[i], ring[(i + 1) % ring.size()]}));
  }
  return best;
}

double point_polygon_distance(Point2 p, const Pentagon& poly) { return point_polygon_distance(p, poly.outline); }

double point_polygon_distance(Point2 p, const ConvexHullShape& poly) {
  return point_polygon_distance(p, poly.vertices);
}

ConvexHullShape convex_hull(std::span<const Point2> points) {
  if (points.empty()) throw GeometryError("empty point set");
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 2) return {pts};

  // Andrew's monotone chain; collinear points are dropped.
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point2& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= kGeomEps) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Point2 p = pts[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= kGeomEps) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return {hull};
}

namespace {

int orientation(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  if (v > kGeomEps) return 1;
  if (v < -kGeomEps) return -1;
  return 0;
}

bool segments_cross(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

}  // namespace

bool is_simple_polygon(std::span<const Point2> ring) {
  const std::size_t n = ring.size();
  if (n < 4) return true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
      if (segments_cross(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n])) return false;
    }
  }
  return true;
}

double polygon_area(std::span<const Point2> ring) {
  if (ring.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) twice += cross(ring[i], ring[(i + 1) % ring.size()]);
  return 0.5 * twice;
}

double egg_radius(double body_angle, double speed, const EggParams& params) {
  const double base = params.base_radius;
  const double c = std::cos(body_angle);
  const double s = std::sin(body_angle);
  const double axis =
      base * (params.rear_ratio + (1.0 - params.rear_ratio + params.front_gain * speed / base) * std::max(0.0, c));
  const double side_weight = s * s;
  return (1.0 - side_weight) * axis + side_weight * params.side_ratio * base;
}

std::vector<Point2> egg_boundary(Point2 center, double heading, double speed, const EggParams& params,
                                 std::size_t n) {
  if (n < 8) throw std::invalid_argument("egg_boundary needs at least 8 samples");
  std::vector<Point2> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    const double r = egg_radius(phi, speed, params);
    out.push_back(center + unit_from_angle(heading + phi) * r);
  }
  return out;
}

double relative_bearing(Point2 p, Point2 observer, double reference) {
  return wrap_angle(bearing(observer, p) - reference);
}

double mean_bearing(std::span<const Point2> points, Point2 observer) {
  double sx = 0.0, sy = 0.0;
  for (const Point2& p : points) {
    const Point2 d = p - observer;
    const double len = norm(d);
    if (len <= kGeomEps) throw GeometryError("point coincides with observer");
    sx += d.x / len;
    sy += d.y / len;
  }
  if (std::hypot(sx, sy) <= kGeomEps) throw GroupSurroundsRobot();
  return std::atan2(sy, sx);
}

AngularExtremes angular_extreme_indices(std::span<const Point2> points, Point2 observer) {
  if (points.empty()) throw GeometryError("empty point set");
  const double reference = mean_bearing(points, observer);
  AngularExtremes out;
  double max_rel = -std::numeric_limits<double>::infinity();
  double min_rel = std::numeric_limits<double>::infinity();
  double max_range = 0.0, min_range = 0.0;
  constexpr double kTie = 1e-12;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double rel = relative_bearing(points[i], observer, reference);
    const double range = distance(points[i], observer);
    if (rel > max_rel + kTie || (std::abs(rel - max_rel) <= kTie && range < max_range)) {
      max_rel = rel;
      max_range = range;
      out.left_index = i;
    }
    if (rel < min_rel - kTie || (std::abs(rel - min_rel) <= kTie && range < min_range)) {
      min_rel = rel;
      min_range = range;
      out.right_index = i;
    }
  }
  if (max_rel - min_rel >= kPi) throw GroupSurroundsRobot();
  return out;
}

std::pair<Point2, Point2> angular_extremes(std::span<const Point2> points, Point2 observer) {
  const AngularExtremes idx = angular_extreme_indices(points, observer);
  return {points[idx.left_index], points[idx.right_index]};
}

}  // namespace crowdnav
