#include "crowdnav/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace crowdnav {

AugmentedEntity make_entity(Point2 position, Point2 velocity, EntitySource source, int source_id) {
  AugmentedEntity e;
  e.position = position;
  e.speed = norm(velocity);
  e.heading = e.speed > 0.0 ? normalize_angle_positive(std::atan2(velocity.y, velocity.x)) : 0.0;
  if (e.speed == 0.0) e.heading = 0.0;
  e.source = source;
  e.source_id = source_id;
  return e;
}

std::size_t LidarConfig::ray_count() const {
  return static_cast<std::size_t>(std::llround(360.0 / angular_resolution_deg));
}

void LidarConfig::validate() const {
  if (!(angular_resolution_deg > 0.0)) throw std::invalid_argument("lidar angular_resolution must be > 0");
  if (!(max_range > 0.0)) throw std::invalid_argument("lidar max_range must be > 0");
  if (!(noise_half_width >= 0.0)) throw std::invalid_argument("lidar noise_half_width must be >= 0");
  if (!(pedestrian_radius > 0.0)) throw std::invalid_argument("lidar pedestrian_radius must be > 0");
}

Scan simulate_scan(Point2 robot, std::span<const Circle> pedestrians, const LidarConfig& cfg, std::uint64_t rng_seed,
                   double timestamp) {
  for (const Circle& c : pedestrians) {
    if (distance(robot, c.center) < c.radius) throw std::runtime_error("sensor origin occluded");
  }
  Scan scan;
  scan.timestamp = timestamp;
  scan.origin = robot;

  // Only circles within range can be hit; precompute their bearing windows.
  struct Candidate {
    Circle circle;
    double center_bearing;
    double half_width;
  };
  std::vector<Candidate> candidates;
  for (const Circle& c : pedestrians) {
    const double d = distance(robot, c.center);
    if (d - c.radius > cfg.max_range) continue;
    candidates.push_back({c, bearing(robot, c.center), std::asin(std::min(1.0, c.radius / d))});
  }

  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> noise(-cfg.noise_half_width, cfg.noise_half_width);
  const std::size_t rays = cfg.ray_count();
  const double step = cfg.angular_resolution_deg * kPi / 180.0;
  for (std::size_t k = 0; k < rays; ++k) {
    const double theta = static_cast<double>(k) * step;
    const Point2 dir = unit_from_angle(theta);
    double best_t = std::numeric_limits<double>::infinity();
    for (const Candidate& cand : candidates) {
      if (std::abs(wrap_angle(theta - cand.center_bearing)) > cand.half_width + 1e-12) continue;
      const Point2 f = robot - cand.circle.center;
      const double b = dot(f, dir);
      const double disc = b * b - (squared_norm(f) - cand.circle.radius * cand.circle.radius);
      if (disc < 0.0) continue;
      const double t = -b - std::sqrt(disc);
      if (t >= 0.0 && t < best_t) best_t = t;
    }
    if (best_t > cfg.max_range) continue;
    Point2 hit = robot + dir * best_t;
    if (cfg.noise_half_width > 0.0) {
      hit.x += noise(rng);
      hit.y += noise(rng);
    }
    scan.points.push_back(hit);
  }
  return scan;
}

namespace {

std::vector<AugmentedEntity> entities_from_labeling(const Scan& scan, const ClusterLabeling& labeling,
                                                    std::span<const Point2> velocities) {
  std::vector<AugmentedEntity> out;
  out.reserve(scan.points.size());
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const int c = labeling.labels[i];
    if (c < 0) continue;
    out.push_back(make_entity(scan.points[i], velocities[c], EntitySource::scan_cluster, c));
  }
  return out;
}

}  // namespace

std::vector<AugmentedEntity> augment_scan(const Scan& scan_t, const Scan& scan_prev, double eps, double dt,
                                          double max_extent) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const ScanClusteringParams params{eps, 1, max_extent, 1.0};
  const ClusterLabeling prev =
      filter_large_clusters(dbscan(scan_prev.points, params.eps, params.min_pts), scan_prev.points, max_extent);
  const ClusterLabeling cur =
      filter_large_clusters(dbscan(scan_t.points, params.eps, params.min_pts), scan_t.points, max_extent);
  const auto velocities = associate_centroids(cur, prev, dt, params.gating_radius);
  return entities_from_labeling(scan_t, cur, velocities);
}

std::vector<AugmentedEntity> ScanTracker::update(const Scan& scan, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  ClusterLabeling cur = filter_large_clusters(dbscan(scan.points, params_.eps, params_.min_pts), scan.points,
                                              params_.max_extent);
  const ClusterLabeling empty;
  const auto velocities = associate_centroids(cur, previous_ ? *previous_ : empty, dt, params_.gating_radius);
  auto out = entities_from_labeling(scan, cur, velocities);
  previous_ = std::move(cur);
  return out;
}

std::vector<AugmentedEntity> augment_pedestrians(std::span<const TrackedPosition> current,
                                                 std::span<const TrackedPosition> previous, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  std::unordered_map<int, Point2> prev;
  for (const auto& p : previous) {
    if (!prev.emplace(p.id, p.position).second) throw std::invalid_argument("duplicate pedestrian id");
  }
  std::unordered_set<int> seen;
  std::vector<AugmentedEntity> out;
  out.reserve(current.size());
  for (const auto& c : current) {
    if (!seen.insert(c.id).second) throw std::invalid_argument("duplicate pedestrian id");
    const auto it = prev.find(c.id);
    const Point2 v = it == prev.end() ? Point2{} : (c.position - it->second) / dt;
    out.push_back(make_entity(c.position, v, EntitySource::pedestrian, c.id));
  }
  return out;
}

namespace {

double round6(double v) { return std::round(v * 1e6) / 1e6; }

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string scan_to_jsonl(const Scan& scan) {
  std::string s = "{\"t\":" + fixed6(scan.timestamp) + ",\"origin\":[" + fixed6(scan.origin.x) + "," +
                  fixed6(scan.origin.y) + "],\"points\":[";
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    if (i) s += ",";
    s += "[" + fixed6(scan.points[i].x) + "," + fixed6(scan.points[i].y) + "]";
  }
  s += "]}";
  return s;
}

Scan scan_from_jsonl(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  Scan scan;
  scan.timestamp = j.at("t").get<double>();
  scan.origin = {j.at("origin").at(0).get<double>(), j.at("origin").at(1).get<double>()};
  for (const auto& p : j.at("points")) scan.points.push_back({round6(p.at(0).get<double>()), round6(p.at(1).get<double>())});
  return scan;
}

void write_scan_log(std::ostream& out, std::span<const Scan> scans) {
  for (const Scan& s : scans) out << scan_to_jsonl(s) << '\n';
}

std::vector<Scan> read_scan_log(std::istream& in) {
  std::vector<Scan> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(scan_from_jsonl(line));
  }
  return out;
}

}  // namespace crowdnav
