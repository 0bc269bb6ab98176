#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdnav/clustering.hpp"
#include "crowdnav/geometry.hpp"

namespace crowdnav {

struct Scan {
  double timestamp = 0.0;
  Point2 origin;
  std::vector<Point2> points;  ///< sorted by ray bearing, counter-clockwise from +x
};

enum class EntitySource { pedestrian, scan_cluster };

/// Position, heading and speed of a pedestrian or a scan point.
struct AugmentedEntity {
  Point2 position;
  double heading = 0.0;  ///< [0, 2*pi); 0 when speed is 0
  double speed = 0.0;
  EntitySource source = EntitySource::pedestrian;
  int source_id = 0;

  Point2 velocity() const { return unit_from_angle(heading) * speed; }
};

/// Builds an entity whose heading follows `velocity` (heading 0 at zero speed).
AugmentedEntity make_entity(Point2 position, Point2 velocity, EntitySource source, int source_id);

struct LidarConfig {
  double angular_resolution_deg = 0.25;
  double max_range = 20.0;
  double noise_half_width = 0.05;
  double pedestrian_radius = 0.5;

  std::size_t ray_count() const;
  void validate() const;
};

struct Circle {
  Point2 center;
  double radius = 0.0;
};

/// Casts `ray_count()` rays over the full circle and keeps the nearest circle
/// hit per ray, then adds uniform noise to x and y.
Scan simulate_scan(Point2 robot, std::span<const Circle> pedestrians, const LidarConfig& cfg, std::uint64_t rng_seed,
                   double timestamp = 0.0);

struct ScanClusteringParams {
  double eps = 0.5;
  std::size_t min_pts = 1;
  double max_extent = 1.5;
  double gating_radius = 1.0;
};

/// Clusters a scan, drops large static clusters and assigns each surviving
/// point the velocity of its cluster relative to `previous`.
std::vector<AugmentedEntity> augment_scan(const Scan& scan_t, const Scan& scan_prev, double eps, double dt,
                                          double max_extent);

/// Stateful variant of `augment_scan` that keeps the previous frame's
/// clusters instead of recomputing them.
class ScanTracker {
 public:
  explicit ScanTracker(ScanClusteringParams params = {}) : params_(params) {}

  std::vector<AugmentedEntity> update(const Scan& scan, double dt);

 private:
  ScanClusteringParams params_;
  std::optional<ClusterLabeling> previous_;
};

struct TrackedPosition {
  int id = 0;
  Point2 position;
};

/// Perfect-perception entities by id-matched finite differences. Ids that
/// were absent in `previous` get zero speed.
std::vector<AugmentedEntity> augment_pedestrians(std::span<const TrackedPosition> current,
                                                 std::span<const TrackedPosition> previous, double dt);

/// One JSON-lines record: {"t":..,"origin":[x,y],"points":[[x,y],..]}, 6 decimals.
std::string scan_to_jsonl(const Scan& scan);
Scan scan_from_jsonl(const std::string& line);
void write_scan_log(std::ostream& out, std::span<const Scan> scans);
std::vector<Scan> read_scan_log(std::istream& in);

}  // namespace crowdnav
