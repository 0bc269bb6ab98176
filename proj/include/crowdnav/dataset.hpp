#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/geometry.hpp"
#include "crowdnav/sensing.hpp"

namespace crowdnav {

struct Rect {
  Point2 min;
  Point2 max;

  bool contains(Point2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
  bool contains_interior(Point2 p) const { return p.x > min.x && p.x < max.x && p.y > min.y && p.y < max.y; }
  Point2 center() const { return (min + max) / 2.0; }
  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
};

struct DatasetRecord {
  long frame = 0;
  int ped_id = 0;
  Point2 position;
};

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Annotated pedestrian trajectories. Frame f is at time f * frame_dt;
/// positions between annotations are linearly interpolated.
class TrajectoryDataset {
 public:
  struct Track {
    int id = 0;
    std::vector<long> frames;
    std::vector<Point2> positions;

    double first_time(double frame_dt) const { return static_cast<double>(frames.front()) * frame_dt; }
    double last_time(double frame_dt) const { return static_cast<double>(frames.back()) * frame_dt; }
  };

  TrajectoryDataset() = default;
  /// Records are validated: (frame, id) unique and frames strictly increasing per id in input order.
  TrajectoryDataset(std::vector<DatasetRecord> records, double frame_dt);

  const std::vector<DatasetRecord>& records() const { return records_; }
  const std::vector<Track>& tracks() const { return tracks_; }
  double frame_dt() const { return frame_dt_; }
  Rect bounds() const { return bounds_; }
  double start_time() const;
  double end_time() const;
  bool empty() const { return records_.empty(); }

  const Track* track(int id) const;
  std::optional<Point2> position_at(int id, double t) const;

  /// Optional group membership (set by generators that know it).
  void set_groups(std::map<int, int> group_of) { group_of_ = std::move(group_of); }
  std::optional<int> group_of(int id) const;

 private:
  std::vector<DatasetRecord> records_;
  std::vector<Track> tracks_;
  std::map<int, std::size_t> track_index_;
  std::map<int, int> group_of_;
  double frame_dt_ = 0.0;
  Rect bounds_;
};

/// Whitespace-separated "frame id x y" rows; blank lines and '#' comments are skipped.
TrajectoryDataset parse_dataset(std::istream& in, double frame_dt);
TrajectoryDataset load_dataset(const std::filesystem::path& path, double frame_dt);
void write_dataset(std::ostream& out, const TrajectoryDataset& dataset);

/// Interpolated positions of every pedestrian alive at `t`, ordered by id.
std::vector<TrackedPosition> replay_step(const TrajectoryDataset& dataset, double t);

}  // namespace crowdnav
