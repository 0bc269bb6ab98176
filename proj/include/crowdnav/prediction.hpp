#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdnav/geometry.hpp"
#include "crowdnav/grouping.hpp"

namespace crowdnav {

struct PredictionParams {
  std::size_t history = 8;  ///< h, steps kept per key point
  std::size_t future = 8;   ///< f, steps predicted
  double association_radius = 1.0;
  double dt = 0.1;

  void validate() const;
};

enum class OracleKind { none, linear, external };

/// Oldest-to-newest key point trajectories of one tracked group.
struct KeypointHistory {
  int track_id = 0;
  std::vector<Point2> tau_c;
  std::vector<Point2> tau_l;
  std::vector<Point2> tau_r;
  long last_update = 0;
  Pentagon latest;  ///< space built at `last_update`, replicated when no oracle is used

  std::size_t size() const { return tau_c.size(); }
  Keypoints newest() const { return {tau_l.back(), tau_c.back(), tau_r.back()}; }
};

struct KeypointTracker {
  std::vector<KeypointHistory> histories;
  int next_track_id = 0;

  /// Histories matched at step `t`.
  std::vector<KeypointHistory> fresh(long t) const;
};

/// Greedy closest-first matching of detections to tracks within `radius`.
/// Returns, per detection, the matched track index or -1.
std::vector<int> greedy_associate(std::span<const Point2> tracks, std::span<const Point2> detections, double radius);

/// Appends the key points of each pentagon space to its nearest history
/// (trimmed to `history` entries), starts new histories for unmatched spaces,
/// and drops histories that went unmatched for more than two steps.
void update_histories(KeypointTracker& tracker, std::span<const GroupSpace> spaces, long t,
                      const PredictionParams& params);

struct KeypointFuture {
  int track_id = 0;
  std::vector<Point2> center;
  std::vector<Point2> left;
  std::vector<Point2> right;

  Keypoints at(std::size_t k) const { return {left[k], center[k], right[k]}; }
};

/// Constant velocity from the oldest to the newest entry of each series.
KeypointFuture predict_keypoints_linear(const KeypointHistory& history, std::size_t f, double dt);

class OracleUnavailable : public std::runtime_error {
 public:
  explicit OracleUnavailable(const std::string& why) : std::runtime_error("oracle unavailable: " + why) {}
};

/// Maps key point histories to future key points.
class KeypointOracle {
 public:
  virtual ~KeypointOracle() = default;
  virtual std::vector<KeypointFuture> predict(std::span<const KeypointHistory> histories, std::size_t f,
                                              double dt) = 0;
};

class LinearOracle final : public KeypointOracle {
 public:
  std::vector<KeypointFuture> predict(std::span<const KeypointHistory> histories, std::size_t f, double dt) override;
};

/// Talks newline-delimited JSON to a child process over its stdin/stdout.
/// Request:  {"f":F,"dt":DT,"histories":[{"id":I,"center":[[x,y],..],"left":..,"right":..},..]}
/// Response: {"futures":[{"id":I,"center":[[x,y],..F],"left":..,"right":..},..]}
/// A reply slower than the timeout, malformed, or mismatched raises
/// OracleUnavailable and the child is restarted on the next request. The
/// first request after a start gets an extra kStartupGraceMs.
class ExternalOracle final : public KeypointOracle {
 public:
  ExternalOracle(std::string command, int timeout_ms = 50);
  ~ExternalOracle() override;
  ExternalOracle(const ExternalOracle&) = delete;
  ExternalOracle& operator=(const ExternalOracle&) = delete;

  std::vector<KeypointFuture> predict(std::span<const KeypointHistory> histories, std::size_t f, double dt) override;

 private:
  void start();
  void stop();

  static constexpr int kStartupGraceMs = 2000;

  std::string command_;
  int timeout_ms_;
  bool awaiting_first_reply_ = false;
  int fd_ = -1;
  int pid_ = -1;
  std::string buffer_;
};

std::string encode_oracle_request(std::span<const KeypointHistory> histories, std::size_t f, double dt);
std::vector<KeypointFuture> decode_oracle_response(const std::string& line, std::span<const KeypointHistory> histories,
                                                   std::size_t f);

/// Pentagon for predicted key points, offset relative to `reference`. Falls
/// back to the bare visible edge when a key point coincides with `reference`.
Pentagon pentagon_at(const Keypoints& kp, Point2 reference, double offset_d);

/// Group spaces for each of the `future` steps. Without an oracle every step
/// repeats the latest spaces; otherwise step k is rebuilt from the predicted
/// key points, offset away from `robot_future[k]`.
std::vector<std::vector<GroupSpace>> predict_group_spaces(std::span<const KeypointHistory> histories,
                                                          KeypointOracle* oracle, const PredictionParams& params,
                                                          std::span<const Point2> robot_future, double offset_d);

struct CentroidHistory {
  int track_id = 0;
  std::vector<Point2> centroids;
  long last_update = 0;
  ConvexHullShape latest;
};

struct HullTracker {
  std::vector<CentroidHistory> histories;
  int next_track_id = 0;

  std::vector<CentroidHistory> fresh(long t) const;
};

void update_hull_histories(HullTracker& tracker, std::span<const GroupSpace> spaces, long t,
                           const PredictionParams& params);

Point2 linear_velocity(std::span<const Point2> series, double dt);

/// The hull translated by k*dt*v for k = 1..f, v from the centroid history.
std::vector<ConvexHullShape> predict_hull_linear(const ConvexHullShape& hull, std::span<const Point2> centroid_history,
                                                 std::size_t f, double dt);

}  // namespace crowdnav
