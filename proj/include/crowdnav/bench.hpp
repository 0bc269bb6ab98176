#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdnav/crowd.hpp"
#include "crowdnav/dataset.hpp"
#include "crowdnav/grouping.hpp"
#include "crowdnav/planner.hpp"
#include "crowdnav/prediction.hpp"
#include "crowdnav/sensing.hpp"

namespace crowdnav {

enum class Task { flow, cross };
enum class Mode { offline, online };
enum class Perception { perfect, lidar };
enum class Representation { ped, lidar, group_hull, group_edge };

struct Method {
  Representation representation = Representation::group_edge;
  OracleKind oracle = OracleKind::linear;

  /// "<rep>-<oracle>", e.g. "group-edge-linear".
  std::string name() const;
  friend bool operator==(const Method&, const Method&) = default;
};

/// Throws std::invalid_argument on an unknown name.
Method parse_method(const std::string& name);

std::string to_string(Task task);
std::string to_string(Mode mode);
std::string to_string(Perception perception);
Task parse_task(const std::string& s);
Mode parse_mode(const std::string& s);
Perception parse_perception(const std::string& s);

struct ScenarioSpec {
  Task task = Task::cross;
  Mode mode = Mode::online;
  Perception perception = Perception::perfect;
  Method method;
  Rect test_region{{-5.0, -4.5}, {5.0, 4.5}};
  Point2 robot_start{0.0, -7.0};
  Point2 robot_goal{0.0, 7.0};
  std::size_t min_peds = 5;
  double timeout = 60.0;
  double goal_radius = 0.5;
  double collision_radius = 0.5;
  double cooldown = 5.0;
  double dt = 0.1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Start and goal 2.5 m outside the region: across the flow (Cross, flow
/// along +x) or along it (Flow).
void place_robot(ScenarioSpec& spec, double margin = 2.5);

/// Everything a trial needs besides the scenario.
struct PipelineConfig {
  MpcParams mpc;
  GroupingParams grouping;
  PredictionParams prediction;
  LidarConfig lidar;
  /// Simulated scenes have no static obstacles, and two abreast pedestrians
  /// of radius 0.5 m already span about 1.7 m, so the size filter is looser here.
  ScanClusteringParams scan{0.5, 1, 3.0, 1.0};
  OrcaParams orca;
  std::string oracle_command;  ///< required by the external oracle
  int oracle_timeout_ms = 50;
  bool measure_time = false;  ///< per-step wall clock; callers must run single-threaded
  bool record_frames = false;
};

enum class Outcome { reached, collision, timeout };
std::string to_string(Outcome outcome);
Outcome parse_outcome(const std::string& s);

struct TimedPoint {
  double t = 0.0;
  Point2 position;
};

/// Snapshot used for rendering.
struct Frame {
  double t = 0.0;
  Point2 robot;
  std::vector<Point2> pedestrians;
  std::vector<std::vector<Point2>> spaces;
};

struct TrialResult {
  std::string method;
  Task task = Task::cross;
  Mode mode = Mode::online;
  Perception perception = Perception::perfect;
  std::uint64_t seed = 0;
  double trial_start = 0.0;
  Point2 goal;
  Outcome outcome = Outcome::timeout;
  bool success = false;
  double min_dist = 0.0;  ///< +inf when no pedestrian was ever present
  double path_length = 0.0;
  double mean_step_time = 0.0;  ///< NaN unless timing was requested
  std::vector<double> step_times;
  std::vector<TimedPoint> trajectory;
  std::vector<Frame> frames;
  std::size_t oracle_fallbacks = 0;
};

/// Times at which at least `min_peds` pedestrians are inside the test region,
/// at least `cooldown` apart, scanned on the `dt` grid.
std::vector<double> generate_trials(const TrajectoryDataset& dataset, const ScenarioSpec& spec);

/// Derives an independent stream seed from a trial seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

using StepObserver = std::function<void(double t, Point2 robot)>;

/// Sense, group, plan, act and advance the crowd until collision, success or
/// timeout. `observer` sees every recorded robot position.
TrialResult run_trial(const ScenarioSpec& spec, const PipelineConfig& config, const TrajectoryDataset& dataset,
                      double trial_start, std::uint64_t seed, const StepObserver& observer = {});

struct MethodSummary {
  std::string method;
  std::size_t n_trials = 0;
  double success_rate = 0.0;
  double mean_min_dist = 0.0;        ///< over finite values; NaN if none
  double mean_path_length = 0.0;
  double mean_step_time = 0.0;       ///< over finite values; NaN if none
};

struct AggregateReport {
  std::vector<MethodSummary> methods;  ///< in first-appearance order
  std::vector<TrialResult> trials;
};

AggregateReport aggregate(std::vector<TrialResult> results);

}  // namespace crowdnav
