#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "crowdnav/dataset.hpp"
#include "crowdnav/orca.hpp"
#include "crowdnav/sensing.hpp"

namespace crowdnav {

struct OrcaParams {
  double radius = 0.3;
  double max_speed = 1.4;
  double time_horizon = 2.0;
  double neighbor_dist = 5.0;
  double robot_radius = 0.3;
  double goal_tolerance = 0.25;  ///< agents are removed once this close to their goal
  double formation_gain = 1.0;   ///< 1/s, pull of group members toward their slot

  void validate() const;
};

/// Reactive pedestrian simulation. Agents sharing a group id keep their
/// formation offsets while walking toward their goals.
class CrowdSimulation {
 public:
  explicit CrowdSimulation(OrcaParams params) : params_(params) {}

  /// Adds `agent` once `time()` reaches `spawn_time`; `group < 0` means no group.
  void schedule(double spawn_time, OrcaAgent agent, double pref_speed, int group);

  /// Steers toward goals, solves ORCA (with the robot as a neighbour) and
  /// removes agents that reached their goals.
  void step(const std::optional<OrcaDisc>& robot, double dt);

  double time() const { return time_; }
  const std::vector<OrcaAgent>& agents() const { return agents_; }
  std::vector<TrackedPosition> positions() const;
  bool finished() const { return agents_.empty() && pending_.empty(); }

 private:
  struct Pending {
    double spawn_time;
    OrcaAgent agent;
    double pref_speed;
    int group;
  };
  void spawn_due();
  void steer();

  OrcaParams params_;
  double time_ = 0.0;
  std::vector<OrcaAgent> agents_;
  std::vector<double> pref_speed_;
  std::vector<int> group_;
  std::vector<Pending> pending_;
};

/// Online crowd seeded from a dataset at time `t0`: agents start at their
/// annotated position and head to their last annotated position.
CrowdSimulation crowd_from_dataset(const TrajectoryDataset& dataset, double t0, const OrcaParams& params);

struct SyntheticCrowdParams {
  std::size_t n_groups = 3;
  std::size_t min_group_size = 2;
  std::size_t max_group_size = 2;
  double flow_heading = 0.0;  ///< dominant walking direction, radians
  bool bidirectional = true;  ///< groups walk with or against the flow at random
  bool stationary = false;    ///< groups stand still inside the region
  Rect region{{-5.0, -4.5}, {5.0, 4.5}};
  double lane_margin = 1.0;  ///< lanes stay this far inside the region sides
  double speed_min = 1.0;
  double speed_max = 1.3;
  double spawn_window = 4.0;
  double spawn_offset_min = 0.5;  ///< start this far before the region boundary
  double spawn_offset_max = 2.5;
  double exit_offset = 3.0;  ///< goals this far past the far boundary
  double member_spacing = 0.7;
  double duration = 40.0;
  double dt = 0.1;
  OrcaParams orca;

  void validate() const;
};

/// Records an ORCA crowd of coherent groups crossing the region along the
/// flow axis. Frames are simulation steps (frame_dt = dt).
TrajectoryDataset synthetic_crowd(std::uint64_t seed, const SyntheticCrowdParams& params);

}  // namespace crowdnav
