#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crowdnav/geometry.hpp"
#include "crowdnav/grouping.hpp"
#include "crowdnav/prediction.hpp"
#include "crowdnav/sensing.hpp"

namespace crowdnav {

enum class DriveMode { holonomic, nonholonomic };

struct RobotState {
  Point2 position;
  double heading = 0.0;
};

/// Velocity command: (v_x, v_y) for holonomic drive, (v, omega) otherwise.
struct Action {
  double first = 0.0;
  double second = 0.0;

  friend bool operator==(const Action&, const Action&) = default;
};

struct MpcParams {
  std::size_t horizon = 8;  ///< K
  double gamma = 0.9;
  double lambda = 0.5;
  double dt = 0.1;
  double v_max = 1.75;
  double omega_max = kPi / 4.0;
  std::size_t n_samples = 128;
  DriveMode drive_mode = DriveMode::holonomic;
  std::uint64_t seed = 0;
  double d0 = 1.0;  ///< distance scale inside exp(-D / d0)

  void validate() const;
};

struct NavigationTask {
  Point2 start;
  Point2 goal;
};

struct ControlPlan {
  std::vector<Action> actions;
  std::vector<RobotState> states;  ///< K + 1 states, states[0] is the current state
  double cost = 0.0;
  std::size_t candidate_index = 0;
  bool oracle_fallback = false;
};

std::vector<RobotState> rollout(const RobotState& s0, std::span<const Action> actions, const MpcParams& params);

/// Distance to goal normalized by the task's start-to-goal distance, clipped to [0, 2].
double goal_cost(Point2 p, const NavigationTask& task);

/// lambda * J_g + (1 - lambda) * exp(-D / d0), with D the distance to the
/// nearest space (the proximity term vanishes without spaces).
double step_cost(Point2 s_next, std::span<const GroupSpace> spaces, const NavigationTask& task, double lambda,
                 double d0);

/// Distance from a rollout position at step k (1-based) to the nearest obstacle.
class ClearanceModel {
 public:
  virtual ~ClearanceModel() = default;
  virtual double clearance(std::size_t step, Point2 position) const = 0;
};

/// Spaces fixed per future step (index k-1 for step k); an empty list means no obstacles.
class SpaceClearance final : public ClearanceModel {
 public:
  explicit SpaceClearance(std::vector<std::vector<GroupSpace>> per_step) : per_step_(std::move(per_step)) {}
  double clearance(std::size_t step, Point2 position) const override;

 private:
  std::vector<std::vector<GroupSpace>> per_step_;
};

/// Predicted key points re-offset from the evaluated rollout position, plus
/// spaces that stay fixed over the horizon.
class EdgeClearance final : public ClearanceModel {
 public:
  EdgeClearance(std::vector<KeypointFuture> futures, std::vector<GroupSpace> fixed, double offset_d)
      : futures_(std::move(futures)), fixed_(std::move(fixed)), offset_d_(offset_d) {}
  double clearance(std::size_t step, Point2 position) const override;

 private:
  std::vector<KeypointFuture> futures_;
  std::vector<GroupSpace> fixed_;
  double offset_d_;
};

/// Point entities, optionally moving at their current velocity.
class EntityClearance final : public ClearanceModel {
 public:
  EntityClearance(std::span<const AugmentedEntity> entities, bool predict, double dt);
  double clearance(std::size_t step, Point2 position) const override;

 private:
  std::vector<Point2> positions_;
  std::vector<Point2> velocities_;
  double dt_;
};

/// Constant-action grid around the goal bearing (holonomic: 16 bearings x 4
/// speeds + stop; nonholonomic: 9 turn rates x 4 speeds) followed by seeded
/// random perturbations of grid members, `n_samples` in total.
std::vector<std::vector<Action>> sample_candidates(const RobotState& s0, const NavigationTask& task,
                                                   const MpcParams& params);

double rollout_cost(std::span<const RobotState> states, const NavigationTask& task, const MpcParams& params,
                    const ClearanceModel& model);

/// Evaluates every candidate and returns the cheapest (lowest index on ties).
ControlPlan optimize(const RobotState& s0, const NavigationTask& task, const MpcParams& params,
                     const ClearanceModel& model);

/// Group MPC over visible-edge spaces. `oracle == nullptr` keeps the latest
/// spaces for the whole horizon. A failing oracle falls back to that and sets
/// `ControlPlan::oracle_fallback`. `fixed_spaces` are added at every step.
ControlPlan plan(const RobotState& s0, std::span<const KeypointHistory> histories, KeypointOracle* oracle,
                 const NavigationTask& task, const MpcParams& params, const GroupingParams& grouping,
                 std::span<const GroupSpace> fixed_spaces = {});

/// Per-entity MPC baseline: D is the distance to the nearest entity position.
ControlPlan plan_entities(const RobotState& s0, std::span<const AugmentedEntity> entities, bool predict,
                          const NavigationTask& task, const MpcParams& params);

}  // namespace crowdnav
