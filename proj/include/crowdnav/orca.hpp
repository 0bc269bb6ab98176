#pragma once

#include <optional>
#include <span>
#include <vector>

#include "crowdnav/geometry.hpp"

namespace crowdnav {

struct OrcaAgent {
  int id = 0;
  Point2 position;
  Point2 velocity;
  Point2 pref_velocity;
  double radius = 0.3;
  double max_speed = 1.4;
  double time_horizon = 2.0;
  double neighbor_dist = 5.0;
  Point2 goal;
};

/// Non-cooperating disc (the robot) that agents avoid reciprocally.
struct OrcaDisc {
  Point2 position;
  Point2 velocity;
  double radius = 0.3;
};

/// Half-plane of admissible velocities: the left side of `direction` through `point`.
struct OrcaLine {
  Point2 point;
  Point2 direction;
};

/// Angle added to every preferred velocity so exactly symmetric encounters
/// resolve to the same side (agents veer to their right).
inline constexpr double kOrcaTieBreakRotation = -1e-6;

std::vector<OrcaLine> orca_lines(const OrcaAgent& agent, std::span<const OrcaAgent> agents,
                                 const std::optional<OrcaDisc>& robot, double dt);

/// Velocity closest to `preferred` inside the speed disc that satisfies all
/// lines; minimizes the largest violation when the constraints are infeasible.
Point2 solve_orca_velocity(std::span<const OrcaLine> lines, double max_speed, Point2 preferred);

/// One Jacobi update: all new velocities come from the same snapshot, then
/// positions are integrated.
std::vector<OrcaAgent> orca_step(std::span<const OrcaAgent> agents, const std::optional<OrcaDisc>& robot, double dt);

}  // namespace crowdnav
