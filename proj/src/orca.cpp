#include "crowdnav/orca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace crowdnav {

namespace {

constexpr double kLpEps = 1e-5;

struct Neighbor {
  double dist_sq;
  std::size_t index;  // agents.size() denotes the robot
};

OrcaLine reciprocal_line(const OrcaAgent& agent, Point2 other_pos, Point2 other_vel, double other_radius,
                         double responsibility, double dt) {
  const Point2 rel_pos = other_pos - agent.position;
  const Point2 rel_vel = agent.velocity - other_vel;
  const double dist_sq = squared_norm(rel_pos);
  const double combined_radius = agent.radius + other_radius;
  const double combined_radius_sq = combined_radius * combined_radius;
  const double inv_time_horizon = 1.0 / agent.time_horizon;

  OrcaLine line;
  Point2 u;
  if (dist_sq > combined_radius_sq) {
    const Point2 w = rel_vel - rel_pos * inv_time_horizon;
    const double w_len_sq = squared_norm(w);
    const double dot1 = dot(w, rel_pos);
    if (dot1 < 0.0 && dot1 * dot1 > combined_radius_sq * w_len_sq) {
      // Project on the cut-off circle.
      const double w_len = std::sqrt(w_len_sq);
      const Point2 unit_w = w / w_len;
      line.direction = {unit_w.y, -unit_w.x};
      u = unit_w * (combined_radius * inv_time_horizon - w_len);
    } else {
      // Project on the legs.
      const double leg = std::sqrt(dist_sq - combined_radius_sq);
      if (cross(rel_pos, w) > 0.0) {
        line.direction = Point2{rel_pos.x * leg - rel_pos.y * combined_radius,
                                rel_pos.x * combined_radius + rel_pos.y * leg} /
                         dist_sq;
      } else {
        line.direction = Point2{rel_pos.x * leg + rel_pos.y * combined_radius,
                                -rel_pos.x * combined_radius + rel_pos.y * leg} *
                         (-1.0 / dist_sq);
      }
      u = line.direction * dot(rel_vel, line.direction) - rel_vel;
    }
  } else {
    // Already overlapping: resolve within one step.
    const double inv_dt = 1.0 / dt;
    const Point2 w = rel_vel - rel_pos * inv_dt;
    const double w_len = norm(w);
    const Point2 unit_w = w_len > 0.0 ? w / w_len : Point2{1.0, 0.0};
    line.direction = {unit_w.y, -unit_w.x};
    u = unit_w * (combined_radius * inv_dt - w_len);
  }
  line.point = agent.velocity + u * responsibility;
  return line;
}

bool linear_program1(std::span<const OrcaLine> lines, std::size_t line_no, double radius, Point2 opt_velocity,
                     bool direction_opt, Point2& result) {
  const OrcaLine& ln = lines[line_no];
  const double dot_product = dot(ln.point, ln.direction);
  const double discriminant = dot_product * dot_product + radius * radius - squared_norm(ln.point);
  if (discriminant < 0.0) return false;
  const double sqrt_disc = std::sqrt(discriminant);
  double t_left = -dot_product - sqrt_disc;
  double t_right = -dot_product + sqrt_disc;

  for (std::size_t i = 0; i < line_no; ++i) {
    const double denominator = cross(ln.direction, lines[i].direction);
    const double numerator = cross(lines[i].direction, ln.point - lines[i].point);
    if (std::abs(denominator) <= kLpEps) {
      if (numerator < 0.0) return false;
      continue;
    }
    const double t = numerator / denominator;
    if (denominator >= 0.0) {
      t_right = std::min(t_right, t);
    } else {
      t_left = std::max(t_left, t);
    }
    if (t_left > t_right) return false;
  }

  if (direction_opt) {
    result = ln.point + ln.direction * (dot(opt_velocity, ln.direction) > 0.0 ? t_right : t_left);
  } else {
    const double t = dot(ln.direction, opt_velocity - ln.point);
    result = ln.point + ln.direction * std::clamp(t, t_left, t_right);
  }
  return true;
}

std::size_t linear_program2(std::span<const OrcaLine> lines, double radius, Point2 opt_velocity, bool direction_opt,
                            Point2& result) {
  if (direction_opt) {
    result = opt_velocity * radius;
  } else if (squared_norm(opt_velocity) > radius * radius) {
    result = opt_velocity * (radius / norm(opt_velocity));
  } else {
    result = opt_velocity;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (cross(lines[i].direction, lines[i].point - result) > 0.0) {
      const Point2 temp = result;
      if (!linear_program1(lines, i, radius, opt_velocity, direction_opt, result)) {
        result = temp;
        return i;
      }
    }
  }
  return lines.size();
}

void linear_program3(std::span<const OrcaLine> lines, std::size_t begin_line, double radius, Point2& result) {
  double dist = 0.0;
  for (std::size_t i = begin_line; i < lines.size(); ++i) {
    if (cross(lines[i].direction, lines[i].point - result) <= dist) continue;
    std::vector<OrcaLine> projected;
    projected.reserve(i);
    for (std::size_t j = 0; j < i; ++j) {
      OrcaLine line;
      const double determinant = cross(lines[i].direction, lines[j].direction);
      if (std::abs(determinant) <= kLpEps) {
        if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;
        line.point = (lines[i].point + lines[j].point) * 0.5;
      } else {
        line.point = lines[i].point +
                     lines[i].direction * (cross(lines[j].direction, lines[i].point - lines[j].point) / determinant);
      }
      const Point2 d = lines[j].direction - lines[i].direction;
      line.direction = d / norm(d);
      projected.push_back(line);
    }
    const Point2 temp = result;
    if (linear_program2(projected, radius, Point2{-lines[i].direction.y, lines[i].direction.x}, true, result) <
        projected.size()) {
      result = temp;
    }
    dist = cross(lines[i].direction, lines[i].point - result);
  }
}

}  // namespace

std::vector<OrcaLine> orca_lines(const OrcaAgent& agent, std::span<const OrcaAgent> agents,
                                 const std::optional<OrcaDisc>& robot, double dt) {
  std::vector<Neighbor> neighbors;
  const double range_sq = agent.neighbor_dist * agent.neighbor_dist;
  for (std::size_t j = 0; j < agents.size(); ++j) {
    if (agents[j].id == agent.id) continue;
    const double d = squared_norm(agents[j].position - agent.position);
    if (d < range_sq) neighbors.push_back({d, j});
  }
  if (robot) {
    const double d = squared_norm(robot->position - agent.position);
    if (d < range_sq) neighbors.push_back({d, agents.size()});
  }
  std::sort(neighbors.begin(), neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.dist_sq < b.dist_sq || (a.dist_sq == b.dist_sq && a.index < b.index);
  });

  std::vector<OrcaLine> lines;
  lines.reserve(neighbors.size());
  for (const Neighbor& n : neighbors) {
    if (n.index == agents.size()) {
      lines.push_back(reciprocal_line(agent, robot->position, robot->velocity, robot->radius, 0.5, dt));
    } else {
      const OrcaAgent& other = agents[n.index];
      lines.push_back(reciprocal_line(agent, other.position, other.velocity, other.radius, 0.5, dt));
    }
  }
  return lines;
}

Point2 solve_orca_velocity(std::span<const OrcaLine> lines, double max_speed, Point2 preferred) {
  Point2 result;
  const std::size_t fail = linear_program2(lines, max_speed, preferred, false, result);
  if (fail < lines.size()) linear_program3(lines, fail, max_speed, result);
  return result;
}

namespace {

// Symmetric crowds (agents on a ring swapping sides) jam when every agent's
// constraints mirror its neighbours'. Agents with neighbours in range turn
// their preferred velocity right by an id-dependent angle in [turn/2, turn).
constexpr double kSymmetryTurn = 0.02;

// Deterministic value in [0, 1) from an agent id.
double agent_unit(int id) {
  std::uint64_t z = static_cast<std::uint64_t>(id) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) / 9007199254740992.0;
}

}  // namespace

std::vector<OrcaAgent> orca_step(std::span<const OrcaAgent> agents, const std::optional<OrcaDisc>& robot, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  std::vector<OrcaAgent> next(agents.begin(), agents.end());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto lines = orca_lines(agents[i], agents, robot, dt);
    const Point2 preferred = rotate(agents[i].pref_velocity, kOrcaTieBreakRotation);
    const double turn = lines.empty() ? 0.0 : -kSymmetryTurn * (0.5 + 0.5 * agent_unit(agents[i].id));
    next[i].velocity = solve_orca_velocity(lines, agents[i].max_speed, rotate(preferred, turn));
  }
  for (auto& a : next) a.position += a.velocity * dt;
  return next;
}

}  // namespace crowdnav
