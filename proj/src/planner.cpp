#include "crowdnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace crowdnav {

void MpcParams::validate() const {
  if (horizon < 1) throw std::invalid_argument("mpc horizon must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("mpc gamma must be in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("mpc lambda must be in [0, 1]");
  if (!(dt > 0.0)) throw std::invalid_argument("mpc dt must be > 0");
  if (!(v_max > 0.0)) throw std::invalid_argument("mpc v_max must be > 0");
  if (!(omega_max > 0.0)) throw std::invalid_argument("mpc omega_max must be > 0");
  if (n_samples < 1) throw std::invalid_argument("mpc n_samples must be >= 1");
  if (!(d0 > 0.0)) throw std::invalid_argument("mpc d0 must be > 0");
}

std::vector<RobotState> rollout(const RobotState& s0, std::span<const Action> actions, const MpcParams& params) {
  std::vector<RobotState> states;
  states.reserve(actions.size() + 1);
  states.push_back(s0);
  RobotState s = s0;
  for (const Action& a : actions) {
    if (params.drive_mode == DriveMode::holonomic) {
      s.position += Point2{a.first, a.second} * params.dt;
    } else {
      s.heading += a.second * params.dt;
      s.position += unit_from_angle(s.heading) * (a.first * params.dt);
    }
    states.push_back(s);
  }
  return states;
}

double goal_cost(Point2 p, const NavigationTask& task) {
  double reference = distance(task.start, task.goal);
  if (reference <= kGeomEps) reference = 1.0;
  return std::clamp(distance(p, task.goal) / reference, 0.0, 2.0);
}

namespace {

double combine(double goal_term, double clearance, double lambda, double d0) {
  const double proximity = std::isfinite(clearance) ? std::exp(-clearance / d0) : 0.0;
  return lambda * goal_term + (1.0 - lambda) * proximity;
}

double min_space_distance(Point2 p, std::span<const GroupSpace> spaces) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : spaces) best = std::min(best, point_space_distance(p, s));
  return best;
}

}  // namespace

double step_cost(Point2 s_next, std::span<const GroupSpace> spaces, const NavigationTask& task, double lambda,
                 double d0) {
  return combine(goal_cost(s_next, task), min_space_distance(s_next, spaces), lambda, d0);
}

double SpaceClearance::clearance(std::size_t step, Point2 position) const {
  if (per_step_.empty()) return std::numeric_limits<double>::infinity();
  const auto& spaces = per_step_[std::min(step, per_step_.size()) - 1];
  return min_space_distance(position, spaces);
}

double EdgeClearance::clearance(std::size_t step, Point2 position) const {
  double best = min_space_distance(position, fixed_);
  for (const auto& fut : futures_) {
    const Pentagon p = pentagon_at(fut.at(std::min(step, fut.center.size()) - 1), position, offset_d_);
    best = std::min(best, point_polygon_distance(position, p));
  }
  return best;
}

EntityClearance::EntityClearance(std::span<const AugmentedEntity> entities, bool predict, double dt) : dt_(dt) {
  positions_.reserve(entities.size());
  velocities_.reserve(entities.size());
  for (const auto& e : entities) {
    positions_.push_back(e.position);
    velocities_.push_back(predict ? e.velocity() : Point2{});
  }
}

double EntityClearance::clearance(std::size_t step, Point2 position) const {
  const double t = static_cast<double>(step) * dt_;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    best_sq = std::min(best_sq, squared_norm(position - (positions_[i] + velocities_[i] * t)));
  }
  return std::sqrt(best_sq);
}

std::vector<std::vector<Action>> sample_candidates(const RobotState& s0, const NavigationTask& task,
                                                   const MpcParams& params) {
  const std::size_t K = params.horizon;
  std::vector<std::vector<Action>> grid;
  constexpr std::array<double, 4> kSpeedFractions{0.25, 0.5, 0.75, 1.0};

  if (params.drive_mode == DriveMode::holonomic) {
    const double goal_bearing =
        distance(s0.position, task.goal) > kGeomEps ? bearing(s0.position, task.goal) : 0.0;
    for (int i = 0; i < 16; ++i) {
      const Point2 dir = unit_from_angle(goal_bearing + 2.0 * kPi * i / 16.0);
      for (double frac : kSpeedFractions) {
        const Point2 v = dir * (frac * params.v_max);
        grid.emplace_back(K, Action{v.x, v.y});
      }
    }
    grid.emplace_back(K, Action{0.0, 0.0});
  } else {
    for (int i = 0; i < 9; ++i) {
      const double omega = params.omega_max * (-1.0 + 2.0 * i / 8.0);
      for (double frac : kSpeedFractions) grid.emplace_back(K, Action{frac * params.v_max, omega});
    }
  }

  std::vector<std::vector<Action>> candidates;
  candidates.reserve(params.n_samples);
  for (std::size_t i = 0; i < grid.size() && candidates.size() < params.n_samples; ++i) {
    candidates.push_back(grid[i]);
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  while (candidates.size() < params.n_samples) {
    const Action base = grid[pick(rng)].front();
    std::vector<Action> seq(K);
    if (params.drive_mode == DriveMode::holonomic) {
      const double base_speed = std::hypot(base.first, base.second);
      const double base_dir = base_speed > 0.0 ? std::atan2(base.second, base.first) : 0.0;
      double drift = 0.25 * unit_normal(rng);
      double speed = base_speed > 0.0 ? base_speed : 0.5 * params.v_max;
      for (auto& a : seq) {
        speed = std::clamp(speed + 0.1 * params.v_max * unit_normal(rng), 0.0, params.v_max);
        const Point2 v = unit_from_angle(base_dir + drift) * speed;
        a = {v.x, v.y};
        drift += 0.15 * unit_normal(rng);
      }
    } else {
      double omega = base.second;
      double speed = base.first;
      for (auto& a : seq) {
        omega = std::clamp(omega + 0.2 * params.omega_max * unit_normal(rng), -params.omega_max, params.omega_max);
        speed = std::clamp(speed + 0.1 * params.v_max * unit_normal(rng), 0.0, params.v_max);
        a = {speed, omega};
      }
    }
    candidates.push_back(std::move(seq));
  }
  return candidates;
}

double rollout_cost(std::span<const RobotState> states, const NavigationTask& task, const MpcParams& params,
                    const ClearanceModel& model) {
  double total = 0.0;
  double discount = 1.0;
  for (std::size_t k = 1; k < states.size(); ++k) {
    discount *= params.gamma;
    const Point2 p = states[k].position;
    total += discount * combine(goal_cost(p, task), model.clearance(k, p), params.lambda, params.d0);
  }
  return total;
}

ControlPlan optimize(const RobotState& s0, const NavigationTask& task, const MpcParams& params,
                     const ClearanceModel& model) {
  const auto candidates = sample_candidates(s0, task, params);
  ControlPlan best;
  best.cost = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto states = rollout(s0, candidates[i], params);
    const double cost = rollout_cost(states, task, params, model);
    if (std::isnan(cost)) continue;
    if (!found || cost < best.cost) {
      found = true;
      best.cost = cost;
      best.candidate_index = i;
      best.actions = candidates[i];
      best.states = std::move(states);
    }
  }
  if (!found) throw std::runtime_error("planner degenerate");
  return best;
}

ControlPlan plan(const RobotState& s0, std::span<const KeypointHistory> histories, KeypointOracle* oracle,
                 const NavigationTask& task, const MpcParams& params, const GroupingParams& grouping,
                 std::span<const GroupSpace> fixed_spaces) {
  std::vector<GroupSpace> fixed(fixed_spaces.begin(), fixed_spaces.end());
  bool fallback = false;
  std::vector<KeypointFuture> futures;
  if (oracle != nullptr) {
    try {
      futures = oracle->predict(histories, params.horizon, params.dt);
    } catch (const OracleUnavailable&) {
      fallback = true;
    }
  }
  if (oracle == nullptr || fallback) {
    for (const auto& h : histories) fixed.push_back({h.track_id, h.latest});
  }
  const EdgeClearance model(std::move(futures), std::move(fixed), grouping.offset_d);
  ControlPlan out = optimize(s0, task, params, model);
  out.oracle_fallback = fallback;
  return out;
}

ControlPlan plan_entities(const RobotState& s0, std::span<const AugmentedEntity> entities, bool predict,
                          const NavigationTask& task, const MpcParams& params) {
  const EntityClearance model(entities, predict, params.dt);
  return optimize(s0, task, params, model);
}

}  // namespace crowdnav
