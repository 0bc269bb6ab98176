#include "crowdnav/crowd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace crowdnav {

void OrcaParams::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("orca radius must be > 0");
  if (!(max_speed > 0.0)) throw std::invalid_argument("orca max_speed must be > 0");
  if (!(time_horizon > 0.0)) throw std::invalid_argument("orca time_horizon must be > 0");
  if (!(neighbor_dist > 0.0)) throw std::invalid_argument("orca neighbor_dist must be > 0");
  if (!(robot_radius >= 0.0)) throw std::invalid_argument("orca robot_radius must be >= 0");
  if (!(goal_tolerance > 0.0)) throw std::invalid_argument("orca goal_tolerance must be > 0");
  if (!(formation_gain >= 0.0)) throw std::invalid_argument("orca formation_gain must be >= 0");
}

void CrowdSimulation::schedule(double spawn_time, OrcaAgent agent, double pref_speed, int group) {
  pending_.push_back({spawn_time, agent, pref_speed, group});
  spawn_due();
}

void CrowdSimulation::spawn_due() {
  constexpr double kSlack = 1e-9;
  auto it = pending_.begin();
  while (it != pending_.end()) {
    if (it->spawn_time <= time_ + kSlack) {
      agents_.push_back(it->agent);
      pref_speed_.push_back(it->pref_speed);
      group_.push_back(it->group);
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
}

void CrowdSimulation::steer() {
  struct Formation {
    Point2 position_sum;
    Point2 goal_sum;
    int count = 0;
  };
  std::map<int, Formation> formations;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (group_[i] < 0) continue;
    auto& f = formations[group_[i]];
    f.position_sum += agents_[i].position;
    f.goal_sum += agents_[i].goal;
    ++f.count;
  }

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    OrcaAgent& a = agents_[i];
    const Point2 to_goal = a.goal - a.position;
    const double d = norm(to_goal);
    Point2 pref;
    const auto f = group_[i] >= 0 ? formations.find(group_[i]) : formations.end();
    if (f != formations.end() && f->second.count > 1 && d > 1.5 && pref_speed_[i] > 0.0) {
      const double n = f->second.count;
      const Point2 centroid = f->second.position_sum / n;
      const Point2 mean_goal = f->second.goal_sum / n;
      const Point2 heading = mean_goal - centroid;
      const double len = norm(heading);
      const Point2 dir = len > kGeomEps ? heading / len : Point2{};
      const Point2 slot = centroid + (a.goal - mean_goal);
      pref = dir * pref_speed_[i] + (slot - a.position) * params_.formation_gain;
    } else if (d > kGeomEps) {
      pref = to_goal * (std::min(pref_speed_[i], d) / d);
    }
    const double speed = norm(pref);
    if (speed > a.max_speed) pref = pref * (a.max_speed / speed);
    a.pref_velocity = pref;
  }
}

void CrowdSimulation::step(const std::optional<OrcaDisc>& robot, double dt) {
  steer();
  agents_ = orca_step(agents_, robot, dt);
  time_ += dt;
  for (std::size_t i = agents_.size(); i-- > 0;) {
    if (pref_speed_[i] > 0.0 && distance(agents_[i].position, agents_[i].goal) < params_.goal_tolerance) {
      agents_.erase(agents_.begin() + static_cast<std::ptrdiff_t>(i));
      pref_speed_.erase(pref_speed_.begin() + static_cast<std::ptrdiff_t>(i));
      group_.erase(group_.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  spawn_due();
}

std::vector<TrackedPosition> CrowdSimulation::positions() const {
  std::vector<TrackedPosition> out;
  out.reserve(agents_.size());
  for (const auto& a : agents_) out.push_back({a.id, a.position});
  std::sort(out.begin(), out.end(), [](const TrackedPosition& a, const TrackedPosition& b) { return a.id < b.id; });
  return out;
}

namespace {

OrcaAgent make_agent(int id, Point2 position, Point2 velocity, Point2 goal, const OrcaParams& params) {
  OrcaAgent a;
  a.id = id;
  a.position = position;
  a.velocity = velocity;
  a.goal = goal;
  a.radius = params.radius;
  a.max_speed = params.max_speed;
  a.time_horizon = params.time_horizon;
  a.neighbor_dist = params.neighbor_dist;
  const double speed = norm(velocity);
  if (speed > a.max_speed) a.velocity = velocity * (a.max_speed / speed);
  return a;
}

}  // namespace

CrowdSimulation crowd_from_dataset(const TrajectoryDataset& dataset, double t0, const OrcaParams& params) {
  CrowdSimulation sim(params);
  const double fdt = dataset.frame_dt();
  for (const auto& tr : dataset.tracks()) {
    const double first = tr.first_time(fdt);
    const double last = tr.last_time(fdt);
    if (last < t0) continue;

    double path = 0.0;
    for (std::size_t i = 1; i < tr.positions.size(); ++i) path += distance(tr.positions[i], tr.positions[i - 1]);
    double pref_speed = last > first ? std::min(path / (last - first), params.max_speed) : 0.0;
    if (pref_speed < 0.1) pref_speed = 0.0;

    Point2 start = tr.positions.front();
    Point2 velocity;
    double spawn = first - t0;
    if (first <= t0) {
      start = *dataset.position_at(tr.id, t0);
      const double probe = std::min(t0 + fdt, last);
      if (probe > t0) velocity = (*dataset.position_at(tr.id, probe) - start) / (probe - t0);
      spawn = 0.0;
    }
    const Point2 goal = pref_speed > 0.0 ? tr.positions.back() : start;
    const int group = dataset.group_of(tr.id).value_or(-1);
    sim.schedule(spawn, make_agent(tr.id, start, velocity, goal, params), pref_speed, group);
  }
  return sim;
}

void SyntheticCrowdParams::validate() const {
  if (n_groups < 1) throw std::invalid_argument("synthetic crowd needs n_groups >= 1");
  if (min_group_size < 1 || max_group_size < min_group_size) {
    throw std::invalid_argument("synthetic crowd group sizes must satisfy 1 <= min <= max");
  }
  if (!(speed_min > 0.0 && speed_max >= speed_min)) throw std::invalid_argument("synthetic crowd speeds invalid");
  if (!(dt > 0.0)) throw std::invalid_argument("synthetic crowd dt must be > 0");
  if (!(duration > 0.0)) throw std::invalid_argument("synthetic crowd duration must be > 0");
  if (!(member_spacing > 0.0)) throw std::invalid_argument("synthetic crowd member_spacing must be > 0");
  if (!(region.width() > 0.0 && region.height() > 0.0)) throw std::invalid_argument("synthetic crowd region empty");
  orca.validate();
}

TrajectoryDataset synthetic_crowd(std::uint64_t seed, const SyntheticCrowdParams& params) {
  params.validate();
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  const Point2 along = unit_from_angle(params.flow_heading);
  const Point2 lateral = {-along.y, along.x};
  const Point2 center = params.region.center();
  // Half extents of the region measured along and across the flow.
  const double half_along =
      0.5 * (std::abs(along.x) * params.region.width() + std::abs(along.y) * params.region.height());
  const double half_lateral =
      0.5 * (std::abs(lateral.x) * params.region.width() + std::abs(lateral.y) * params.region.height());
  const double lane_limit = std::max(0.0, half_lateral - params.lane_margin);

  CrowdSimulation sim(params.orca);
  std::map<int, int> group_of;
  int next_id = 0;
  for (std::size_t g = 0; g < params.n_groups; ++g) {
    const std::size_t size = std::uniform_int_distribution<std::size_t>(params.min_group_size, params.max_group_size)(rng);
    const double sign = params.bidirectional && std::uniform_int_distribution<int>(0, 1)(rng) == 1 ? -1.0 : 1.0;
    const double lane = uniform(-lane_limit, lane_limit);
    const double speed = uniform(params.speed_min, params.speed_max);
    const double spawn = params.stationary ? 0.0 : uniform(0.0, params.spawn_window);
    const double start_along = params.stationary
                                   ? uniform(-half_along + 1.0, half_along - 1.0)
                                   : -sign * (half_along + uniform(params.spawn_offset_min, params.spawn_offset_max));
    const double goal_along = sign * (half_along + params.exit_offset);
    for (std::size_t m = 0; m < size; ++m) {
      const double offset = (static_cast<double>(m) - 0.5 * static_cast<double>(size - 1)) * params.member_spacing;
      const Point2 start = center + along * start_along + lateral * (lane + offset);
      const Point2 goal = params.stationary ? start : center + along * goal_along + lateral * (lane + offset);
      const Point2 velocity = params.stationary ? Point2{} : along * (sign * speed);
      OrcaAgent a = make_agent(next_id, start, velocity, goal, params.orca);
      sim.schedule(spawn, a, params.stationary ? 0.0 : speed, static_cast<int>(g));
      group_of[next_id] = static_cast<int>(g);
      ++next_id;
    }
  }

  std::vector<DatasetRecord> records;
  const auto steps = static_cast<long>(std::llround(params.duration / params.dt));
  for (long frame = 0; frame <= steps; ++frame) {
    for (const auto& p : sim.positions()) records.push_back({frame, p.id, p.position});
    if (sim.finished()) break;
    sim.step(std::nullopt, params.dt);
  }
  TrajectoryDataset dataset(std::move(records), params.dt);
  dataset.set_groups(std::move(group_of));
  return dataset;
}

}  // namespace crowdnav
