#include "crowdnav/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

namespace crowdnav {

namespace {

const char* representation_name(Representation r) {
  switch (r) {
    case Representation::ped: return "ped";
    case Representation::lidar: return "lidar";
    case Representation::group_hull: return "group-hull";
    case Representation::group_edge: return "group-edge";
  }
  return "?";
}

const char* oracle_name(OracleKind k) {
  switch (k) {
    case OracleKind::none: return "nopred";
    case OracleKind::linear: return "linear";
    case OracleKind::external: return "external";
  }
  return "?";
}

}  // namespace

std::string Method::name() const { return std::string(representation_name(representation)) + "-" + oracle_name(oracle); }

Method parse_method(const std::string& name) {
  for (Representation r : {Representation::ped, Representation::lidar, Representation::group_hull,
                           Representation::group_edge}) {
    for (OracleKind k : {OracleKind::none, OracleKind::linear, OracleKind::external}) {
      const Method m{r, k};
      if (m.name() == name) return m;
    }
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string to_string(Task task) { return task == Task::flow ? "flow" : "cross"; }
std::string to_string(Mode mode) { return mode == Mode::offline ? "offline" : "online"; }
std::string to_string(Perception p) { return p == Perception::perfect ? "perfect" : "lidar"; }

Task parse_task(const std::string& s) {
  if (s == "flow") return Task::flow;
  if (s == "cross") return Task::cross;
  throw std::invalid_argument("unknown task '" + s + "'");
}

Mode parse_mode(const std::string& s) {
  if (s == "offline") return Mode::offline;
  if (s == "online") return Mode::online;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

Perception parse_perception(const std::string& s) {
  if (s == "perfect") return Perception::perfect;
  if (s == "lidar") return Perception::lidar;
  throw std::invalid_argument("unknown perception '" + s + "'");
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::reached: return "reached";
    case Outcome::collision: return "collision";
    case Outcome::timeout: return "timeout";
  }
  return "?";
}

Outcome parse_outcome(const std::string& s) {
  if (s == "reached") return Outcome::reached;
  if (s == "collision") return Outcome::collision;
  if (s == "timeout") return Outcome::timeout;
  throw std::invalid_argument("unknown outcome '" + s + "'");
}

void ScenarioSpec::validate() const {
  if (!(test_region.width() > 0.0 && test_region.height() > 0.0)) {
    throw std::invalid_argument("test_region must have positive size");
  }
  if (test_region.contains_interior(robot_start)) throw std::invalid_argument("robot_start inside test_region");
  if (test_region.contains_interior(robot_goal)) throw std::invalid_argument("robot_goal inside test_region");
  const Point2 c = test_region.center();
  if (!(dot(robot_start - c, robot_goal - c) < 0.0)) {
    throw std::invalid_argument("robot_start and robot_goal must be on opposite sides of test_region");
  }
  if (min_peds < 1) throw std::invalid_argument("min_peds must be >= 1");
  if (!(timeout > 0.0)) throw std::invalid_argument("timeout must be > 0");
  if (!(goal_radius > 0.0)) throw std::invalid_argument("goal_radius must be > 0");
  if (!(collision_radius > 0.0)) throw std::invalid_argument("collision_radius must be > 0");
  if (!(cooldown >= 0.0)) throw std::invalid_argument("cooldown must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  const auto rep = method.representation;
  if (rep == Representation::ped && perception != Perception::perfect) {
    throw std::invalid_argument("method " + method.name() + " requires perfect perception");
  }
  if (rep == Representation::lidar && perception != Perception::lidar) {
    throw std::invalid_argument("method " + method.name() + " requires lidar perception");
  }
  if (rep != Representation::group_edge && method.oracle == OracleKind::external) {
    throw std::invalid_argument("method " + method.name() + " is not supported: the external oracle predicts key points");
  }
}

void place_robot(ScenarioSpec& spec, double margin) {
  const Point2 c = spec.test_region.center();
  if (spec.task == Task::cross) {
    spec.robot_start = {c.x, spec.test_region.min.y - margin};
    spec.robot_goal = {c.x, spec.test_region.max.y + margin};
  } else {
    spec.robot_start = {spec.test_region.min.x - margin, c.y};
    spec.robot_goal = {spec.test_region.max.x + margin, c.y};
  }
}

std::vector<double> generate_trials(const TrajectoryDataset& dataset, const ScenarioSpec& spec) {
  std::vector<double> starts;
  if (dataset.empty()) return starts;
  const double t_begin = dataset.start_time();
  const double t_end = dataset.end_time();
  const auto steps = static_cast<long>(std::floor((t_end - t_begin) / spec.dt + 1e-9));
  std::optional<double> last;
  for (long k = 0; k <= steps; ++k) {
    const double t = t_begin + static_cast<double>(k) * spec.dt;
    if (last && t - *last < spec.cooldown - 1e-9) continue;
    std::size_t inside = 0;
    for (const auto& p : replay_step(dataset, t)) {
      if (spec.test_region.contains(p.position)) ++inside;
    }
    if (inside >= spec.min_peds) {
      starts.push_back(t);
      last = t;
    }
  }
  return starts;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 finalizer over a combination of the three inputs
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1) + 0xbf58476d1ce4e5b9ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kPlannerStream = 1;
constexpr std::uint64_t kLidarStream = 2;

std::vector<Circle> circles_of(std::span<const TrackedPosition> peds, double radius) {
  std::vector<Circle> out;
  out.reserve(peds.size());
  for (const auto& p : peds) out.push_back({p.position, radius});
  return out;
}

/// Per-trial perception and planning state for one method.
class Pipeline {
 public:
  Pipeline(const ScenarioSpec& spec, const PipelineConfig& config)
      : spec_(spec), config_(config), scan_tracker_(config.scan) {
    if (spec.method.oracle == OracleKind::linear) {
      oracle_ = std::make_unique<LinearOracle>();
    } else if (spec.method.oracle == OracleKind::external) {
      oracle_ = std::make_unique<ExternalOracle>(config.oracle_command, config.oracle_timeout_ms);
    }
  }

  /// Primes velocity estimation with the frame one step before the trial.
  void warm_up(std::span<const TrackedPosition> peds, Point2 robot, std::uint64_t seed) {
    previous_ = {peds.begin(), peds.end()};
    if (spec_.perception == Perception::lidar) {
      const auto circles = circles_of(peds, config_.lidar.pedestrian_radius);
      scan_tracker_.update(simulate_scan(robot, circles, config_.lidar, seed), spec_.dt);
    }
  }

  ControlPlan step(long k, const RobotState& robot, std::span<const TrackedPosition> peds, const NavigationTask& task,
                   std::uint64_t seed, std::vector<std::vector<Point2>>* spaces_out) {
    std::vector<AugmentedEntity> entities;
    if (spec_.perception == Perception::perfect) {
      entities = augment_pedestrians(peds, previous_, spec_.dt);
    } else {
      const auto circles = circles_of(peds, config_.lidar.pedestrian_radius);
      const Scan scan = simulate_scan(robot.position, circles, config_.lidar, derive_seed(seed, kLidarStream, k),
                                      static_cast<double>(k) * spec_.dt);
      entities = scan_tracker_.update(scan, spec_.dt);
    }
    previous_ = {peds.begin(), peds.end()};

    MpcParams mpc = config_.mpc;
    mpc.dt = spec_.dt;
    mpc.seed = derive_seed(seed, kPlannerStream, k);
    const bool predict = spec_.method.oracle != OracleKind::none;

    switch (spec_.method.representation) {
      case Representation::ped:
      case Representation::lidar:
        return plan_entities(robot, entities, predict, task, mpc);
      case Representation::group_edge: {
        const auto groups = assign_groups(entities, config_.grouping);
        std::vector<GroupSpace> pentagons;
        std::vector<GroupSpace> fallback;
        for (const auto& g : groups) {
          auto s = edge_spaces(g, robot.position, config_.grouping, fallback);
          pentagons.insert(pentagons.end(), s.begin(), s.end());
        }
        update_histories(keypoints_, pentagons, k, config_.prediction);
        const auto fresh = keypoints_.fresh(k);
        if (spaces_out) {
          for (const auto& s : pentagons) spaces_out->emplace_back(s.outline().begin(), s.outline().end());
          for (const auto& s : fallback) spaces_out->emplace_back(s.outline().begin(), s.outline().end());
        }
        ControlPlan p = plan(robot, fresh, oracle_.get(), task, mpc, config_.grouping, fallback);
        if (p.oracle_fallback) ++oracle_fallbacks_;
        return p;
      }
      case Representation::group_hull: {
        const auto groups = assign_groups(entities, config_.grouping);
        std::vector<GroupSpace> hulls;
        hulls.reserve(groups.size());
        for (const auto& g : groups) hulls.push_back(convex_hull_space(g, config_.grouping));
        update_hull_histories(hulls_, hulls, k, config_.prediction);
        const auto fresh = hulls_.fresh(k);
        if (spaces_out) {
          for (const auto& s : hulls) spaces_out->emplace_back(s.outline().begin(), s.outline().end());
        }
        std::vector<std::vector<GroupSpace>> per_step(mpc.horizon);
        for (const auto& h : fresh) {
          if (predict) {
            const auto future = predict_hull_linear(h.latest, h.centroids, mpc.horizon, spec_.dt);
            for (std::size_t s = 0; s < mpc.horizon; ++s) per_step[s].push_back({h.track_id, future[s]});
          } else {
            for (auto& step_spaces : per_step) step_spaces.push_back({h.track_id, h.latest});
          }
        }
        const SpaceClearance model(std::move(per_step));
        return optimize(robot, task, mpc, model);
      }
    }
    throw std::logic_error("unhandled representation");
  }

  std::size_t oracle_fallbacks() const { return oracle_fallbacks_; }

 private:
  const ScenarioSpec& spec_;
  const PipelineConfig& config_;
  std::unique_ptr<KeypointOracle> oracle_;
  ScanTracker scan_tracker_;
  KeypointTracker keypoints_;
  HullTracker hulls_;
  std::vector<TrackedPosition> previous_;
  std::size_t oracle_fallbacks_ = 0;
};

}  // namespace

TrialResult run_trial(const ScenarioSpec& spec, const PipelineConfig& config, const TrajectoryDataset& dataset,
                      double trial_start, std::uint64_t seed, const StepObserver& observer) {
  spec.validate();
  TrialResult r;
  r.method = spec.method.name();
  r.task = spec.task;
  r.mode = spec.mode;
  r.perception = spec.perception;
  r.seed = seed;
  r.trial_start = trial_start;
  r.goal = spec.robot_goal;
  r.min_dist = std::numeric_limits<double>::infinity();
  r.mean_step_time = std::numeric_limits<double>::quiet_NaN();

  const NavigationTask task{spec.robot_start, spec.robot_goal};
  RobotState robot{spec.robot_start, bearing(spec.robot_start, spec.robot_goal)};
  Pipeline pipeline(spec, config);

  std::optional<CrowdSimulation> sim;
  if (spec.mode == Mode::online) sim.emplace(crowd_from_dataset(dataset, trial_start, config.orca));
  auto pedestrians_at = [&](long k) {
    if (sim) return sim->positions();
    return replay_step(dataset, trial_start + static_cast<double>(k) * spec.dt);
  };

  pipeline.warm_up(replay_step(dataset, trial_start - spec.dt), robot.position, derive_seed(seed, kLidarStream, 0));
  std::vector<TrackedPosition> peds = pedestrians_at(0);
  Point2 robot_velocity;

  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * spec.dt;
    r.trajectory.push_back({t, robot.position});
    if (observer) observer(t, robot.position);

    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& p : peds) nearest = std::min(nearest, distance(p.position, robot.position));
    r.min_dist = std::min(r.min_dist, nearest);
    if (nearest < spec.collision_radius) {
      r.outcome = Outcome::collision;
      break;
    }
    if (distance(robot.position, spec.robot_goal) < spec.goal_radius) {
      r.outcome = Outcome::reached;
      break;
    }
    if (t > spec.timeout) {
      r.outcome = Outcome::timeout;
      break;
    }

    std::vector<std::vector<Point2>> spaces;
    const auto t0 = std::chrono::steady_clock::now();
    const ControlPlan p = pipeline.step(k, robot, peds, task, seed, config.record_frames ? &spaces : nullptr);
    if (config.measure_time) {
      r.step_times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    if (config.record_frames) {
      Frame f{t, robot.position, {}, std::move(spaces)};
      for (const auto& q : peds) f.pedestrians.push_back(q.position);
      r.frames.push_back(std::move(f));
    }

    const RobotState next = p.states.at(1);
    robot_velocity = (next.position - robot.position) / spec.dt;
    r.path_length += distance(next.position, robot.position);
    robot = next;

    if (sim) {
      sim->step(OrcaDisc{robot.position, robot_velocity, config.orca.robot_radius}, spec.dt);
    }
    peds = pedestrians_at(k + 1);
  }

  r.success = r.outcome == Outcome::reached;
  r.oracle_fallbacks = pipeline.oracle_fallbacks();
  if (config.measure_time && !r.step_times.empty()) {
    double sum = 0.0;
    for (double s : r.step_times) sum += s;
    r.mean_step_time = sum / static_cast<double>(r.step_times.size());
  }
  return r;
}

AggregateReport aggregate(std::vector<TrialResult> results) {
  AggregateReport report;
  std::map<std::string, std::size_t> index;
  struct Acc {
    std::size_t n = 0, successes = 0, n_dist = 0, n_time = 0;
    double dist = 0.0, path = 0.0, time = 0.0;
  };
  std::vector<Acc> acc;
  for (const auto& r : results) {
    auto [it, inserted] = index.emplace(r.method, acc.size());
    if (inserted) {
      acc.emplace_back();
      report.methods.push_back({r.method});
    }
    Acc& a = acc[it->second];
    ++a.n;
    if (r.success) ++a.successes;
    a.path += r.path_length;
    if (std::isfinite(r.min_dist)) {
      a.dist += r.min_dist;
      ++a.n_dist;
    }
    if (std::isfinite(r.mean_step_time)) {
      a.time += r.mean_step_time;
      ++a.n_time;
    }
  }
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const Acc& a = acc[i];
    MethodSummary& m = report.methods[i];
    const double n = static_cast<double>(a.n);
    m.n_trials = a.n;
    m.success_rate = static_cast<double>(a.successes) / n;
    m.mean_min_dist = a.n_dist > 0 ? a.dist / static_cast<double>(a.n_dist) : kNaN;
    m.mean_path_length = a.path / n;
    m.mean_step_time = a.n_time > 0 ? a.time / static_cast<double>(a.n_time) : kNaN;
  }
  report.trials = std::move(results);
  return report;
}

}  // namespace crowdnav
