#include "crowdnav/runner.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace crowdnav {

TrajectoryDataset synthetic_scene(std::uint64_t seed, const CrowdConfig& crowd) {
  SyntheticCrowdParams params = crowd.synthetic;
  const std::size_t span = crowd.groups_max - crowd.groups_min + 1;
  params.n_groups = crowd.groups_min + static_cast<std::size_t>(derive_seed(seed, 3) % span);
  return synthetic_crowd(seed, params);
}

std::vector<TrialJob> plan_jobs(const RunConfig& config, std::span<const Method> methods, std::size_t trials) {
  struct Scene {
    std::shared_ptr<const TrajectoryDataset> dataset;
    double start;
    std::uint64_t seed;
  };
  std::vector<Scene> scenes;
  const ScenarioSpec& base = config.scenario;

  switch (config.crowd.source) {
    case CrowdSource::none: {
      auto empty = std::make_shared<const TrajectoryDataset>();
      for (std::size_t i = 0; i < trials; ++i) scenes.push_back({empty, 0.0, config.seeds.base + i});
      break;
    }
    case CrowdSource::synthetic:
      for (std::size_t i = 0; i < trials; ++i) {
        const std::uint64_t seed = config.seeds.base + i;
        auto ds = std::make_shared<const TrajectoryDataset>(synthetic_scene(seed, config.crowd));
        const auto starts = generate_trials(*ds, base);
        scenes.push_back({ds, starts.empty() ? 0.0 : starts.front(), seed});
      }
      break;
    case CrowdSource::dataset: {
      std::shared_ptr<const TrajectoryDataset> ds;
      try {
        ds = std::make_shared<const TrajectoryDataset>(load_dataset(config.crowd.dataset_path, config.crowd.frame_dt));
      } catch (const DatasetError& e) {
        throw ConfigError("crowd.dataset_path", e.what());
      }
      const auto starts = generate_trials(*ds, base);
      for (std::size_t i = 0; i < trials && i < starts.size(); ++i) {
        scenes.push_back({ds, starts[i], config.seeds.base + i});
      }
      break;
    }
  }

  std::vector<TrialJob> jobs;
  jobs.reserve(scenes.size() * methods.size());
  for (const Method& m : methods) {
    ScenarioSpec spec = base;
    spec.method = m;
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("scenario.method", e.what());
    }
    if (m.oracle == OracleKind::external && config.pipeline.oracle_command.empty()) {
      throw ConfigError("oracle.command", "required by method " + m.name());
    }
    for (const auto& s : scenes) jobs.push_back({spec, s.dataset, s.start, s.seed});
  }
  return jobs;
}

std::vector<TrialResult> run_jobs(std::span<const TrialJob> jobs, const PipelineConfig& pipeline,
                                  std::size_t threads) {
  std::vector<TrialResult> results(jobs.size());
  if (threads <= 1 || jobs.size() <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      results[i] = run_trial(jobs[i].spec, pipeline, *jobs[i].dataset, jobs[i].start, jobs[i].seed);
    }
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = run_trial(jobs[i].spec, pipeline, *jobs[i].dataset, jobs[i].start, jobs[i].seed);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, jobs.size()); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace crowdnav
