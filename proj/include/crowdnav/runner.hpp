#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "crowdnav/bench.hpp"
#include "crowdnav/config.hpp"

namespace crowdnav {

struct TrialJob {
  ScenarioSpec spec;
  std::shared_ptr<const TrajectoryDataset> dataset;
  double start = 0.0;
  std::uint64_t seed = 0;
};

/// Synthetic crowd for one seed; the group count is drawn from the configured range.
TrajectoryDataset synthetic_scene(std::uint64_t seed, const CrowdConfig& crowd);

/// Jobs for `trials` consecutive seeds from `config.seeds.base`, method-major,
/// so every method sees the same scenes. Dataset sources use one qualifying
/// start per seed and may yield fewer trials; synthetic scenes start at their
/// first qualifying time (or 0). Throws ConfigError for invalid methods.
std::vector<TrialJob> plan_jobs(const RunConfig& config, std::span<const Method> methods, std::size_t trials);

/// Runs jobs on `threads` workers; results keep the job order.
std::vector<TrialResult> run_jobs(std::span<const TrialJob> jobs, const PipelineConfig& pipeline,
                                  std::size_t threads = 1);

}  // namespace crowdnav
