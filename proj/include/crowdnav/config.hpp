#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "crowdnav/bench.hpp"

namespace crowdnav {

/// Invalid configuration. `key()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& why)
      : std::runtime_error(key.empty() ? why : "config key '" + key + "': " + why), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class CrowdSource { none, synthetic, dataset };

struct CrowdConfig {
  CrowdSource source = CrowdSource::synthetic;
  std::string dataset_path;
  double frame_dt = 0.4;  ///< seconds per annotated frame of the dataset file
  /// Each synthetic scene draws its group count from [groups_min, groups_max].
  std::size_t groups_min = 3;
  std::size_t groups_max = 5;
  SyntheticCrowdParams synthetic;
};

struct SeedRange {
  std::uint64_t base = 0;
  std::size_t count = 10;
};

struct RunConfig {
  ScenarioSpec scenario;
  PipelineConfig pipeline;
  CrowdConfig crowd;
  SeedRange seeds;
  std::string output_dir = "out";

  /// Throws ConfigError naming the key whose value is invalid.
  void validate() const;
};

/// Strict JSON parse: unknown keys and wrong types are ConfigErrors. Missing
/// keys keep their defaults; a missing robot start/goal is placed by task.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Every key, so that parse_config(config_to_json(c)) reproduces `c`.
std::string config_to_json(const RunConfig& config);

std::string to_string(CrowdSource source);

}  // namespace crowdnav
