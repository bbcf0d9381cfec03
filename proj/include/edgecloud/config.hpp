#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgecloud/bandit.hpp"
#include "edgecloud/catalog.hpp"
#include "edgecloud/policies.hpp"
#include "edgecloud/predictor.hpp"
#include "edgecloud/simulator.hpp"
#include "edgecloud/training.hpp"

namespace edgecloud::config {

inline constexpr int kSchemaVersion = 1;

struct PredictorConfig {
  std::optional<std::filesystem::path> weights;  // trained in-process when absent
  predictor::Architecture architecture;
  predictor::TrainOptions train{200, 0.2, 1, 5.0, 0};
  std::size_t train_windows = 1000;
  std::size_t holdout_windows = 1000;
  sim::LabelRule label_rule = sim::LabelRule::CatalogAndSlack;
  double label_slack = 0.2;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::string version = "V1";
  sim::BandwidthMode bw_mode = sim::BandwidthMode::Stable;
  double bw_base_mbps = 300.0;
  double bw_fluctuation = 0.2;
  sim::WorkloadSpec workload;  // its seed is derived from `seed`
  std::size_t edge_count = 4;
  catalog::TierDefaults edge = catalog::kEdgeDefaults;
  catalog::TierDefaults cloud = catalog::kCloudDefaults;
  double local_link_factor = 10.0;
  double slot_s = 0.1;
  double preproc_s = 0.014;
  double accuracy_penalty = 10.0;
  scheduler::BanditParams bandit;
  scheduler::Escalate escalate = scheduler::Escalate::Learned;
  bool count_failed_attempt_delay = true;
  policies::Ablation ablation = policies::Ablation::Both;
  PredictorConfig predictor;
  // matrix axes
  std::vector<std::string> policies{"cdio", "all_edge", "all_cloud", "random", "greedy"};
  std::vector<std::string> versions{"V1", "V2", "V3", "V4"};
  std::vector<sim::BandwidthMode> bw_modes{sim::BandwidthMode::Stable, sim::BandwidthMode::Fluctuating};
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError on any invalid or inconsistent value, including a
  /// weights path that does not exist.
  void validate() const;
};

/// Parses a configuration document. Every key is optional; unknown keys and
/// a missing or unsupported schema_version raise ConfigError. Paths are taken
/// relative to the working directory.
RunConfig parse(const std::string& json_text);
RunConfig load(const std::filesystem::path& path);

/// The effective configuration as a document `parse` accepts.
std::string to_json(const RunConfig& config);

sim::WorldConfig make_world(const RunConfig& config, const std::string& version, sim::BandwidthMode mode);
sim::WorkloadSpec workload_spec(const RunConfig& config);
policies::PolicySettings policy_settings(const RunConfig& config);
sim::SimulationOptions simulation_options(const RunConfig& config);

}  // namespace edgecloud::config
