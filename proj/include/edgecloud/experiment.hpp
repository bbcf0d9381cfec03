#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgecloud/config.hpp"
#include "edgecloud/metrics.hpp"

namespace edgecloud::experiment {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// The evaluation workload of a run; empty when n_tasks is 0.
sim::Workload make_workload(const config::RunConfig& config);

struct TrainedPredictor {
  predictor::PreferencePredictor model;
  predictor::TrainingReport report;
  double holdout_accuracy = 0.0;
  double label_rate = 0.0;  // fraction of compute-preferring training labels
};

/// Trains on simulator-labeled windows of a workload drawn from the
/// "predictor-data" stream and scores a disjoint "predictor-holdout" workload.
TrainedPredictor train_predictor(const config::RunConfig& config, const std::string& version);

/// Loads the configured weights, or trains in-process when none are given.
predictor::PreferencePredictor obtain_predictor(const config::RunConfig& config, const std::string& version);

/// A matrix row: a baseline, or CDIO with one ablation.
struct PolicyChoice {
  policies::Kind kind = policies::Kind::Cdio;
  policies::Ablation ablation = policies::Ablation::Both;

  /// "cdio" for the full scheduler, "cdio_rpp" / "cdio_cdco" for ablations,
  /// the baseline name otherwise.
  std::string row_name() const;
  bool needs_predictions() const { return kind == policies::Kind::Cdio && ablation != policies::Ablation::Cdco; }
};

struct CellResult {
  sim::Trace trace;
  metrics::RunReport report;
};

/// Simulates one policy on `workload`, whose tasks must already carry
/// predictions when the policy uses them.
CellResult run_cell(const config::RunConfig& config, const sim::Workload& workload, const std::string& version,
                    sim::BandwidthMode mode, const PolicyChoice& choice);

/// Copy of `workload` with every task's predicted preference filled in.
sim::Workload with_predictions(const sim::Workload& workload, const predictor::PreferencePredictor& predictor);

/// `train`: writes predictor_<version>.json and training_<version>.csv into
/// the output directory and prints the held-out accuracy.
int cmd_train(const config::RunConfig& config, std::ostream& out);

/// `run`: predict, place, simulate; writes trace_tasks.csv, trace_slots.csv,
/// report.json and config.json.
int cmd_run(const config::RunConfig& config, const std::string& policy, std::ostream& out);

/// `matrix`: every policy (CDIO once per ablation) x version x bandwidth mode.
/// Writes matrix.csv, comparison.csv (deltas against all_cloud, or the first
/// row when all_cloud is absent), reports.json and config.json.
int cmd_matrix(const config::RunConfig& config, const std::vector<policies::Ablation>& ablations,
               std::ostream& out);

}  // namespace edgecloud::experiment
