#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "edgecloud/complexity.hpp"
#include "edgecloud/predictor.hpp"
#include "edgecloud/rng.hpp"
#include "edgecloud/scheduler.hpp"
#include "edgecloud/types.hpp"

namespace edgecloud::sim {

enum class BandwidthMode : std::uint8_t { Stable, Fluctuating };

std::string_view to_string(BandwidthMode mode);
/// "stable" or "fluctuating"; throws ConfigError otherwise.
BandwidthMode parse_bandwidth_mode(std::string_view text);

/// WAN bandwidth per slot. Fluctuating samples are uniform in
/// base * [1 - fluctuation, 1 + fluctuation] and depend only on (seed, slot).
struct BandwidthModel {
  BandwidthMode mode = BandwidthMode::Stable;
  double base_mbps = 300.0;
  double fluctuation = 0.2;
  std::uint64_t seed = 0;

  double sample(std::uint64_t slot) const;
};

/// Task generator settings. Arrivals are uniform over a horizon of
/// ceil(n_tasks / arrival_rate) slots.
struct WorkloadSpec {
  std::size_t n_tasks = 10000;
  double arrival_rate = 50.0;  // mean tasks per slot
  double acc_lo = 50.0, acc_hi = 80.0;
  double delay_lo = 0.2, delay_hi = 0.6;
  std::size_t frame_side = 32;
  double frame_width = 960.0, frame_height = 540.0;  // data size equivalent
  double bits_per_pixel = 24.0;
  double compression_ratio = 0.1;
  std::uint64_t seed = 0;

  /// Throws ConfigError on inverted or out-of-domain ranges.
  void validate() const;
  double data_size_mbit() const;
  std::uint32_t horizon_slots() const;
};

struct Workload {
  std::vector<Task> tasks;  // sorted by (arrival_slot, id); complexity scaled to [0, 1]
  std::vector<double> raw_complexity;
  std::vector<complexity::Frame> frames;  // only when requested
  complexity::MinMaxScaler scaler;
  std::uint32_t horizon_slots = 0;
  double max_delay_req = 0.6;
};

/// Textures: 1/5 constant, 1/5 smooth gradients, 3/5 gradient-noise blends.
complexity::Frame synthesize_frame(std::size_t side, Rng& rng);

/// Deterministic per spec (including seed).
Workload generate_workload(const WorkloadSpec& spec, bool keep_frames = false);

/// Seconds per task for `count` concurrent tasks: model FLOPs over FP16
/// throughput, slowed down linearly beyond max_concurrency.
double inference_delay(const ServerSpec& server, std::size_t count);

/// Throws DomainError unless bandwidth > 0.
double transmission_delay(double data_mbit, double bandwidth_mbps);

/// Completion times of transfers sharing one link fairly (processor sharing),
/// in input order.
std::vector<double> shared_link_times(std::span<const double> sizes_mbit, double capacity_mbps);

/// Deployed mAP minus a complexity penalty, clamped to [0, 100].
double realized_accuracy(const Task& task, const ServerSpec& server, double penalty);

struct WorldConfig {
  std::vector<ServerSpec> servers;  // ids 0..M-1, exactly one cloud
  BandwidthModel wan;
  double local_link_factor = 10.0;  // edge link = factor * WAN base
  double slot_s = 0.1;
  double preproc_s = 0.014;
  double accuracy_penalty = 10.0;  // mAP points lost at complexity 1

  /// Throws ConfigError / NoServerError on an unusable world.
  void validate() const;
  const ServerSpec& server(ServerId id) const;
  double local_link_mbps() const { return local_link_factor * wan.base_mbps; }
};

struct DelayBreakdown {
  double preproc = 0.0;
  double transmission = 0.0;
  double inference = 0.0;

  double total() const { return preproc + transmission + inference; }
};

/// Single task on `server` with a dedicated link of `bandwidth_mbps` while
/// `load` tasks share the server.
DelayBreakdown end_to_end_delay(const Task& task, const ServerSpec& server, double bandwidth_mbps, std::size_t load,
                                double preproc_s);

struct EnergyBreakdown {
  double work = 0.0;
  double idle = 0.0;
  double transmission = 0.0;

  double total() const { return work + idle + transmission; }
};

/// Everything a slot produced. Per-task vectors follow scheme order.
struct SlotResult {
  scheduler::SlotOutcome outcome;
  std::vector<DelayBreakdown> delays;
  std::vector<double> task_energy_j;  // work share + own transmission
  EnergyBreakdown energy;
  double wan_mbps = 0.0;
};

/// Runs one slot. WAN-bound transfers (cloud placements) share the sampled WAN
/// bandwidth; each edge's transfers share its local link. B_t counts WAN
/// traffic only. Throws MismatchError if the scheme does not cover `tasks`.
SlotResult evaluate_slot(const WorldConfig& world, const scheduler::AllocationScheme& scheme,
                         std::span<const Task> tasks);

struct SimulationOptions {
  double phi = 1.0;
  double alpha = 0.9;
  double beta = 0.9;
  bool count_failed_attempt_delay = true;  // escalated tasks keep the time already spent
};

/// Final record of one task.
struct TaskRecord {
  std::uint32_t slot = 0;  // slot of the final attempt
  TaskId task = 0;
  std::uint32_t arrival_slot = 0;
  ServerId server = 0;
  Tier tier = Tier::Edge;
  Preference predicted_pref = Preference::BandwidthPreferring;
  double accuracy_req = 0.0;
  double delay_req_s = 0.0;
  double accuracy = 0.0;
  double delay_s = 0.0;
  std::uint32_t attempts = 1;
  double compute_tflop = 0.0;
  double wan_mbit = 0.0;
  double energy_j = 0.0;

  bool accuracy_met() const { return accuracy >= accuracy_req; }
  bool delay_met() const { return delay_s <= delay_req_s; }
  bool feasible() const { return accuracy_met() && delay_met(); }
};

struct SlotRecord {
  std::uint32_t slot = 0;
  std::uint32_t tasks = 0;
  double compute_tflop = 0.0;
  double bandwidth_mbps = 0.0;
  double wan_mbps = 0.0;
  EnergyBreakdown energy;
  double reward = 0.0;
  double regret = 0.0;  // against the best slot reward seen so far
};

struct Trace {
  std::vector<TaskRecord> tasks;  // in completion order
  std::vector<SlotRecord> slots;
};

/// Runs the slot loop: new arrivals plus last slot's escalations are placed,
/// evaluated, and fed back, until the horizon has passed and nothing is
/// pending. `tasks` must be sorted by arrival slot.
Trace simulate(const WorldConfig& world, std::span<const Task> tasks, scheduler::Policy& policy,
               const SimulationOptions& options = {}, std::uint32_t horizon_slots = 0);

/// How ground-truth preference labels are derived from the world.
enum class LabelRule : std::uint8_t {
  /// Compute iff the edge model's catalog mAP is below A^q and an idle cloud
  /// round trip meets D^q with the given slack.
  CatalogAndSlack,
  /// Compute iff the edge model's catalog mAP is below A^q, or an idle cloud
  /// round trip meets D^q with the given slack.
  CatalogOrSlack,
  /// Compute iff the edge misses A^q, the cloud meets it, and an idle cloud
  /// round trip meets D^q with the given slack.
  CloudNeeded,
};

std::string_view to_string(LabelRule rule);
LabelRule parse_label_rule(std::string_view text);

/// Round trip of one task on an otherwise idle cloud over the WAN base rate.
double idle_cloud_delay(const WorldConfig& world, const Task& task);

int preference_label(const WorldConfig& world, const Task& task, LabelRule rule, double slack = 0.2);

/// Feature vectors of every task in workload order.
std::vector<predictor::FeatureVector> workload_features(const Workload& workload);

/// The `seq_len` features ending at index `end` (inclusive). Windows that
/// would start before the first task repeat the first task's features.
std::vector<predictor::FeatureVector> window_ending_at(std::span<const predictor::FeatureVector> features,
                                                       std::size_t end, int seq_len);

/// One window per task, labeled by `rule`.
std::vector<predictor::LabeledWindow> labeled_windows(const Workload& workload, const WorldConfig& world,
                                                      LabelRule rule, int seq_len, double slack = 0.2);

/// Writes predictor.predict_preference into every task of the workload.
void assign_predictions(Workload& workload, const predictor::PreferencePredictor& predictor);

}  // namespace edgecloud::sim
