#include "edgecloud/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "edgecloud/error.hpp"
#include "edgecloud/rng.hpp"

namespace edgecloud::sim {

using scheduler::AllocationScheme;
using scheduler::Escalation;
using scheduler::SlotOutcome;
using scheduler::TaskOutcome;

std::string_view to_string(BandwidthMode mode) {
  return mode == BandwidthMode::Stable ? "stable" : "fluctuating";
}

BandwidthMode parse_bandwidth_mode(std::string_view text) {
  if (text == "stable") return BandwidthMode::Stable;
  if (text == "fluctuating") return BandwidthMode::Fluctuating;
  throw ConfigError("unknown bandwidth mode '" + std::string(text) + "'");
}

double BandwidthModel::sample(std::uint64_t slot) const {
  if (mode == BandwidthMode::Stable || fluctuation == 0.0) return base_mbps;
  Rng rng(mix64(seed ^ mix64(slot + 1)));
  return rng.uniform(base_mbps * (1.0 - fluctuation), base_mbps * (1.0 + fluctuation));
}

void WorkloadSpec::validate() const {
  if (n_tasks == 0) throw ConfigError("workload needs at least one task");
  if (!(arrival_rate > 0.0)) throw ConfigError("arrival rate must be > 0");
  if (!(acc_lo <= acc_hi) || acc_lo < 0.0 || acc_hi > 100.0) {
    throw ConfigError("accuracy requirement range must satisfy 0 <= lo <= hi <= 100");
  }
  if (!(delay_lo <= delay_hi) || !(delay_lo > 0.0)) {
    throw ConfigError("delay requirement range must satisfy 0 < lo <= hi");
  }
  if (complexity::full_depth(frame_side, 2) < 1) throw ConfigError("frame side must be a power of 2 >= 2");
  if (!(frame_width > 0.0 && frame_height > 0.0 && bits_per_pixel > 0.0 && compression_ratio > 0.0)) {
    throw ConfigError("frame data-size parameters must be > 0");
  }
}

double WorkloadSpec::data_size_mbit() const {
  return frame_width * frame_height * bits_per_pixel * compression_ratio / 1e6;
}

std::uint32_t WorkloadSpec::horizon_slots() const {
  return static_cast<std::uint32_t>(std::ceil(static_cast<double>(n_tasks) / arrival_rate));
}

complexity::Frame synthesize_frame(std::size_t side, Rng& rng) {
  const double kind = rng.uniform();
  std::vector<double> px(side * side);
  if (kind < 0.2) {
    std::fill(px.begin(), px.end(), rng.uniform(-1.0, 1.0));
    return complexity::Frame(side, std::move(px));
  }

  const double theta = rng.uniform(0.0, 2.0 * M_PI);
  const double amplitude = rng.uniform(0.2, 1.0);
  const double cx = std::cos(theta), cy = std::sin(theta);
  const double span = std::abs(cx) + std::abs(cy);
  const double lo = std::min(0.0, cx) + std::min(0.0, cy);
  const double last = static_cast<double>(side - 1);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double proj = (static_cast<double>(c) / last * cx + static_cast<double>(r) / last * cy - lo) / span;
      px[r * side + c] = amplitude * (2.0 * proj - 1.0);
    }
  }
  if (kind >= 0.4) {
    const double rough = std::sqrt(rng.uniform());
    for (double& v : px) v = std::clamp((1.0 - rough) * v + rough * rng.uniform(-1.0, 1.0), -1.0, 1.0);
  }
  return complexity::Frame(side, std::move(px));
}

Workload generate_workload(const WorkloadSpec& spec, bool keep_frames) {
  spec.validate();
  Workload w;
  w.horizon_slots = spec.horizon_slots();
  w.max_delay_req = spec.delay_hi;

  Rng arrivals(spec.seed, "arrivals");
  std::vector<std::uint32_t> slots(spec.n_tasks);
  for (auto& s : slots) s = static_cast<std::uint32_t>(arrivals.below(w.horizon_slots));
  std::sort(slots.begin(), slots.end());

  Rng requirements(spec.seed, "requirements");
  Rng frames(spec.seed, "frames");
  const double size = spec.data_size_mbit();
  w.tasks.resize(spec.n_tasks);
  w.raw_complexity.resize(spec.n_tasks);
  for (std::size_t i = 0; i < spec.n_tasks; ++i) {
    Task& t = w.tasks[i];
    t.id = static_cast<TaskId>(i);
    t.arrival_slot = slots[i];
    t.data_size_mbit = size;
    t.accuracy_req = requirements.uniform(spec.acc_lo, spec.acc_hi);
    t.delay_req_s = requirements.uniform(spec.delay_lo, spec.delay_hi);
    complexity::Frame frame = synthesize_frame(spec.frame_side, frames);
    w.raw_complexity[i] = complexity::spatial_complexity(frame).total;
    if (keep_frames) w.frames.push_back(std::move(frame));
  }
  w.scaler = complexity::MinMaxScaler::fit(w.raw_complexity);
  for (std::size_t i = 0; i < spec.n_tasks; ++i) w.tasks[i].complexity = w.scaler.apply(w.raw_complexity[i]);
  return w;
}

double inference_delay(const ServerSpec& server, std::size_t count) {
  const double base = (server.model.gflops / 1000.0) / server.fp16_tflops;
  const double slowdown = std::max(1.0, static_cast<double>(count) / static_cast<double>(server.max_concurrency));
  return base * slowdown;
}

double transmission_delay(double data_mbit, double bandwidth_mbps) {
  if (!(bandwidth_mbps > 0.0)) throw DomainError("bandwidth must be > 0");
  return data_mbit / bandwidth_mbps;
}

std::vector<double> shared_link_times(std::span<const double> sizes_mbit, double capacity_mbps) {
  if (!(capacity_mbps > 0.0)) throw DomainError("bandwidth must be > 0");
  const std::size_t n = sizes_mbit.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sizes_mbit[a] < sizes_mbit[b]; });

  // While k transfers remain, each progresses at capacity / k.
  std::vector<double> done(n);
  double clock = 0.0;
  double sent = 0.0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    const std::size_t i = order[rank];
    const double remaining = static_cast<double>(n - rank);
    clock += (sizes_mbit[i] - sent) * remaining / capacity_mbps;
    sent = sizes_mbit[i];
    done[i] = clock;
  }
  return done;
}

double realized_accuracy(const Task& task, const ServerSpec& server, double penalty) {
  return std::clamp(server.model.map50 - penalty * task.complexity, 0.0, 100.0);
}

void WorldConfig::validate() const {
  scheduler::cloud_server(servers);
  scheduler::edge_servers(servers);
  for (std::size_t i = 0; i < servers.size(); ++i) {
    const ServerSpec& s = servers[i];
    if (s.id != i) throw NoServerError("server ids must be 0..M-1 in order");
    if (!(s.fp16_tflops > 0.0) || s.max_concurrency == 0) throw ConfigError("server throughput must be > 0");
    if (s.work_power_w < 0.0 || s.idle_power_w < 0.0 || s.tx_power_w < 0.0) throw ConfigError("power must be >= 0");
    if (!(s.model.gflops > 0.0)) throw ConfigError("server model FLOPs must be > 0");
  }
  if (!(wan.base_mbps > 0.0)) throw ConfigError("WAN bandwidth must be > 0");
  if (!(wan.fluctuation >= 0.0 && wan.fluctuation < 1.0)) throw ConfigError("fluctuation must lie in [0, 1)");
  if (!(local_link_factor > 0.0)) throw ConfigError("local link factor must be > 0");
  if (!(slot_s > 0.0)) throw ConfigError("slot length must be > 0");
  if (preproc_s < 0.0) throw ConfigError("pre-processing delay must be >= 0");
  if (accuracy_penalty < 0.0) throw ConfigError("accuracy penalty must be >= 0");
}

const ServerSpec& WorldConfig::server(ServerId id) const {
  if (id >= servers.size()) throw NoServerError("unknown server " + std::to_string(id));
  return servers[id];
}

DelayBreakdown end_to_end_delay(const Task& task, const ServerSpec& server, double bandwidth_mbps, std::size_t load,
                                double preproc_s) {
  return {preproc_s, transmission_delay(task.data_size_mbit, bandwidth_mbps),
          inference_delay(server, std::max<std::size_t>(load, 1))};
}

SlotResult evaluate_slot(const WorldConfig& world, const AllocationScheme& scheme, std::span<const Task> tasks) {
  scheduler::validate(scheme, tasks, world.servers);
  std::unordered_map<TaskId, const Task*> by_id;
  for (const auto& t : tasks) by_id.emplace(t.id, &t);

  const std::size_t n = scheme.assignments.size();
  const std::size_t m = world.servers.size();
  std::vector<std::vector<std::size_t>> on_server(m);
  for (std::size_t i = 0; i < n; ++i) on_server[scheme.assignments[i].server].push_back(i);

  SlotResult r;
  r.outcome.slot = scheme.slot;
  r.wan_mbps = world.wan.sample(scheme.slot);
  r.delays.resize(n);
  r.task_energy_j.assign(n, 0.0);
  r.outcome.tasks.resize(n);

  std::vector<double> tx(n, 0.0);
  std::vector<double> work_share(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const ServerSpec& s = world.servers[j];
    const auto& idx = on_server[j];
    if (idx.empty()) {
      r.energy.idle += s.idle_power_w * world.slot_s;
      continue;
    }
    std::vector<double> sizes;
    sizes.reserve(idx.size());
    for (std::size_t i : idx) sizes.push_back(by_id.at(scheme.assignments[i].task)->data_size_mbit);
    const double link = s.tier == Tier::Cloud ? r.wan_mbps : world.local_link_mbps();
    const std::vector<double> times = shared_link_times(sizes, link);
    const double busy = inference_delay(s, idx.size());
    const double share = s.work_power_w * busy / static_cast<double>(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t i = idx[k];
      tx[i] = times[k];
      r.delays[i] = {world.preproc_s, times[k], busy};
      work_share[i] = share;
    }
    r.energy.idle += s.idle_power_w * std::max(0.0, world.slot_s - busy);
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = scheme.assignments[i];
    const Task& task = *by_id.at(a.task);
    const ServerSpec& s = world.servers[a.server];
    TaskOutcome& o = r.outcome.tasks[i];
    o.task = a.task;
    o.server = a.server;
    o.accuracy = realized_accuracy(task, s, world.accuracy_penalty);
    o.delay_s = r.delays[i].total();
    o.compute_tflop = s.fp16_tflops * r.delays[i].inference;
    o.bandwidth_mbps = s.tier == Tier::Cloud ? task.data_size_mbit / world.slot_s : 0.0;
    const double tx_energy = s.tx_power_w * tx[i];
    r.task_energy_j[i] = work_share[i] + tx_energy;
    r.outcome.compute_tflop += o.compute_tflop;
    r.outcome.bandwidth_mbps += o.bandwidth_mbps;
    r.energy.work += work_share[i];
    r.energy.transmission += tx_energy;
  }
  return r;
}

namespace {

struct Carry {
  std::uint32_t attempts = 0;
  double compute = 0.0;
  double wan_mbit = 0.0;
  double energy = 0.0;
};

}  // namespace

Trace simulate(const WorldConfig& world, std::span<const Task> tasks, scheduler::Policy& policy,
               const SimulationOptions& options, std::uint32_t horizon_slots) {
  world.validate();
  for (std::size_t i = 1; i < tasks.size(); ++i) {
    if (tasks[i].arrival_slot < tasks[i - 1].arrival_slot) throw DomainError("tasks must be sorted by arrival slot");
  }
  if (!tasks.empty()) horizon_slots = std::max(horizon_slots, tasks.back().arrival_slot + 1);

  scheduler::RegretTracker regret(options.alpha, options.beta);
  std::unordered_map<TaskId, Carry> carry;
  std::vector<Escalation> pending;
  Trace trace;
  trace.tasks.reserve(tasks.size());

  std::size_t next = 0;
  for (std::uint32_t slot = 0; slot < horizon_slots || next < tasks.size() || !pending.empty(); ++slot) {
    std::vector<Task> batch;
    AllocationScheme scheme;
    scheme.slot = slot;
    for (const auto& e : pending) {
      batch.push_back(e.task);
      scheme.assignments.push_back({e.task.id, e.target});
    }
    const std::size_t first_new = next;
    while (next < tasks.size() && tasks[next].arrival_slot <= slot) ++next;
    if (next > first_new) {
      const std::span<const Task> arrivals = tasks.subspan(first_new, next - first_new);
      AllocationScheme placed = policy.place(slot, arrivals);
      scheduler::validate(placed, arrivals, world.servers);
      batch.insert(batch.end(), arrivals.begin(), arrivals.end());
      scheme.assignments.insert(scheme.assignments.end(), placed.assignments.begin(), placed.assignments.end());
    }

    const SlotResult result = evaluate_slot(world, scheme, batch);
    pending.clear();
    if (!batch.empty()) pending = policy.feedback(scheme, result.outcome, batch);

    std::unordered_map<TaskId, ServerId> retried;
    for (const auto& e : pending) {
      const ServerId from = scheme.server_of(e.task.id);
      if (world.server(e.target).tier <= world.server(from).tier) {
        throw MismatchError("task " + std::to_string(e.task.id) + " must escalate to a higher tier");
      }
      retried.emplace(e.task.id, e.target);
    }

    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Task& task = batch[i];
      const TaskOutcome& o = result.outcome.tasks[i];
      Carry& c = carry[task.id];
      ++c.attempts;
      c.compute += o.compute_tflop;
      c.wan_mbit += o.bandwidth_mbps * world.slot_s;
      c.energy += result.task_energy_j[i];
      if (retried.count(task.id)) continue;

      TaskRecord rec;
      rec.slot = slot;
      rec.task = task.id;
      rec.arrival_slot = task.arrival_slot;
      rec.server = o.server;
      rec.tier = world.server(o.server).tier;
      rec.predicted_pref = task.predicted_pref;
      rec.accuracy_req = task.accuracy_req;
      rec.delay_req_s = task.delay_req_s;
      rec.accuracy = o.accuracy;
      rec.delay_s = o.delay_s;
      if (options.count_failed_attempt_delay) {
        rec.delay_s += static_cast<double>(slot - task.arrival_slot) * world.slot_s;
      }
      rec.attempts = c.attempts;
      rec.compute_tflop = c.compute;
      rec.wan_mbit = c.wan_mbit;
      rec.energy_j = c.energy;
      trace.tasks.push_back(rec);
      carry.erase(task.id);
    }

    SlotRecord s;
    s.slot = slot;
    s.tasks = static_cast<std::uint32_t>(batch.size());
    s.compute_tflop = result.outcome.compute_tflop;
    s.bandwidth_mbps = result.outcome.bandwidth_mbps;
    s.wan_mbps = result.wan_mbps;
    s.energy = result.energy;
    s.reward = -scheduler::slot_cost(result.outcome, options.phi);
    regret.add(s.reward);
    s.regret = regret.regret(regret.best_reward());
    trace.slots.push_back(s);
  }
  return trace;
}

std::string_view to_string(LabelRule rule) {
  switch (rule) {
    case LabelRule::CatalogAndSlack: return "catalog_and_slack";
    case LabelRule::CatalogOrSlack: return "catalog_or_slack";
    case LabelRule::CloudNeeded: return "cloud_needed";
  }
  return "?";
}

LabelRule parse_label_rule(std::string_view text) {
  for (LabelRule r : {LabelRule::CatalogAndSlack, LabelRule::CatalogOrSlack, LabelRule::CloudNeeded}) {
    if (to_string(r) == text) return r;
  }
  throw ConfigError("unknown label rule '" + std::string(text) + "'");
}

double idle_cloud_delay(const WorldConfig& world, const Task& task) {
  const ServerSpec& cloud = world.server(scheduler::cloud_server(world.servers));
  return end_to_end_delay(task, cloud, world.wan.base_mbps, 1, world.preproc_s).total();
}

int preference_label(const WorldConfig& world, const Task& task, LabelRule rule, double slack) {
  const ServerSpec& cloud = world.server(scheduler::cloud_server(world.servers));
  const ServerSpec& edge = world.server(scheduler::edge_servers(world.servers).front());
  const bool timely = idle_cloud_delay(world, task) <= (1.0 - slack) * task.delay_req_s;
  const bool edge_short = edge.model.map50 < task.accuracy_req;
  if (rule == LabelRule::CatalogAndSlack) return (edge_short && timely) ? 1 : 0;
  if (rule == LabelRule::CatalogOrSlack) return (edge_short || timely) ? 1 : 0;
  const bool edge_misses = realized_accuracy(task, edge, world.accuracy_penalty) < task.accuracy_req;
  const bool cloud_meets = realized_accuracy(task, cloud, world.accuracy_penalty) >= task.accuracy_req;
  return (edge_misses && cloud_meets && timely) ? 1 : 0;
}

std::vector<predictor::FeatureVector> workload_features(const Workload& workload) {
  std::vector<predictor::FeatureVector> out;
  out.reserve(workload.tasks.size());
  const double horizon = std::max<double>(workload.horizon_slots, 1.0);
  for (const auto& t : workload.tasks) {
    out.push_back(predictor::make_feature(t, t.complexity, static_cast<double>(t.arrival_slot) / horizon,
                                          workload.max_delay_req));
  }
  return out;
}

std::vector<predictor::FeatureVector> window_ending_at(std::span<const predictor::FeatureVector> features,
                                                       std::size_t end, int seq_len) {
  if (end >= features.size()) throw IndexError("window end beyond the feature sequence");
  if (seq_len < 1) throw ShapeError("seq_len must be >= 1");
  std::vector<predictor::FeatureVector> w(static_cast<std::size_t>(seq_len));
  for (std::size_t k = 0; k < w.size(); ++k) {
    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(end) - static_cast<std::ptrdiff_t>(w.size() - 1 - k);
    w[k] = features[static_cast<std::size_t>(std::max<std::ptrdiff_t>(src, 0))];
  }
  return w;
}

std::vector<predictor::LabeledWindow> labeled_windows(const Workload& workload, const WorldConfig& world,
                                                      LabelRule rule, int seq_len, double slack) {
  const auto features = workload_features(workload);
  std::vector<predictor::LabeledWindow> out;
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    out.push_back({window_ending_at(features, i, seq_len), preference_label(world, workload.tasks[i], rule, slack)});
  }
  return out;
}

void assign_predictions(Workload& workload, const predictor::PreferencePredictor& predictor) {
  const auto features = workload_features(workload);
  for (std::size_t i = 0; i < features.size(); ++i) {
    workload.tasks[i].predicted_pref = predictor.predict_preference(window_ending_at(features, i, predictor.seq_len()));
  }
}

}  // namespace edgecloud::sim
