#include "edgecloud/scheduler.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>

#include "edgecloud/error.hpp"

namespace edgecloud::scheduler {

ServerId AllocationScheme::server_of(TaskId task) const {
  for (const auto& a : assignments) {
    if (a.task == task) return a.server;
  }
  throw IndexError("task " + std::to_string(task) + " is not in the scheme");
}

void validate(const AllocationScheme& scheme, std::span<const Task> tasks,
              std::span<const ServerSpec> servers) {
  if (scheme.assignments.size() != tasks.size()) {
    throw MismatchError("scheme has " + std::to_string(scheme.assignments.size()) + " assignments for " +
                        std::to_string(tasks.size()) + " tasks");
  }
  std::unordered_map<TaskId, int> seen;
  for (const auto& t : tasks) seen[t.id] = 0;
  for (const auto& a : scheme.assignments) {
    auto it = seen.find(a.task);
    if (it == seen.end()) throw MismatchError("scheme assigns unknown task " + std::to_string(a.task));
    if (++it->second > 1) throw MismatchError("task " + std::to_string(a.task) + " assigned twice");
    const bool exists = std::any_of(servers.begin(), servers.end(),
                                    [&](const ServerSpec& s) { return s.id == a.server; });
    if (!exists) throw NoServerError("scheme uses unknown server " + std::to_string(a.server));
  }
}

double slot_cost(const SlotOutcome& outcome, double phi) {
  return outcome.compute_tflop + phi * outcome.bandwidth_mbps;
}

double objective(std::span<const SlotOutcome> history, double phi) {
  if (history.empty()) throw EmptyHistoryError("objective of an empty history");
  if (!(phi >= 0.0)) throw DomainError("phi must be >= 0");
  double sum = 0.0;
  for (const auto& o : history) sum += slot_cost(o, phi);
  return sum / static_cast<double>(history.size());
}

double reward(std::span<const SlotOutcome> history, double phi) { return -objective(history, phi); }

bool feasible(const Task& task, double accuracy, double delay_s) {
  return accuracy >= task.accuracy_req && delay_s <= task.delay_req_s;
}

ServerId cloud_server(std::span<const ServerSpec> servers) {
  const ServerSpec* found = nullptr;
  for (const auto& s : servers) {
    if (s.tier != Tier::Cloud) continue;
    if (found) throw NoServerError("more than one cloud server");
    found = &s;
  }
  if (!found) throw NoServerError("no cloud server");
  return found->id;
}

std::vector<ServerId> edge_servers(std::span<const ServerSpec> servers) {
  std::vector<ServerId> ids;
  for (const auto& s : servers) {
    if (s.tier == Tier::Edge) ids.push_back(s.id);
  }
  if (ids.empty()) throw NoServerError("no edge server");
  std::sort(ids.begin(), ids.end());
  return ids;
}

AllocationScheme initial_placement(std::span<const Task> tasks, std::span<const ServerSpec> servers,
                                   std::uint32_t slot) {
  const ServerId cloud = cloud_server(servers);
  const std::vector<ServerId> edges = edge_servers(servers);
  std::vector<std::size_t> load(edges.size(), 0);

  AllocationScheme scheme;
  scheme.slot = slot;
  scheme.assignments.reserve(tasks.size());
  for (const auto& t : tasks) {
    if (t.predicted_pref == Preference::ComputePreferring) {
      scheme.assignments.push_back({t.id, cloud});
      continue;
    }
    const auto k = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    ++load[k];
    scheme.assignments.push_back({t.id, edges[k]});
  }
  return scheme;
}

double approximate_regret(std::uint64_t rounds, double alpha, double beta, double r_max, double reward_sum) {
  return static_cast<double>(rounds) * alpha * beta * r_max - reward_sum;
}

RegretTracker::RegretTracker(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0)) {
    throw DomainError("alpha and beta must lie in (0, 1]");
  }
}

void RegretTracker::add(double r) {
  ++rounds_;
  reward_sum_ += r;
  best_ = std::max(best_, r);
}

double RegretTracker::regret(double r_max) const {
  return approximate_regret(rounds_, alpha_, beta_, r_max, reward_sum_);
}

}  // namespace edgecloud::scheduler
