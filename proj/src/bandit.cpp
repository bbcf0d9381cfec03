#include "edgecloud/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "edgecloud/error.hpp"

namespace edgecloud::scheduler {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t tercile(double v, double lo, double hi) {
  if (!(hi > lo)) return 0;
  const double u = (v - lo) / (hi - lo);
  if (u < 1.0 / 3.0) return 0;
  if (u < 2.0 / 3.0) return 1;
  return 2;
}

}  // namespace

void BanditParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0)) {
    throw DomainError("alpha and beta must lie in (0, 1]");
  }
  if (!(phi >= 0.0)) throw DomainError("phi must be >= 0");
  if (!(exploration >= 0.0)) throw DomainError("exploration constant must be >= 0");
  if (!(feasibility_threshold >= 0.0 && feasibility_threshold <= 1.0)) {
    throw DomainError("feasibility threshold must lie in [0, 1]");
  }
}

CucbCore::CucbCore(std::size_t classes, std::size_t servers, BanditParams params)
    : classes_(classes), servers_(servers), params_(params), arms_(classes * servers) {
  params_.validate();
  if (classes == 0) throw DomainError("bandit needs at least one task class");
  if (servers == 0) throw NoServerError("bandit needs at least one server");
}

std::size_t CucbCore::index(std::size_t cls, std::size_t server) const {
  if (cls >= classes_) throw IndexError("task class " + std::to_string(cls) + " out of range");
  if (server >= servers_) throw IndexError("server " + std::to_string(server) + " out of range");
  return cls * servers_ + server;
}

const ArmStats& CucbCore::arm(std::size_t cls, std::size_t server) const { return arms_[index(cls, server)]; }

double CucbCore::optimistic_cost(std::size_t cls, std::size_t server) const {
  const ArmStats& a = arm(cls, server);
  if (a.count == 0) return -kInf;
  const double t = static_cast<double>(std::max<std::uint64_t>(round_, 1));
  const double bonus = std::sqrt(params_.exploration * std::log(t) / static_cast<double>(a.count));
  return a.mean_cost - cost_scale_ * bonus;
}

std::size_t CucbCore::select(std::size_t cls, std::span<const std::size_t> candidates,
                             std::optional<std::size_t> preferred) const {
  std::vector<std::size_t> all;
  if (candidates.empty()) {
    all.resize(servers_);
    for (std::size_t s = 0; s < servers_; ++s) all[s] = s;
    candidates = all;
  }
  std::vector<std::size_t> order(candidates.begin(), candidates.end());
  std::sort(order.begin(), order.end());
  for (std::size_t s : order) index(cls, s);

  if (preferred && std::binary_search(order.begin(), order.end(), *preferred) &&
      arm(cls, *preferred).count == 0) {
    return *preferred;
  }
  for (std::size_t s : order) {
    if (arm(cls, s).count == 0) return s;
  }

  std::optional<std::size_t> best;
  double best_cost = kInf;
  for (std::size_t s : order) {
    if (arm(cls, s).feasible_rate() < params_.feasibility_threshold) continue;
    const double c = optimistic_cost(cls, s);
    if (!best || c < best_cost) {
      best = s;
      best_cost = c;
    }
  }
  if (best) return *best;

  for (std::size_t s : order) {
    const double c = optimistic_cost(cls, s);
    if (!best) {
      best = s;
      best_cost = c;
      continue;
    }
    if (params_.fallback == Fallback::MaxFeasibility) {
      const double rate = arm(cls, s).feasible_rate();
      const double best_rate = arm(cls, *best).feasible_rate();
      if (rate > best_rate || (rate == best_rate && c < best_cost)) {
        best = s;
        best_cost = c;
      }
    } else if (c < best_cost) {
      best = s;
      best_cost = c;
    }
  }
  return *best;
}

void CucbCore::update(std::size_t cls, std::size_t server, double cost, bool feasible) {
  if (!std::isfinite(cost)) throw DomainError("arm cost must be finite");
  ArmStats& a = arms_[index(cls, server)];
  ++a.count;
  a.mean_cost += (cost - a.mean_cost) / static_cast<double>(a.count);
  if (feasible) ++a.feasible;
  cost_scale_ = std::max(cost_scale_, std::abs(cost));
}

std::string_view to_string(Escalate e) {
  switch (e) {
    case Escalate::Always: return "always";
    case Escalate::Learned: return "learned";
    case Escalate::Never: return "never";
  }
  return "?";
}

Escalate parse_escalate(std::string_view text) {
  for (Escalate e : {Escalate::Always, Escalate::Learned, Escalate::Never}) {
    if (to_string(e) == text) return e;
  }
  throw ConfigError("unknown escalation rule '" + std::string(text) + "'");
}

std::size_t TaskClasses::classify(const Task& task) const {
  const std::size_t c = tercile(task.complexity, 0.0, 1.0);
  const std::size_t d = tercile(task.delay_req_s, delay_lo, delay_hi);
  const std::size_t base = c * 3 + d;
  if (!use_preference) return base;
  return (task.predicted_pref == Preference::ComputePreferring ? 9 : 0) + base;
}

CrossDomainScheduler::CrossDomainScheduler(std::vector<ServerSpec> servers, CrossDomainOptions options)
    : servers_(std::move(servers)),
      options_(std::move(options)),
      core_(options_.classes.count(), servers_.size(), options_.bandit),
      cloud_(cloud_server(servers_)),
      rng_(options_.seed) {
  for (std::size_t i = 0; i < servers_.size(); ++i) {
    if (servers_[i].id != i) throw NoServerError("server ids must be 0..M-1 in order");
  }
}

AllocationScheme CrossDomainScheduler::place(std::uint32_t slot, std::span<const Task> tasks) {
  core_.begin_round();
  AllocationScheme guide;
  if (options_.random_initial) {
    guide.slot = slot;
    for (const auto& t : tasks) guide.assignments.push_back({t.id, static_cast<ServerId>(rng_.below(servers_.size()))});
  } else {
    guide = initial_placement(tasks, servers_, slot);
  }

  AllocationScheme scheme;
  scheme.slot = slot;
  scheme.assignments.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::size_t cls = options_.classes.classify(tasks[i]);
    const std::size_t server = core_.select(cls, {}, guide.assignments[i].server);
    scheme.assignments.push_back({tasks[i].id, static_cast<ServerId>(server)});
  }
  return scheme;
}

std::vector<Escalation> CrossDomainScheduler::feedback(const AllocationScheme& scheme, const SlotOutcome& outcome,
                                                       std::span<const Task> tasks) {
  if (outcome.tasks.size() != tasks.size() || scheme.assignments.size() != tasks.size()) {
    throw MismatchError("feedback outcome does not match the slot's tasks");
  }
  std::unordered_map<TaskId, const Task*> by_id;
  for (const auto& t : tasks) by_id.emplace(t.id, &t);

  std::vector<Escalation> escalations;
  for (const auto& o : outcome.tasks) {
    const auto it = by_id.find(o.task);
    if (it == by_id.end()) throw MismatchError("outcome for unknown task " + std::to_string(o.task));
    const Task& task = *it->second;
    if (scheme.server_of(o.task) != o.server) throw MismatchError("outcome server differs from the scheme");
    const bool ok = feasible(task, o.accuracy, o.delay_s);
    const std::size_t cls = options_.classes.classify(task);
    core_.update(cls, o.server, o.compute_tflop + options_.bandit.phi * o.bandwidth_mbps, ok);
    if (ok || servers_[o.server].tier != Tier::Edge) continue;
    if (options_.escalate == Escalate::Always ||
        (options_.escalate == Escalate::Learned &&
         core_.arm(cls, cloud_).feasible_rate() >= options_.bandit.feasibility_threshold)) {
      escalations.push_back({task, cloud_});
    }
  }
  return escalations;
}

}  // namespace edgecloud::scheduler
