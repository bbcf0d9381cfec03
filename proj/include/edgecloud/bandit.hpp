#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edgecloud/rng.hpp"
#include "edgecloud/scheduler.hpp"

namespace edgecloud::scheduler {

/// What to do when no arm of a task passes the feasibility screen.
enum class Fallback : std::uint8_t { MinCost, MaxFeasibility };

struct BanditParams {
  double alpha = 0.9;
  double beta = 0.9;
  double phi = 1.0;
  double exploration = 1.5;            // c in sqrt(c ln T / n)
  double feasibility_threshold = 0.3;  // minimum empirical feasible rate
  Fallback fallback = Fallback::MinCost;

  /// Throws DomainError on out-of-range values.
  void validate() const;
};

struct ArmStats {
  std::uint64_t count = 0;
  double mean_cost = 0.0;
  std::uint64_t feasible = 0;

  double feasible_rate() const { return count ? static_cast<double>(feasible) / static_cast<double>(count) : 1.0; }
};

/// Combinatorial UCB over (task class, server) base arms with costs to be
/// minimized: each arm is scored by its lower confidence bound
/// mean - scale * sqrt(c ln T / count), scale being the largest cost seen so
/// far so the bonus is unit-free.
class CucbCore {
 public:
  CucbCore(std::size_t classes, std::size_t servers, BanditParams params);

  /// Advances T. Call once per slot before selecting.
  void begin_round() { ++round_; }
  std::uint64_t round() const { return round_; }

  std::size_t classes() const { return classes_; }
  std::size_t servers() const { return servers_; }
  const BanditParams& params() const { return params_; }
  const ArmStats& arm(std::size_t cls, std::size_t server) const;

  /// Lower confidence bound on the arm's cost; -inf for an unplayed arm.
  double optimistic_cost(std::size_t cls, std::size_t server) const;

  /// Server for one task of class `cls` among `candidates` (all servers when
  /// empty). Unplayed arms come first, starting with `preferred`; then the
  /// lowest optimistic cost among arms whose feasible rate passes the screen;
  /// if none passes, the fallback rule. Ties go to the lowest server index.
  /// Throws IndexError on a bad class or candidate.
  std::size_t select(std::size_t cls, std::span<const std::size_t> candidates = {},
                     std::optional<std::size_t> preferred = std::nullopt) const;

  void update(std::size_t cls, std::size_t server, double cost, bool feasible);

 private:
  std::size_t index(std::size_t cls, std::size_t server) const;

  std::size_t classes_;
  std::size_t servers_;
  BanditParams params_;
  std::uint64_t round_ = 0;
  double cost_scale_ = 0.0;
  std::vector<ArmStats> arms_;
};

/// Task class = (preference, complexity tercile, delay-requirement tercile).
/// Without the preference dimension there are 9 classes instead of 18.
struct TaskClasses {
  double delay_lo = 0.2;
  double delay_hi = 0.6;
  bool use_preference = true;

  std::size_t count() const { return use_preference ? 18 : 9; }
  std::size_t classify(const Task& task) const;
};

/// What happens to a task that failed on an edge server. Learned escalates
/// only while the task's class still passes the feasibility screen on the
/// cloud.
enum class Escalate : std::uint8_t { Always, Learned, Never };

std::string_view to_string(Escalate e);
/// "always", "learned" or "never". Throws ConfigError.
Escalate parse_escalate(std::string_view text);

struct CrossDomainOptions {
  BanditParams bandit;
  TaskClasses classes;
  bool random_initial = false;  // guide cold start by a random server instead of the preference
  Escalate escalate = Escalate::Learned;
  std::uint64_t seed = 0;       // only used with random_initial
  std::string name = "cdio";
};

/// Per-slot feedback loop: place by CUCB (cold start guided by the predicted
/// preference), learn per-task costs, and send tasks that missed a requirement
/// on an edge server to the cloud in the next slot.
class CrossDomainScheduler : public Policy {
 public:
  /// Servers must carry ids 0..M-1 in order with exactly one cloud server.
  /// Throws NoServerError otherwise.
  CrossDomainScheduler(std::vector<ServerSpec> servers, CrossDomainOptions options);

  std::string_view name() const override { return options_.name; }
  AllocationScheme place(std::uint32_t slot, std::span<const Task> tasks) override;
  std::vector<Escalation> feedback(const AllocationScheme& scheme, const SlotOutcome& outcome,
                                   std::span<const Task> tasks) override;

  const CucbCore& core() const { return core_; }

 private:
  std::vector<ServerSpec> servers_;
  CrossDomainOptions options_;
  CucbCore core_;
  ServerId cloud_;
  Rng rng_;
};

}  // namespace edgecloud::scheduler
