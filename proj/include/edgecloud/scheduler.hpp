#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "edgecloud/types.hpp"

namespace edgecloud::scheduler {

struct Assignment {
  TaskId task = 0;
  ServerId server = 0;
};

/// One super arm: the server chosen for every task of a slot.
struct AllocationScheme {
  std::uint32_t slot = 0;
  std::vector<Assignment> assignments;

  /// Throws IndexError if the task is not part of the scheme.
  ServerId server_of(TaskId task) const;
};

/// Throws MismatchError unless the scheme assigns each of `tasks` exactly once
/// and nothing else, NoServerError if a target server does not exist.
void validate(const AllocationScheme& scheme, std::span<const Task> tasks,
              std::span<const ServerSpec> servers);

/// Realized result of one task in one slot, with its share of the slot totals.
struct TaskOutcome {
  TaskId task = 0;
  ServerId server = 0;
  double accuracy = 0.0;  // mAP points
  double delay_s = 0.0;
  double compute_tflop = 0.0;
  double bandwidth_mbps = 0.0;
};

struct SlotOutcome {
  std::uint32_t slot = 0;
  std::vector<TaskOutcome> tasks;
  double compute_tflop = 0.0;   // U_t
  double bandwidth_mbps = 0.0;  // B_t
};

/// Mean over slots of U_t + phi * B_t. Throws EmptyHistoryError on an empty
/// history, DomainError if phi < 0.
double objective(std::span<const SlotOutcome> history, double phi);

/// Exactly -objective(history, phi).
double reward(std::span<const SlotOutcome> history, double phi);

/// Cost of one slot, U_t + phi * B_t.
double slot_cost(const SlotOutcome& outcome, double phi);

/// Both requirements met; equality counts as met.
bool feasible(const Task& task, double accuracy, double delay_s);

/// The single cloud server. Throws NoServerError unless exactly one exists.
ServerId cloud_server(std::span<const ServerSpec> servers);

/// Edge servers in id order. Throws NoServerError if there are none.
std::vector<ServerId> edge_servers(std::span<const ServerSpec> servers);

/// Compute-preferring tasks go to the cloud, bandwidth-preferring tasks to the
/// edge server with the fewest tasks placed so far in this scheme (lowest id
/// on ties). Tasks are visited in the given order.
AllocationScheme initial_placement(std::span<const Task> tasks, std::span<const ServerSpec> servers,
                                   std::uint32_t slot = 0);

/// T * alpha * beta * r_max - sum of rewards.
double approximate_regret(std::uint64_t rounds, double alpha, double beta, double r_max, double reward_sum);

/// Running reward sum and the regret curve against a reference reward.
class RegretTracker {
 public:
  /// Throws DomainError unless 0 < alpha, beta <= 1.
  RegretTracker(double alpha, double beta);

  void add(double reward);
  std::uint64_t rounds() const { return rounds_; }
  double reward_sum() const { return reward_sum_; }
  double best_reward() const { return best_; }
  double regret(double r_max) const;

 private:
  double alpha_;
  double beta_;
  std::uint64_t rounds_ = 0;
  double reward_sum_ = 0.0;
  double best_ = -std::numeric_limits<double>::infinity();
};

/// A task that failed its requirements and must be re-placed next slot.
struct Escalation {
  Task task;
  ServerId target = 0;
};

/// Anything that turns a slot's tasks into an allocation scheme.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;

  virtual AllocationScheme place(std::uint32_t slot, std::span<const Task> tasks) = 0;

  /// Called after every slot with all tasks that ran in it. Returns the tasks
  /// to retry in the next slot and where.
  virtual std::vector<Escalation> feedback(const AllocationScheme& scheme, const SlotOutcome& outcome,
                                           std::span<const Task> tasks) {
    (void)scheme;
    (void)outcome;
    (void)tasks;
    return {};
  }
};

}  // namespace edgecloud::scheduler
