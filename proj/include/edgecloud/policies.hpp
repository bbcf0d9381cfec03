#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "edgecloud/bandit.hpp"
#include "edgecloud/rng.hpp"
#include "edgecloud/scheduler.hpp"
#include "edgecloud/simulator.hpp"

namespace edgecloud::policies {

using scheduler::AllocationScheme;
using scheduler::Policy;

/// Round-robin over the edge servers, continuing across slots.
class AllEdge : public Policy {
 public:
  explicit AllEdge(const std::vector<ServerSpec>& servers);
  std::string_view name() const override { return "all_edge"; }
  AllocationScheme place(std::uint32_t slot, std::span<const Task> tasks) override;

 private:
  std::vector<ServerId> edges_;
  std::size_t cursor_ = 0;
};

class AllCloud : public Policy {
 public:
  explicit AllCloud(const std::vector<ServerSpec>& servers);
  std::string_view name() const override { return "all_cloud"; }
  AllocationScheme place(std::uint32_t slot, std::span<const Task> tasks) override;

 private:
  ServerId cloud_;
};

/// Uniform over all servers.
class RandomPlacement : public Policy {
 public:
  RandomPlacement(const std::vector<ServerSpec>& servers, std::uint64_t seed);
  std::string_view name() const override { return "random"; }
  AllocationScheme place(std::uint32_t slot, std::span<const Task> tasks) override;

 private:
  std::size_t count_;
  Rng rng_;
};

/// Per task, in order, the server with the lowest estimated U + phi * B among
/// those whose estimated accuracy and delay meet the requirements, given the
/// tasks already placed this slot; the cheapest server if none qualifies.
/// Estimates use the catalog accuracy model, the WAN base rate, and the
/// slot's own placements only (no learning, no view of the bandwidth sample).
class GreedyLeastCost : public Policy {
 public:
  GreedyLeastCost(sim::WorldConfig world, double phi);
  std::string_view name() const override { return "greedy"; }
  AllocationScheme place(std::uint32_t slot, std::span<const Task> tasks) override;

 private:
  sim::WorldConfig world_;
  double phi_;
};

/// Preference-guided initial placement alone, without feedback.
class PreferencePlacement : public Policy {
 public:
  explicit PreferencePlacement(std::vector<ServerSpec> servers, std::string name = "rpp");
  std::string_view name() const override { return name_; }
  AllocationScheme place(std::uint32_t slot, std::span<const Task> tasks) override;

 private:
  std::vector<ServerSpec> servers_;
  std::string name_;
};

/// Policy families the experiment driver knows by name.
enum class Kind : std::uint8_t { Cdio, AllEdge, AllCloud, Random, Greedy };

std::string_view to_string(Kind kind);
/// "cdio", "all_edge", "all_cloud", "random", "greedy". Throws ConfigError.
Kind parse_kind(std::string_view text);

/// The four non-learning baselines in a fixed order.
std::vector<Kind> baseline_kinds();

/// Which CDIO modules are active.
enum class Ablation : std::uint8_t { Rpp, Cdco, Both };

std::string_view to_string(Ablation a);
/// "rpp", "cdco", "both". Throws ConfigError.
Ablation parse_ablation(std::string_view text);

struct PolicySettings {
  scheduler::BanditParams bandit;
  scheduler::Escalate escalate = scheduler::Escalate::Learned;
  Ablation ablation = Ablation::Both;
  std::uint64_t seed = 0;  // random baseline / random initial placement
};

std::unique_ptr<Policy> make_policy(Kind kind, const sim::WorldConfig& world, const PolicySettings& settings,
                                    double delay_lo, double delay_hi);

}  // namespace edgecloud::policies
