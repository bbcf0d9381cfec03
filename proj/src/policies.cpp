#include "edgecloud/policies.hpp"

#include <limits>
#include <string>

#include "edgecloud/error.hpp"

namespace edgecloud::policies {

AllEdge::AllEdge(const std::vector<ServerSpec>& servers) : edges_(scheduler::edge_servers(servers)) {}

AllocationScheme AllEdge::place(std::uint32_t slot, std::span<const Task> tasks) {
  AllocationScheme s{slot, {}};
  for (const auto& t : tasks) {
    s.assignments.push_back({t.id, edges_[cursor_]});
    cursor_ = (cursor_ + 1) % edges_.size();
  }
  return s;
}

AllCloud::AllCloud(const std::vector<ServerSpec>& servers) : cloud_(scheduler::cloud_server(servers)) {}

AllocationScheme AllCloud::place(std::uint32_t slot, std::span<const Task> tasks) {
  AllocationScheme s{slot, {}};
  for (const auto& t : tasks) s.assignments.push_back({t.id, cloud_});
  return s;
}

RandomPlacement::RandomPlacement(const std::vector<ServerSpec>& servers, std::uint64_t seed)
    : count_(servers.size()), rng_(seed) {
  if (count_ == 0) throw NoServerError("no servers");
}

AllocationScheme RandomPlacement::place(std::uint32_t slot, std::span<const Task> tasks) {
  AllocationScheme s{slot, {}};
  for (const auto& t : tasks) s.assignments.push_back({t.id, static_cast<ServerId>(rng_.below(count_))});
  return s;
}

GreedyLeastCost::GreedyLeastCost(sim::WorldConfig world, double phi) : world_(std::move(world)), phi_(phi) {
  world_.validate();
}

AllocationScheme GreedyLeastCost::place(std::uint32_t slot, std::span<const Task> tasks) {
  const std::size_t m = world_.servers.size();
  std::vector<std::size_t> count(m, 0);
  std::vector<double> queued_mbit(m, 0.0);
  AllocationScheme s{slot, {}};
  s.assignments.reserve(tasks.size());

  for (const auto& t : tasks) {
    std::size_t best_any = 0, best_ok = m;
    double cost_any = std::numeric_limits<double>::infinity();
    double cost_ok = cost_any;
    for (std::size_t j = 0; j < m; ++j) {
      const ServerSpec& srv = world_.servers[j];
      const bool wan = srv.tier == Tier::Cloud;
      const double link = wan ? world_.wan.base_mbps : world_.local_link_mbps();
      const double inference = sim::inference_delay(srv, count[j] + 1);
      const double delay = world_.preproc_s + (queued_mbit[j] + t.data_size_mbit) / link + inference;
      const double cost = srv.fp16_tflops * inference + phi_ * (wan ? t.data_size_mbit / world_.slot_s : 0.0);
      const bool ok = scheduler::feasible(t, sim::realized_accuracy(t, srv, world_.accuracy_penalty), delay);
      if (cost < cost_any) {
        cost_any = cost;
        best_any = j;
      }
      if (ok && cost < cost_ok) {
        cost_ok = cost;
        best_ok = j;
      }
    }
    const std::size_t pick = best_ok < m ? best_ok : best_any;
    ++count[pick];
    queued_mbit[pick] += t.data_size_mbit;
    s.assignments.push_back({t.id, static_cast<ServerId>(pick)});
  }
  return s;
}

PreferencePlacement::PreferencePlacement(std::vector<ServerSpec> servers, std::string name)
    : servers_(std::move(servers)), name_(std::move(name)) {
  scheduler::cloud_server(servers_);
  scheduler::edge_servers(servers_);
}

AllocationScheme PreferencePlacement::place(std::uint32_t slot, std::span<const Task> tasks) {
  return scheduler::initial_placement(tasks, servers_, slot);
}

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::Cdio: return "cdio";
    case Kind::AllEdge: return "all_edge";
    case Kind::AllCloud: return "all_cloud";
    case Kind::Random: return "random";
    case Kind::Greedy: return "greedy";
  }
  return "?";
}

Kind parse_kind(std::string_view text) {
  for (Kind k : {Kind::Cdio, Kind::AllEdge, Kind::AllCloud, Kind::Random, Kind::Greedy}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("unknown policy '" + std::string(text) + "'");
}

std::vector<Kind> baseline_kinds() { return {Kind::AllEdge, Kind::AllCloud, Kind::Random, Kind::Greedy}; }

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::Rpp: return "rpp";
    case Ablation::Cdco: return "cdco";
    case Ablation::Both: return "both";
  }
  return "?";
}

Ablation parse_ablation(std::string_view text) {
  for (Ablation a : {Ablation::Rpp, Ablation::Cdco, Ablation::Both}) {
    if (to_string(a) == text) return a;
  }
  throw ConfigError("unknown ablation '" + std::string(text) + "' (expected rpp, cdco or both)");
}

std::unique_ptr<Policy> make_policy(Kind kind, const sim::WorldConfig& world, const PolicySettings& settings,
                                    double delay_lo, double delay_hi) {
  switch (kind) {
    case Kind::AllEdge: return std::make_unique<AllEdge>(world.servers);
    case Kind::AllCloud: return std::make_unique<AllCloud>(world.servers);
    case Kind::Random: return std::make_unique<RandomPlacement>(world.servers, settings.seed);
    case Kind::Greedy: return std::make_unique<GreedyLeastCost>(world, settings.bandit.phi);
    case Kind::Cdio: break;
  }
  if (settings.ablation == Ablation::Rpp) return std::make_unique<PreferencePlacement>(world.servers, "cdio");

  scheduler::CrossDomainOptions o;
  o.bandit = settings.bandit;
  o.escalate = settings.escalate;
  o.classes.delay_lo = delay_lo;
  o.classes.delay_hi = delay_hi;
  o.classes.use_preference = settings.ablation == Ablation::Both;
  o.random_initial = settings.ablation == Ablation::Cdco;
  o.seed = settings.seed;
  o.name = "cdio";
  return std::make_unique<scheduler::CrossDomainScheduler>(world.servers, o);
}

}  // namespace edgecloud::policies
