#include <doctest.h>

#include <limits>
#include <vector>

#include "edgecloud/catalog.hpp"
#include "edgecloud/error.hpp"
#include "edgecloud/policies.hpp"
#include "edgecloud/rng.hpp"

using namespace edgecloud;
using namespace edgecloud::policies;

namespace {

sim::WorldConfig world(const std::string& version = "V1") {
  sim::WorldConfig w;
  w.servers = catalog::make_servers(catalog::version(version), 4);
  return w;
}

std::vector<Task> random_tasks(Rng& rng, std::size_t n) {
  std::vector<Task> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = static_cast<TaskId>(i);
    out[i].data_size_mbit = rng.uniform(0.5, 3.0);
    out[i].accuracy_req = rng.uniform(50.0, 80.0);
    out[i].delay_req_s = rng.uniform(0.02, 0.6);
    out[i].complexity = rng.uniform();
    out[i].predicted_pref = rng.uniform() < 0.5 ? Preference::ComputePreferring : Preference::BandwidthPreferring;
  }
  return out;
}

// Straight-line per-task search: for every server, recompute the myopic
// estimate given what is already placed, keep the cheapest feasible one.
std::vector<ServerId> greedy_oracle(const sim::WorldConfig& w, double phi, const std::vector<Task>& tasks) {
  const std::size_t m = w.servers.size();
  std::vector<std::size_t> placed(m, 0);
  std::vector<double> bits(m, 0.0);
  std::vector<ServerId> out;
  for (const Task& t : tasks) {
    std::vector<double> cost(m);
    std::vector<bool> ok(m);
    for (std::size_t j = 0; j < m; ++j) {
      const ServerSpec& s = w.servers[j];
      const double n = static_cast<double>(placed[j] + 1);
      const double slow = n > s.max_concurrency ? n / s.max_concurrency : 1.0;
      const double inf = s.model.gflops / 1000.0 / s.fp16_tflops * slow;
      const double link = s.tier == Tier::Cloud ? w.wan.base_mbps : w.local_link_factor * w.wan.base_mbps;
      const double delay = w.preproc_s + (bits[j] + t.data_size_mbit) / link + inf;
      double acc = s.model.map50 - w.accuracy_penalty * t.complexity;
      acc = acc < 0.0 ? 0.0 : acc;
      cost[j] = s.fp16_tflops * inf + phi * (s.tier == Tier::Cloud ? t.data_size_mbit / w.slot_s : 0.0);
      ok[j] = acc >= t.accuracy_req && delay <= t.delay_req_s;
    }
    std::size_t pick = m;
    for (std::size_t j = 0; j < m; ++j) {
      if (ok[j] && (pick == m || cost[j] < cost[pick])) pick = j;
    }
    if (pick == m) {
      pick = 0;
      for (std::size_t j = 1; j < m; ++j) {
        if (cost[j] < cost[pick]) pick = j;
      }
    }
    ++placed[pick];
    bits[pick] += t.data_size_mbit;
    out.push_back(static_cast<ServerId>(pick));
  }
  return out;
}

}  // namespace

TEST_CASE("all_cloud sends everything to the cloud") {
  Rng rng(1);
  const auto w = world();
  AllCloud p(w.servers);
  const auto tasks = random_tasks(rng, 30);
  for (const auto& a : p.place(0, tasks).assignments) CHECK(a.server == 4);
}

TEST_CASE("all_edge round-robins across edges and slots") {
  Rng rng(2);
  const auto w = world();
  AllEdge p(w.servers);
  const auto first = p.place(0, random_tasks(rng, 6));
  std::vector<ServerId> got;
  for (const auto& a : first.assignments) got.push_back(a.server);
  CHECK(got == std::vector<ServerId>{0, 1, 2, 3, 0, 1});
  CHECK(p.place(1, random_tasks(rng, 1)).assignments[0].server == 2);
}

TEST_CASE("random placement is uniform, deterministic and seed dependent") {
  Rng rng(3);
  const auto w = world();
  const auto tasks = random_tasks(rng, 5000);
  RandomPlacement a(w.servers, 7), b(w.servers, 7), c(w.servers, 8);
  const auto sa = a.place(0, tasks), sb = b.place(0, tasks), sc = c.place(0, tasks);
  std::vector<std::size_t> hist(5, 0);
  bool differs = false;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    CHECK(sa.assignments[i].server == sb.assignments[i].server);
    differs = differs || sa.assignments[i].server != sc.assignments[i].server;
    ++hist[sa.assignments[i].server];
  }
  CHECK(differs);
  for (std::size_t h : hist) CHECK(h == doctest::Approx(1000.0).epsilon(0.1));
}

TEST_CASE("greedy matches an exhaustive per-task search") {
  Rng rng(4);
  for (auto v : catalog::version_names()) {
    const auto w = world(std::string(v));
    for (double phi : {0.0, 0.01, 1.0, 5.0}) {
      for (int rep = 0; rep < 20; ++rep) {
        const auto tasks = random_tasks(rng, 1 + rng.below(80));
        GreedyLeastCost g(w, phi);
        const auto scheme = g.place(0, tasks);
        const auto expect = greedy_oracle(w, phi, tasks);
        for (std::size_t i = 0; i < tasks.size(); ++i) CHECK(scheme.assignments[i].server == expect[i]);
      }
    }
  }
}

TEST_CASE("preference placement ignores feedback") {
  Rng rng(5);
  const auto w = world();
  PreferencePlacement p(w.servers, "cdio");
  CHECK(p.name() == "cdio");
  const auto tasks = random_tasks(rng, 20);
  const auto scheme = p.place(3, tasks);
  const auto guide = scheduler::initial_placement(tasks, w.servers, 3);
  for (std::size_t i = 0; i < tasks.size(); ++i) CHECK(scheme.assignments[i].server == guide.assignments[i].server);
  CHECK(p.feedback(scheme, {}, tasks).empty());
}

TEST_CASE("policy factory") {
  const auto w = world();
  PolicySettings s;
  CHECK(make_policy(Kind::AllEdge, w, s, 0.2, 0.6)->name() == "all_edge");
  CHECK(make_policy(Kind::Greedy, w, s, 0.2, 0.6)->name() == "greedy");
  CHECK(make_policy(Kind::Cdio, w, s, 0.2, 0.6)->name() == "cdio");
  s.ablation = Ablation::Rpp;
  CHECK(dynamic_cast<PreferencePlacement*>(make_policy(Kind::Cdio, w, s, 0.2, 0.6).get()) != nullptr);
  s.ablation = Ablation::Cdco;
  CHECK(dynamic_cast<scheduler::CrossDomainScheduler*>(make_policy(Kind::Cdio, w, s, 0.2, 0.6).get()) != nullptr);

  CHECK(baseline_kinds() == std::vector<Kind>{Kind::AllEdge, Kind::AllCloud, Kind::Random, Kind::Greedy});
  for (Kind k : {Kind::Cdio, Kind::AllEdge, Kind::AllCloud, Kind::Random, Kind::Greedy}) {
    CHECK(parse_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_kind("dao"), ConfigError);
  for (Ablation a : {Ablation::Rpp, Ablation::Cdco, Ablation::Both}) CHECK(parse_ablation(to_string(a)) == a);
  CHECK_THROWS_AS(parse_ablation("none"), ConfigError);
}
