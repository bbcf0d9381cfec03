#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

#include "edgecloud/error.hpp"
#include "edgecloud/metrics.hpp"
#include "edgecloud/rng.hpp"

using namespace edgecloud;
using namespace edgecloud::metrics;

namespace {

sim::TaskRecord row(TaskId id, double acc, double acc_req, double delay, double delay_req, Tier tier = Tier::Edge,
                    std::uint32_t attempts = 1) {
  sim::TaskRecord r;
  r.task = id;
  r.accuracy = acc;
  r.accuracy_req = acc_req;
  r.delay_s = delay;
  r.delay_req_s = delay_req;
  r.tier = tier;
  r.attempts = attempts;
  return r;
}

sim::SlotRecord slot(std::uint32_t t, double u, double b, double work, double idle, double tx, double regret = 0.0) {
  sim::SlotRecord s;
  s.slot = t;
  s.compute_tflop = u;
  s.bandwidth_mbps = b;
  s.energy = {work, idle, tx};
  s.regret = regret;
  return s;
}

sim::Trace hand_trace() {
  sim::Trace t;
  t.tasks = {row(0, 70.0, 60.0, 0.3, 0.4, Tier::Cloud), row(1, 55.0, 60.0, 0.2, 0.5, Tier::Edge, 2),
             row(2, 65.0, 50.0, 0.7, 0.6)};
  t.slots = {slot(0, 2.0, 10.0, 1.0, 2.0, 3.0), slot(1, 4.0, 20.0, 1.0, 1.0, 1.0, 0.5)};
  return t;
}

sim::Trace random_trace(Rng& rng, std::size_t n) {
  sim::Trace t;
  for (std::size_t i = 0; i < n; ++i) {
    t.tasks.push_back(row(static_cast<TaskId>(i), rng.uniform(40.0, 90.0), rng.uniform(50.0, 80.0),
                          rng.uniform(0.0, 0.7), rng.uniform(0.2, 0.6),
                          rng.uniform() < 0.5 ? Tier::Edge : Tier::Cloud));
  }
  for (std::uint32_t s = 0; s < 10; ++s) {
    t.slots.push_back(slot(s, rng.uniform(0.0, 5.0), rng.uniform(0.0, 50.0), 1.0, 1.0, 1.0));
  }
  return t;
}

RunReport report(const std::string& policy, double compute, const std::string& version = "V1") {
  RunReport r;
  r.policy = policy;
  r.version = version;
  r.bw_mode = "stable";
  r.compute_tflop_total = compute;
  r.avg_accuracy = 60.0;
  r.bandwidth_mbps_avg = 10.0;
  r.energy_j_total = 100.0;
  r.avg_delay_ms = 50.0;
  r.acc_success_rate = 0.9;
  r.delay_success_rate = 0.95;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("all tasks successful") {
  sim::Trace t;
  t.tasks = {row(0, 70.0, 60.0, 0.1, 0.4), row(1, 60.0, 60.0, 0.4, 0.4)};
  t.slots = {slot(0, 1.0, 1.0, 0.0, 0.0, 0.0)};
  const auto r = aggregate(t, "cdio", "V1", "stable", 1.0);
  CHECK(r.acc_success_rate == 1.0);
  CHECK(r.delay_success_rate == 1.0);
  CHECK(r.success_rate == 1.0);
}

TEST_CASE("93 of 100 tasks meet the accuracy requirement") {
  sim::Trace t;
  for (TaskId i = 0; i < 100; ++i) t.tasks.push_back(row(i, i < 93 ? 70.0 : 50.0, 60.0, 0.1, 0.4));
  t.slots = {slot(0, 1.0, 1.0, 0.0, 0.0, 0.0)};
  CHECK(aggregate(t, "cdio", "V1", "stable", 1.0).acc_success_rate == 0.93);
}

TEST_CASE("hand-built trace") {
  const auto r = aggregate(hand_trace(), "cdio", "V2", "fluctuating", 0.5);
  CHECK(r.policy == "cdio");
  CHECK(r.version == "V2");
  CHECK(r.bw_mode == "fluctuating");
  CHECK(r.tasks == 3);
  CHECK(r.slots == 2);
  CHECK(r.avg_accuracy == doctest::Approx(190.0 / 3.0).epsilon(1e-14));
  CHECK(r.acc_success_rate == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(r.delay_success_rate == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(r.success_rate == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(r.avg_delay_ms == doctest::Approx(400.0).epsilon(1e-14));
  CHECK(r.compute_tflop_total == 6.0);
  CHECK(r.bandwidth_mbps_avg == 15.0);
  CHECK(r.energy_j_total == 9.0);
  CHECK(r.objective == 10.5);
  CHECK(r.cloud_fraction == doctest::Approx(1.0 / 3.0));
  CHECK(r.escalation_rate == doctest::Approx(1.0 / 3.0));
  CHECK(r.regret_trace == std::vector<double>{0.0, 0.5});
}

TEST_CASE("aggregate errors") {
  sim::Trace empty;
  CHECK_THROWS_AS(aggregate(empty, "x", "V1", "stable", 1.0), EmptyTraceError);
  sim::Trace no_slots = hand_trace();
  no_slots.slots.clear();
  CHECK_THROWS_AS(aggregate(no_slots, "x", "V1", "stable", 1.0), EmptyTraceError);
  CHECK_THROWS_AS(aggregate(hand_trace(), "x", "V1", "stable", -1.0), DomainError);
}

TEST_CASE("report invariants on random traces") {
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto r = aggregate(random_trace(rng, 1 + rng.below(50)), "p", "V1", "stable", 1.0);
    for (double v : {r.acc_success_rate, r.delay_success_rate, r.success_rate, r.cloud_fraction}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(r.avg_accuracy >= 0.0);
    CHECK(r.avg_accuracy <= 100.0);
    CHECK(r.compute_tflop_total >= 0.0);
    CHECK(r.energy_j_total >= 0.0);
    CHECK(r.success_rate <= std::min(r.acc_success_rate, r.delay_success_rate));
  }
}

TEST_CASE("aggregate ignores row order") {
  Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    sim::Trace t = random_trace(rng, 2 + rng.below(40));
    const auto a = aggregate(t, "p", "V1", "stable", 1.0);
    std::reverse(t.tasks.begin(), t.tasks.end());
    for (std::size_t i = t.tasks.size() - 1; i > 0; --i) std::swap(t.tasks[i], t.tasks[rng.below(i + 1)]);
    const auto b = aggregate(t, "p", "V1", "stable", 1.0);
    CHECK(a.acc_success_rate == b.acc_success_rate);
    CHECK(a.delay_success_rate == b.delay_success_rate);
    CHECK(a.avg_accuracy == doctest::Approx(b.avg_accuracy).epsilon(1e-12));
    CHECK(a.avg_delay_ms == doctest::Approx(b.avg_delay_ms).epsilon(1e-12));
  }
}

TEST_CASE("flipping one task moves a rate by exactly 1/N") {
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    sim::Trace t = random_trace(rng, 1 + rng.below(60));
    const double n = static_cast<double>(t.tasks.size());
    const auto before = aggregate(t, "p", "V1", "stable", 1.0);
    auto& victim = t.tasks[rng.below(t.tasks.size())];
    const bool was_met = victim.accuracy_met();
    victim.accuracy = was_met ? victim.accuracy_req - 1.0 : victim.accuracy_req + 1.0;
    const auto after = aggregate(t, "p", "V1", "stable", 1.0);
    CHECK(std::abs(after.acc_success_rate - before.acc_success_rate) == doctest::Approx(1.0 / n).epsilon(1e-12));
  }
}

TEST_CASE("percent deltas") {
  CHECK(std::round(percent_delta(29.1, 41.5) * 10.0) / 10.0 == -29.9);
  CHECK(percent_delta(0.0, 0.0) == 0.0);
  CHECK(percent_delta(1.0, 0.0) == std::numeric_limits<double>::infinity());
  CHECK(percent_delta(-10.0, -20.0) == 50.0);
}

TEST_CASE("compare against a baseline") {
  const std::vector<RunReport> reports{report("all_cloud", 41.5), report("cdio", 29.1)};
  const auto table = compare(reports, 0);
  CHECK(table.version == "V1");
  CHECK(table.rows.size() == 2);
  CHECK(std::round(table.rows[1].delta_pct[4] * 10.0) / 10.0 == -29.9);
  for (double d : table.rows[0].delta_pct) CHECK(d == 0.0);
}

TEST_CASE("self comparison is all zeros") {
  const std::vector<RunReport> same{report("cdio", 29.1), report("cdio", 29.1)};
  for (const auto& r : compare(same, 1).rows)
    for (double d : r.delta_pct) CHECK(d == 0.0);
}

TEST_CASE("swapping subject and baseline flips every delta's sign") {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    RunReport a = report("a", rng.uniform(1.0, 100.0)), b = report("b", rng.uniform(1.0, 100.0));
    a.energy_j_total = rng.uniform(1.0, 1000.0);
    b.avg_delay_ms = rng.uniform(1.0, 300.0);
    const std::vector<RunReport> pair{a, b};
    const auto ab = compare(pair, 0).rows[1].delta_pct;
    const auto ba = compare(pair, 1).rows[0].delta_pct;
    for (std::size_t k = 0; k < ab.size(); ++k) {
      CHECK((ab[k] > 0) == (ba[k] < 0));
      CHECK((ab[k] == 0) == (ba[k] == 0));
    }
  }
}

TEST_CASE("compare errors") {
  const std::vector<RunReport> one{report("cdio", 1.0)};
  CHECK_THROWS_AS(compare(one, 0), IncomparableError);
  const std::vector<RunReport> mixed{report("cdio", 1.0, "V1"), report("greedy", 1.0, "V2")};
  CHECK_THROWS_AS(compare(mixed, 0), IncomparableError);
  std::vector<RunReport> modes{report("cdio", 1.0), report("greedy", 1.0)};
  modes[1].bw_mode = "fluctuating";
  CHECK_THROWS_AS(compare(modes, 0), IncomparableError);
  const std::vector<RunReport> ok{report("cdio", 1.0), report("greedy", 1.0)};
  CHECK_THROWS_AS(compare(ok, 2), IndexError);
}

TEST_CASE("csv column order") {
  CHECK(csv_header(false) == "policy,version,bw_mode,avg_acc,acc_sr,delay_sr,avg_delay_ms,compute_tflop,bw_mbps,energy_j\n");
  CHECK(csv_header(true).rfind("energy_j,avg_acc_delta_pct,", std::string::npos) != std::string::npos);
  CHECK(csv_row(report("cdio", 29.5)) == "cdio,V1,stable,60,0.9,0.95,50,29.5,10,100\n");
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(0.1) == "0.1");
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const double v = rng.uniform(-1e6, 1e6);
    CHECK(std::stod(format_number(v)) == v);
  }
}

TEST_CASE("report json keeps every field") {
  const auto r = aggregate(hand_trace(), "cdio", "V1", "stable", 0.5);
  const auto j = nlohmann::json::parse(report_json(r));
  for (const char* key : {"policy", "version", "bw_mode", "tasks", "slots", "avg_accuracy", "acc_success_rate",
                          "delay_success_rate", "success_rate", "avg_delay_ms", "compute_tflop_total",
                          "bandwidth_mbps_avg", "energy_j_total", "objective", "cloud_fraction", "escalation_rate",
                          "regret_trace"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["objective"].get<double>() == 10.5);
}

TEST_CASE("trace writers") {
  const auto dir = std::filesystem::temp_directory_path() / "edgecloud_metrics_test";
  std::filesystem::create_directories(dir);
  const auto trace = hand_trace();
  write_task_trace_csv(trace, dir / "tasks.csv");
  write_slot_trace_csv(trace, dir / "slots.csv");
  const std::string tasks = slurp(dir / "tasks.csv");
  CHECK(tasks.rfind("slot,task_id,server_id,tier,predicted_pref,", 0) == 0);
  CHECK(std::count(tasks.begin(), tasks.end(), '\n') == 4);
  const std::string slots = slurp(dir / "slots.csv");
  CHECK(std::count(slots.begin(), slots.end(), '\n') == 3);
  std::filesystem::remove_all(dir);
}
