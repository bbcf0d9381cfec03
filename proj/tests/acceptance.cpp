// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "edgecloud/complexity.hpp"
#include "edgecloud/experiment.hpp"
#include "edgecloud/rng.hpp"
#include "edgecloud/training.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace edgecloud;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& check, double limit_s = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v = check();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0 && secs >= limit_s) {
    v.pass = false;
    v.detail += fmt("; over the %.0f s budget", limit_s);
  }
  if (!v.pass) ++failures;
  std::printf("criterion %2d %s  %-28s %s (%.1f s)\n", id, v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::vector<double> random_pixels(std::size_t side, Rng& rng) {
  std::vector<double> px(side * side);
  for (double& v : px) v = rng.uniform(-1.0, 1.0);
  return px;
}

Verdict complexity_correctness() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto px = random_pixels(16, rng);
    const double got = complexity::spatial_complexity(complexity::Frame(16, px)).total;
    const double want = oracle::BruteForceComplexity(px, 16, 2, 4).total();
    worst = std::max(worst, std::abs(got - want));
  }
  double constant = 0.0;
  for (double c : {-1.0, -0.3, 0.0, 0.5, 1.0}) {
    constant = std::max(constant,
                        std::abs(complexity::spatial_complexity(complexity::Frame(16, std::vector<double>(256, c))).total));
  }
  std::vector<double> board(16);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) board[r * 4 + c] = (r + c) % 2 ? -1.0 : 1.0;
  const double checker = complexity::spatial_complexity(complexity::Frame(4, board)).total;
  return {worst <= 1e-12 && constant == 0.0 && checker == 0.5,
          fmt("max |diff| %.2e, constant %.1f, checkerboard %.15g", worst, constant, checker)};
}

Verdict overlap_identity() {
  Rng rng(102);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto pyr = complexity::build_pyramid(complexity::Frame(16, random_pixels(16, rng)), 2, 4);
    for (int n = 1; n <= pyr.depth; ++n) {
      worst = std::max(worst, std::abs(complexity::overlap(pyr, n, n - 1) - complexity::overlap(pyr, n, n)));
    }
  }
  return {worst <= 1e-12, fmt("max |O(n,n-1) - O(n,n)| %.2e", worst)};
}

Verdict gradient_check() {
  const predictor::Architecture arch{predictor::kFeatureSize, 4, 2, 6};
  auto pred = predictor::PreferencePredictor::initialized(arch, 103);
  Rng rng(104);
  // Weights spread over [-0.5, 0.5] so no gradient sits at the finite-difference noise floor.
  auto spread = pred.params().flatten();
  for (double& w : spread) w = rng.uniform(-0.5, 0.5);
  pred.mutable_params().assign(spread);
  std::vector<predictor::LabeledWindow> batch;
  for (int i = 0; i < 4; ++i) {
    std::vector<predictor::FeatureVector> w(6);
    for (auto& f : w) f = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
    batch.push_back({w, i % 2});
  }
  predictor::Parameters grad;
  predictor::loss_and_gradient(pred, batch, grad);
  const auto analytic = grad.flatten();
  auto theta = pred.params().flatten();
  const double h = 1e-5;
  double worst = 0.0, worst_abs = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + h;
    pred.mutable_params().assign(theta);
    const double up = predictor::evaluate_loss(pred, batch);
    theta[i] = saved - h;
    pred.mutable_params().assign(theta);
    const double down = predictor::evaluate_loss(pred, batch);
    theta[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    // Central differences at h = 1e-5 resolve about 1e-11 absolute, hence the 1e-6 floor.
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    worst_abs = std::max(worst_abs, std::abs(analytic[i] - numeric));
  }
  return {worst < 1e-4, fmt("%zu parameters, max relative error %.2e, max absolute error %.2e", theta.size(), worst,
                            worst_abs)};
}

Verdict predictor_skill(const fs::path& weights_out) {
  const auto all = predictor::make_separable_dataset(700, 8, 2024);
  const std::span<const predictor::LabeledWindow> train_set(all.data(), 500), held(all.data() + 500, 200);
  auto sep = predictor::PreferencePredictor::initialized(predictor::Architecture{}, 5);
  predictor::train(sep, train_set, predictor::TrainOptions{.epochs = 200, .seed = 6});
  const double sep_acc = predictor::evaluate_accuracy(sep, held);

  const auto cfg = config::parse(R"({"schema_version": 1})");
  const auto sim = experiment::train_predictor(cfg, "V1");
  sim.model.save(weights_out);
  return {sep_acc >= 0.95 && sim.holdout_accuracy >= 0.85,
          fmt("separable %.3f (>= 0.95), simulator-labeled V1 %.3f (>= 0.85)", sep_acc, sim.holdout_accuracy)};
}

std::vector<double> seed_average(std::size_t rounds) {
  const instance::Stationary3x2 inst;
  std::vector<double> avg(rounds, 0.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto costs = instance::run_bandit(inst, seed, rounds);
    for (std::size_t t = 0; t < rounds; ++t) avg[t] += costs[t] / 20.0;
  }
  return avg;
}

Verdict oracle_equivalence() {
  const instance::Stationary3x2 inst;
  const auto avg = seed_average(2000);
  const double late = std::accumulate(avg.begin() + 1000, avg.end(), 0.0) / 1000.0;
  const double rel = (late - inst.optimum()) / inst.optimum();
  return {std::abs(rel) <= 0.05, fmt("rounds 1000-2000 mean cost %.4f vs optimum %.4f (%+.2f%%)", late,
                                     inst.optimum(), 100.0 * rel)};
}

Verdict regret_behavior() {
  const instance::Stationary3x2 inst;
  const auto avg = seed_average(2000);
  const double r_max = -inst.optimum();
  double sum = 0.0, prev_grid = INFINITY, prev = INFINITY, worst_up = 0.0;
  int grid_ups = 0, ups = 0;
  std::vector<double> per_round(avg.size() + 1);
  for (std::size_t t = 1; t <= avg.size(); ++t) {
    sum -= avg[t - 1];
    const double v = scheduler::approximate_regret(t, 0.9, 0.9, r_max, sum) / static_cast<double>(t);
    if (t >= 200) {
      if (v > prev) {
        ++ups;
        worst_up = std::max(worst_up, v - prev);
      }
      prev = v;
      if (t % 100 == 0) {
        if (v > prev_grid) ++grid_ups;
        prev_grid = v;
      }
    }
    per_round[t] = v;
  }
  return {grid_ups == 0, fmt("Reg/T %.3f at T=200, %.3f at 1000, %.3f at 2000; increases on the 100-round grid %d; "
                             "single-round upticks %d (max %.1e)",
                             per_round[200], per_round[1000], per_round[2000], grid_ups, ups, worst_up)};
}

// ---- criteria 7-9: the full matrix --------------------------------------

const std::vector<std::string> kRows{"cdio", "cdio_rpp", "cdio_cdco", "all_edge", "all_cloud", "random", "greedy"};
constexpr int kSeeds = 5;

struct Grid {
  // [version][mode][seed index][row]
  std::map<std::string, std::map<std::string, std::vector<std::map<std::string, metrics::RunReport>>>> cells;
  // [version] fraction of tasks whose A^q the cloud model meets, averaged over seeds
  std::map<std::string, double> accuracy_ceiling;
  double seconds = 0.0;
};

experiment::PolicyChoice choice_for(const std::string& row) {
  if (row == "cdio") return {policies::Kind::Cdio, policies::Ablation::Both};
  if (row == "cdio_rpp") return {policies::Kind::Cdio, policies::Ablation::Rpp};
  if (row == "cdio_cdco") return {policies::Kind::Cdio, policies::Ablation::Cdco};
  return {policies::parse_kind(row), policies::Ablation::Both};
}

Grid run_grid() {
  const auto t0 = std::chrono::steady_clock::now();
  Grid g;
  const auto base = config::parse(R"({"schema_version": 1})");
  for (const auto& version : base.versions) {
    // One predictor per version from the fixed root seed, shared by all evaluation seeds.
    const auto trained = experiment::train_predictor(base, version);
    std::printf("  predictor %s: held-out accuracy %.3f\n", version.c_str(), trained.holdout_accuracy);
    for (int s = 0; s < kSeeds; ++s) {
      auto cfg = base;
      cfg.seed = static_cast<std::uint64_t>(s + 1);
      const auto workload = experiment::make_workload(cfg);
      const auto predicted = experiment::with_predictions(workload, trained.model);
      const auto world = config::make_world(cfg, version, sim::BandwidthMode::Stable);
      const auto& cloud = world.servers[scheduler::cloud_server(world.servers)];
      std::size_t reachable = 0;
      for (const auto& t : workload.tasks) reachable += sim::realized_accuracy(t, cloud, world.accuracy_penalty) >= t.accuracy_req;
      g.accuracy_ceiling[version] += static_cast<double>(reachable) / static_cast<double>(workload.tasks.size()) / kSeeds;
      for (auto mode : base.bw_modes) {
        auto& slot = g.cells[version][std::string(sim::to_string(mode))];
        slot.resize(kSeeds);
        for (const auto& row : kRows) {
          const auto ch = choice_for(row);
          slot[s][row] = experiment::run_cell(cfg, ch.needs_predictions() ? predicted : workload, version, mode, ch).report;
        }
      }
    }
    std::fflush(stdout);
  }
  g.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return g;
}

const metrics::RunReport& best_baseline(const std::map<std::string, metrics::RunReport>& cell) {
  const metrics::RunReport* best = nullptr;
  for (const char* name : {"all_edge", "all_cloud", "random", "greedy"}) {
    const auto& r = cell.at(name);
    if (!best || r.success_rate > best->success_rate ||
        (r.success_rate == best->success_rate && r.objective < best->objective)) {
      best = &r;
    }
  }
  return *best;
}

Verdict paper_claims(const Grid& g) {
  int seeds_ok = 0;
  int compute_ok = 0, bw_ok = 0, energy_ok = 0, cells = 0;
  double worst_compute = INFINITY, worst_bw = INFINITY, worst_energy = INFINITY;
  std::map<std::string, int> chosen;
  for (int s = 0; s < kSeeds; ++s) {
    bool all = true;
    for (const auto& [version, modes] : g.cells) {
      for (const auto& [mode, seeds] : modes) {
        const auto& cell = seeds[s];
        const auto& cdio = cell.at("cdio");
        const auto& best = best_baseline(cell);
        ++chosen[best.policy];
        const double dc = 1.0 - cdio.compute_tflop_total / best.compute_tflop_total;
        const double db = 1.0 - cdio.bandwidth_mbps_avg / best.bandwidth_mbps_avg;
        const double de = 1.0 - cdio.energy_j_total / cell.at("all_cloud").energy_j_total;
        worst_compute = std::min(worst_compute, dc);
        worst_bw = std::min(worst_bw, db);
        worst_energy = std::min(worst_energy, de);
        ++cells;
        compute_ok += dc >= 0.20;
        bw_ok += db >= 0.20;
        energy_ok += de >= 0.40;
        all = all && dc >= 0.20 && db >= 0.20 && de >= 0.40;
      }
    }
    seeds_ok += all;
  }
  std::string picks;
  for (const auto& [name, n] : chosen) picks += fmt(" %s x%d", name.c_str(), n);
  return {seeds_ok >= 4,
          fmt("seeds holding %d/5; cells with compute cut >= 20%%: %d/%d (worst %+.1f%%), bandwidth cut >= 20%%: %d/%d "
              "(worst %+.1f%%), energy cut vs all_cloud >= 40%%: %d/%d (worst %+.1f%%); best baseline:%s",
              seeds_ok, compute_ok, cells, 100 * worst_compute, bw_ok, cells, 100 * worst_bw, energy_ok, cells,
              100 * worst_energy, picks.c_str())};
}

double seed_mean(const std::vector<std::map<std::string, metrics::RunReport>>& seeds, const std::string& row,
                 double metrics::RunReport::*field) {
  double s = 0.0;
  for (const auto& cell : seeds) s += cell.at(row).*field;
  return s / static_cast<double>(seeds.size());
}

Verdict success_rates(const Grid& g) {
  bool ok = true;
  std::string detail;
  for (const auto& [version, modes] : g.cells) {
    const auto& st = modes.at("stable");
    const auto& fl = modes.at("fluctuating");
    const double acc_s = seed_mean(st, "cdio", &metrics::RunReport::acc_success_rate);
    const double del_s = seed_mean(st, "cdio", &metrics::RunReport::delay_success_rate);
    const double acc_f = seed_mean(fl, "cdio", &metrics::RunReport::acc_success_rate);
    const double del_f = seed_mean(fl, "cdio", &metrics::RunReport::delay_success_rate);
    const bool v_ok = acc_s >= 0.90 && del_s >= 0.90 && acc_s - acc_f <= 0.03 && del_s - del_f <= 0.03;
    ok = ok && v_ok;
    detail += fmt("%s%s acc %.3f/%.3f (ceiling %.3f) delay %.3f/%.3f", detail.empty() ? "" : "; ", version.c_str(),
                  acc_s, acc_f, g.accuracy_ceiling.at(version), del_s, del_f);
  }
  return {ok, "stable/fluctuating " + detail};
}

Verdict ablation_direction(const Grid& g) {
  int cells = 0, rpp_obj = 0, cdco_acc = 0, rpp_delay = 0, rpp_energy = 0, cdco_delay = 0, cdco_energy = 0;
  double worst_acc_gap = INFINITY;
  using R = metrics::RunReport;
  for (const auto& [version, modes] : g.cells) {
    for (const auto& [mode, seeds] : modes) {
      const auto m = [&](const std::string& row, double R::*f) { return seed_mean(seeds, row, f); };
      ++cells;
      rpp_obj += m("cdio_rpp", &R::objective) > m("cdio", &R::objective);
      const double gap = m("cdio", &R::avg_accuracy) - m("cdio_cdco", &R::avg_accuracy);
      worst_acc_gap = std::min(worst_acc_gap, gap);
      cdco_acc += gap >= 2.0;
      rpp_delay += m("cdio_rpp", &R::avg_delay_ms) > m("cdio", &R::avg_delay_ms);
      rpp_energy += m("cdio_rpp", &R::energy_j_total) > m("cdio", &R::energy_j_total);
      cdco_delay += m("cdio_cdco", &R::avg_delay_ms) > m("cdio", &R::avg_delay_ms);
      cdco_energy += m("cdio_cdco", &R::energy_j_total) > m("cdio", &R::energy_j_total);
    }
  }
  const bool ok = rpp_obj == cells && cdco_acc == cells && rpp_delay == cells && rpp_energy == cells &&
                  cdco_delay == cells && cdco_energy == cells;
  return {ok, fmt("cells (of %d) with RPP objective worse %d, CDCO accuracy >= 2 mAP lower %d (worst gap %+.2f), "
                  "RPP delay/energy higher %d/%d, CDCO delay/energy higher %d/%d",
                  cells, rpp_obj, cdco_acc, worst_acc_gap, rpp_delay, rpp_energy, cdco_delay, cdco_energy)};
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

Verdict determinism(const fs::path& scratch, const fs::path& weights) {
  auto cfg = config::parse(R"({"schema_version": 1})");
  std::ostringstream log;
  std::size_t files = 0;
  bool same = true;
  std::string differing;

  // `run` trains in-process; `matrix` uses saved weights and every ablation.
  // Both reruns write to the same directory so the configs are identical.
  for (const char* what : {"run", "matrix"}) {
    auto c = cfg;
    c.output_dir = scratch / what;
    if (std::string(what) == "matrix") c.predictor.weights = weights;
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 2; ++rep) {
      fs::remove_all(c.output_dir);
      if (std::string(what) == "run") {
        experiment::cmd_run(c, "cdio", log);
      } else {
        experiment::cmd_matrix(c, {policies::Ablation::Rpp, policies::Ablation::Cdco, policies::Ablation::Both}, log);
      }
      const auto got = read_dir(c.output_dir);
      if (rep == 0) {
        first = got;
        files += got.size();
        continue;
      }
      for (const auto& [name, bytes] : first) {
        const auto it = got.find(name);
        if (it == got.end() || it->second != bytes) {
          same = false;
          differing += " " + name;
        }
      }
      same = same && got.size() == first.size();
    }
  }
  return {same, fmt("%zu output files compared byte for byte across reruns%s%s", files,
                    differing.empty() ? "" : "; differing:", differing.c_str())};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / "edgecloud_acceptance";
  fs::create_directories(scratch);
  const fs::path weights = scratch / "predictor_V1.json";

  report(1, "complexity correctness", complexity_correctness, 1.0);
  report(2, "overlap identity", overlap_identity);
  report(3, "LSTM gradient check", gradient_check, 10.0);
  report(4, "predictor skill", [&] { return predictor_skill(weights); }, 60.0);
  report(5, "bandit oracle equivalence", oracle_equivalence, 30.0);
  report(6, "regret behavior", regret_behavior);

  std::printf("  running the comparison matrix: 4 versions x 2 modes x %d seeds x %zu policies, 10000 tasks\n", kSeeds,
              kRows.size());
  std::fflush(stdout);
  const Grid grid = run_grid();
  std::printf("  matrix finished in %.1f s\n", grid.seconds);
  report(7, "directional claims", [&] {
    Verdict v = paper_claims(grid);
    if (grid.seconds >= 300.0) {
      v.pass = false;
      v.detail += fmt("; matrix took %.0f s, over the 300 s budget", grid.seconds);
    }
    return v;
  });
  report(8, "success rates", [&] { return success_rates(grid); });
  report(9, "ablation direction", [&] { return ablation_direction(grid); });
  report(10, "determinism", [&] { return determinism(scratch, weights); });

  fs::remove_all(scratch);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
