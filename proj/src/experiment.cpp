#include "edgecloud/experiment.hpp"

#include <fstream>
#include <json.hpp>
#include <ostream>

#include "edgecloud/error.hpp"
#include "edgecloud/rng.hpp"

namespace edgecloud::experiment {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::filesystem::path prepare_output(const config::RunConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + c.output_dir.string() + ": " + ec.message());
  return c.output_dir;
}

sim::Workload training_workload(const config::RunConfig& c, std::size_t n, std::string_view stream) {
  sim::WorkloadSpec spec = c.workload;
  spec.n_tasks = n;
  spec.seed = stream_seed(c.seed, stream);
  return sim::generate_workload(spec);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

sim::Workload make_workload(const config::RunConfig& c) {
  if (c.workload.n_tasks == 0) {
    sim::Workload empty;
    empty.max_delay_req = c.workload.delay_hi;
    return empty;
  }
  return sim::generate_workload(config::workload_spec(c));
}

TrainedPredictor train_predictor(const config::RunConfig& c, const std::string& version) {
  const auto& pc = c.predictor;
  // Labels only depend on the world's catalog and idle link, not on the bandwidth sample.
  const sim::WorldConfig world = config::make_world(c, version, sim::BandwidthMode::Stable);
  const auto train_wl = training_workload(c, pc.train_windows, "predictor-data");
  const auto hold_wl = training_workload(c, pc.holdout_windows, "predictor-holdout");
  const auto train_set =
      sim::labeled_windows(train_wl, world, pc.label_rule, pc.architecture.seq_len, pc.label_slack);
  const auto hold_set = sim::labeled_windows(hold_wl, world, pc.label_rule, pc.architecture.seq_len, pc.label_slack);

  TrainedPredictor out{
      predictor::PreferencePredictor::initialized(pc.architecture, stream_seed(c.seed, "predictor-init")), {}, 0.0,
      0.0};
  predictor::TrainOptions opts = pc.train;
  opts.seed = stream_seed(c.seed, "predictor-shuffle");
  out.report = predictor::train(out.model, train_set, opts);
  out.holdout_accuracy = predictor::evaluate_accuracy(out.model, hold_set);
  std::size_t ones = 0;
  for (const auto& w : train_set) ones += static_cast<std::size_t>(w.label);
  out.label_rate = static_cast<double>(ones) / static_cast<double>(train_set.size());
  return out;
}

predictor::PreferencePredictor obtain_predictor(const config::RunConfig& c, const std::string& version) {
  if (c.predictor.weights) return predictor::PreferencePredictor::load(*c.predictor.weights);
  return train_predictor(c, version).model;
}

std::string PolicyChoice::row_name() const {
  if (kind != policies::Kind::Cdio) return std::string(policies::to_string(kind));
  if (ablation == policies::Ablation::Both) return "cdio";
  return "cdio_" + std::string(policies::to_string(ablation));
}

sim::Workload with_predictions(const sim::Workload& workload, const predictor::PreferencePredictor& predictor) {
  sim::Workload out = workload;
  if (!out.tasks.empty()) sim::assign_predictions(out, predictor);
  return out;
}

CellResult run_cell(const config::RunConfig& c, const sim::Workload& workload, const std::string& version,
                    sim::BandwidthMode mode, const PolicyChoice& choice) {
  const sim::WorldConfig world = config::make_world(c, version, mode);
  policies::PolicySettings settings = config::policy_settings(c);
  settings.ablation = choice.ablation;
  auto policy = policies::make_policy(choice.kind, world, settings, c.workload.delay_lo, c.workload.delay_hi);
  CellResult r;
  r.trace = sim::simulate(world, workload.tasks, *policy, config::simulation_options(c), workload.horizon_slots);
  r.report = metrics::aggregate(r.trace, choice.row_name(), version, std::string(sim::to_string(mode)), c.bandit.phi);
  return r;
}

int cmd_train(const config::RunConfig& c, std::ostream& out) {
  const auto dir = prepare_output(c);
  const TrainedPredictor t = train_predictor(c, c.version);
  t.model.save(dir / ("predictor_" + c.version + ".json"));
  predictor::write_training_csv(t.report, dir / ("training_" + c.version + ".csv"));
  write_text(dir / "config.json", config::to_json(c));
  out << "version " << c.version << ": " << t.report.epochs.size() << " epochs, train accuracy "
      << fixed(t.report.final_accuracy, 4) << ", held-out accuracy " << fixed(t.holdout_accuracy, 4)
      << ", compute-preferring labels " << fixed(t.label_rate, 3) << "\n";
  return kExitOk;
}

int cmd_run(const config::RunConfig& c, const std::string& policy, std::ostream& out) {
  const auto dir = prepare_output(c);
  const PolicyChoice choice{policies::parse_kind(policy), c.ablation};
  sim::Workload workload = make_workload(c);
  if (choice.needs_predictions() && !workload.tasks.empty()) {
    workload = with_predictions(workload, obtain_predictor(c, c.version));
  }
  const CellResult r = run_cell(c, workload, c.version, c.bw_mode, choice);
  metrics::write_task_trace_csv(r.trace, dir / "trace_tasks.csv");
  metrics::write_slot_trace_csv(r.trace, dir / "trace_slots.csv");
  metrics::write_report_json(r.report, dir / "report.json");
  write_text(dir / "config.json", config::to_json(c));
  const auto& m = r.report;
  out << m.policy << " " << m.version << " " << m.bw_mode << ": acc " << fixed(m.avg_accuracy, 2) << " mAP, acc_sr "
      << fixed(m.acc_success_rate, 3) << ", delay_sr " << fixed(m.delay_success_rate, 3) << ", delay "
      << fixed(m.avg_delay_ms, 1) << " ms, compute " << fixed(m.compute_tflop_total, 1) << " TFLOP, bandwidth "
      << fixed(m.bandwidth_mbps_avg, 1) << " Mbps, energy " << fixed(m.energy_j_total, 0) << " J, objective "
      << fixed(m.objective, 2) << "\n";
  return kExitOk;
}

int cmd_matrix(const config::RunConfig& c, const std::vector<policies::Ablation>& ablations, std::ostream& out) {
  const auto dir = prepare_output(c);
  std::vector<PolicyChoice> choices;
  for (const auto& name : c.policies) {
    const auto kind = policies::parse_kind(name);
    if (kind != policies::Kind::Cdio) {
      choices.push_back({kind, policies::Ablation::Both});
      continue;
    }
    for (auto a : ablations) choices.push_back({kind, a});
  }
  bool predictions = false;
  for (const auto& ch : choices) predictions = predictions || ch.needs_predictions();

  const sim::Workload base = make_workload(c);
  std::vector<metrics::RunReport> all;
  std::string comparison;
  for (const auto& version : c.versions) {
    const sim::Workload predicted =
        predictions && !base.tasks.empty() ? with_predictions(base, obtain_predictor(c, version)) : base;
    for (auto mode : c.bw_modes) {
      std::vector<metrics::RunReport> cell;
      std::size_t baseline = 0;
      for (const auto& ch : choices) {
        if (ch.kind == policies::Kind::AllCloud) baseline = cell.size();
        cell.push_back(run_cell(c, predicted, version, mode, ch).report);
        out << "  " << version << " " << sim::to_string(mode) << " " << ch.row_name() << " done\n";
      }
      if (cell.size() >= 2) {
        const auto table = metrics::compare(cell, baseline);
        for (const auto& row : table.rows) comparison += metrics::csv_row(row.report, &row.delta_pct);
      }
      all.insert(all.end(), cell.begin(), cell.end());
    }
  }
  metrics::write_reports_csv(all, dir / "matrix.csv");
  write_text(dir / "comparison.csv", metrics::csv_header(true) + comparison);
  std::string reports = "[\n";
  for (std::size_t i = 0; i < all.size(); ++i) {
    reports += metrics::report_json(all[i]);
    if (i + 1 < all.size()) reports.insert(reports.size() - 1, ",");
  }
  write_text(dir / "reports.json", reports + "]\n");
  write_text(dir / "config.json", config::to_json(c));
  out << all.size() << " rows written to " << (dir / "matrix.csv").string() << "\n";
  return kExitOk;
}

}  // namespace edgecloud::experiment
