#include "edgecloud/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <unordered_map>

#include "edgecloud/error.hpp"

namespace edgecloud::metrics {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

RunReport aggregate(const sim::Trace& trace, std::string policy, std::string version, std::string bw_mode,
                    double phi) {
  if (trace.tasks.empty() || trace.slots.empty()) throw EmptyTraceError("trace has no tasks or no slots");
  if (!(phi >= 0.0)) throw DomainError("phi must be >= 0");
  RunReport r;
  r.policy = std::move(policy);
  r.version = std::move(version);
  r.bw_mode = std::move(bw_mode);
  r.tasks = trace.tasks.size();
  r.slots = trace.slots.size();

  double acc = 0.0, delay = 0.0;
  std::size_t acc_ok = 0, delay_ok = 0, both_ok = 0, cloud = 0, escalated = 0;
  for (const auto& t : trace.tasks) {
    acc += t.accuracy;
    delay += t.delay_s;
    acc_ok += t.accuracy_met() ? 1 : 0;
    delay_ok += t.delay_met() ? 1 : 0;
    both_ok += t.feasible() ? 1 : 0;
    cloud += t.tier == Tier::Cloud ? 1 : 0;
    escalated += t.attempts > 1 ? 1 : 0;
  }
  const double n = static_cast<double>(r.tasks);
  r.avg_accuracy = acc / n;
  r.avg_delay_ms = 1000.0 * delay / n;
  r.acc_success_rate = static_cast<double>(acc_ok) / n;
  r.delay_success_rate = static_cast<double>(delay_ok) / n;
  r.success_rate = static_cast<double>(both_ok) / n;
  r.cloud_fraction = static_cast<double>(cloud) / n;
  r.escalation_rate = static_cast<double>(escalated) / n;

  double bw = 0.0, cost = 0.0;
  r.regret_trace.reserve(r.slots);
  for (const auto& s : trace.slots) {
    r.compute_tflop_total += s.compute_tflop;
    bw += s.bandwidth_mbps;
    cost += s.compute_tflop + phi * s.bandwidth_mbps;
    r.energy_j_total += s.energy.total();
    r.regret_trace.push_back(s.regret);
  }
  const double m = static_cast<double>(r.slots);
  r.bandwidth_mbps_avg = bw / m;
  r.objective = cost / m;
  return r;
}

std::array<double, 7> metric_values(const RunReport& r) {
  return {r.avg_accuracy,        r.acc_success_rate,   r.delay_success_rate, r.avg_delay_ms,
          r.compute_tflop_total, r.bandwidth_mbps_avg, r.energy_j_total};
}

double percent_delta(double subject, double baseline) {
  if (baseline == 0.0) {
    if (subject == 0.0) return 0.0;
    return subject > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return 100.0 * (subject - baseline) / std::abs(baseline);
}

ComparisonTable compare(std::span<const RunReport> reports, std::size_t baseline) {
  if (reports.size() < 2) throw IncomparableError("comparison needs at least two reports");
  if (baseline >= reports.size()) throw IndexError("baseline index out of range");
  ComparisonTable table;
  table.version = reports.front().version;
  table.bw_mode = reports.front().bw_mode;
  table.baseline = baseline;
  for (const auto& r : reports) {
    if (r.version != table.version || r.bw_mode != table.bw_mode) {
      throw IncomparableError("reports mix scenarios (" + table.version + "/" + table.bw_mode + " vs " + r.version +
                              "/" + r.bw_mode + ")");
    }
  }
  const auto base = metric_values(reports[baseline]);
  for (const auto& r : reports) {
    ComparisonRow row{r, {}};
    const auto v = metric_values(r);
    for (std::size_t k = 0; k < v.size(); ++k) row.delta_pct[k] = percent_delta(v[k], base[k]);
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string csv_header(bool with_deltas) {
  std::string h = "policy,version,bw_mode";
  for (const char* m : kMetricNames) h += std::string(",") + m;
  if (with_deltas) {
    for (const char* m : kMetricNames) h += std::string(",") + m + "_delta_pct";
  }
  return h + "\n";
}

std::string csv_row(const RunReport& r, const std::array<double, 7>* deltas) {
  std::string line = r.policy + "," + r.version + "," + r.bw_mode;
  for (double v : metric_values(r)) line += "," + format_number(v);
  if (deltas) {
    for (double d : *deltas) line += "," + format_number(d);
  }
  return line + "\n";
}

void write_reports_csv(std::span<const RunReport> reports, const std::filesystem::path& path) {
  std::string text = csv_header(false);
  for (const auto& r : reports) text += csv_row(r);
  write_text(path, text);
}

void write_comparison_csv(const ComparisonTable& table, const std::filesystem::path& path) {
  std::string text = csv_header(true);
  for (const auto& row : table.rows) text += csv_row(row.report, &row.delta_pct);
  write_text(path, text);
}

std::string report_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["policy"] = r.policy;
  j["version"] = r.version;
  j["bw_mode"] = r.bw_mode;
  j["tasks"] = r.tasks;
  j["slots"] = r.slots;
  j["avg_accuracy"] = r.avg_accuracy;
  j["acc_success_rate"] = r.acc_success_rate;
  j["delay_success_rate"] = r.delay_success_rate;
  j["success_rate"] = r.success_rate;
  j["avg_delay_ms"] = r.avg_delay_ms;
  j["compute_tflop_total"] = r.compute_tflop_total;
  j["bandwidth_mbps_avg"] = r.bandwidth_mbps_avg;
  j["energy_j_total"] = r.energy_j_total;
  j["objective"] = r.objective;
  j["cloud_fraction"] = r.cloud_fraction;
  j["escalation_rate"] = r.escalation_rate;
  j["regret_trace"] = r.regret_trace;
  return j.dump(2) + "\n";
}

void write_report_json(const RunReport& r, const std::filesystem::path& path) { write_text(path, report_json(r)); }

void write_task_trace_csv(const sim::Trace& trace, const std::filesystem::path& path) {
  std::unordered_map<std::uint32_t, const sim::SlotRecord*> slots;
  for (const auto& s : trace.slots) slots.emplace(s.slot, &s);
  std::string text =
      "slot,task_id,server_id,tier,predicted_pref,arrival_slot,attempts,accuracy_req,accuracy,delay_req_s,delay_s,"
      "feasible,compute_tflop,wan_mbit,energy_j,reward,regret\n";
  for (const auto& t : trace.tasks) {
    const auto it = slots.find(t.slot);
    const double reward = it == slots.end() ? 0.0 : it->second->reward;
    const double regret = it == slots.end() ? 0.0 : it->second->regret;
    text += std::to_string(t.slot) + "," + std::to_string(t.task) + "," + std::to_string(t.server) + "," +
            std::string(to_string(t.tier)) + "," + std::string(to_string(t.predicted_pref)) + "," +
            std::to_string(t.arrival_slot) + "," + std::to_string(t.attempts) + "," + format_number(t.accuracy_req) +
            "," + format_number(t.accuracy) + "," + format_number(t.delay_req_s) + "," + format_number(t.delay_s) +
            "," + (t.feasible() ? "1" : "0") + "," + format_number(t.compute_tflop) + "," +
            format_number(t.wan_mbit) + "," + format_number(t.energy_j) + "," + format_number(reward) + "," +
            format_number(regret) + "\n";
  }
  write_text(path, text);
}

void write_slot_trace_csv(const sim::Trace& trace, const std::filesystem::path& path) {
  std::string text =
      "slot,tasks,compute_tflop,bandwidth_mbps,wan_mbps,energy_work_j,energy_idle_j,energy_tx_j,reward,regret\n";
  for (const auto& s : trace.slots) {
    text += std::to_string(s.slot) + "," + std::to_string(s.tasks) + "," + format_number(s.compute_tflop) + "," +
            format_number(s.bandwidth_mbps) + "," + format_number(s.wan_mbps) + "," + format_number(s.energy.work) +
            "," + format_number(s.energy.idle) + "," + format_number(s.energy.transmission) + "," +
            format_number(s.reward) + "," + format_number(s.regret) + "\n";
  }
  write_text(path, text);
}

}  // namespace edgecloud::metrics
