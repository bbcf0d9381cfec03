#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "edgecloud/simulator.hpp"

namespace edgecloud::metrics {

/// Evaluation quantities of one run. Per-task averages are unweighted means
/// over tasks; bandwidth and the objective are means over slots.
struct RunReport {
  std::string policy;
  std::string version;
  std::string bw_mode;
  std::size_t tasks = 0;
  std::size_t slots = 0;
  double avg_accuracy = 0.0;  // mAP
  double acc_success_rate = 0.0;
  double delay_success_rate = 0.0;
  double success_rate = 0.0;  // both requirements met
  double avg_delay_ms = 0.0;
  double compute_tflop_total = 0.0;
  double bandwidth_mbps_avg = 0.0;
  double energy_j_total = 0.0;
  double objective = 0.0;  // mean of U_t + phi * B_t
  double cloud_fraction = 0.0;
  double escalation_rate = 0.0;  // tasks needing more than one attempt
  std::vector<double> regret_trace;
};

/// Throws EmptyTraceError if the trace has no tasks or no slots.
RunReport aggregate(const sim::Trace& trace, std::string policy, std::string version, std::string bw_mode,
                    double phi);

/// Metrics that appear in comparison tables, in CSV column order.
inline constexpr std::array<const char*, 7> kMetricNames{"avg_acc",       "acc_sr", "delay_sr", "avg_delay_ms",
                                                         "compute_tflop", "bw_mbps", "energy_j"};

std::array<double, 7> metric_values(const RunReport& r);

/// 100 * (subject - baseline) / |baseline|; 0 when both are 0 and a signed
/// infinity when only the baseline is 0.
double percent_delta(double subject, double baseline);

struct ComparisonRow {
  RunReport report;
  std::array<double, 7> delta_pct{};  // against the baseline row
};

struct ComparisonTable {
  std::string version;
  std::string bw_mode;
  std::size_t baseline = 0;
  std::vector<ComparisonRow> rows;
};

/// Needs >= 2 reports of one version and bandwidth mode (IncomparableError
/// otherwise) and a valid baseline index (IndexError).
ComparisonTable compare(std::span<const RunReport> reports, std::size_t baseline);

std::string csv_header(bool with_deltas);
/// Column order: policy, version, bw_mode, avg_acc, acc_sr, delay_sr,
/// avg_delay_ms, compute_tflop, bw_mbps, energy_j, then the deltas if asked.
std::string csv_row(const RunReport& r, const std::array<double, 7>* deltas = nullptr);

void write_reports_csv(std::span<const RunReport> reports, const std::filesystem::path& path);
void write_comparison_csv(const ComparisonTable& table, const std::filesystem::path& path);

/// Pretty-printed JSON with fixed key order and numeric formatting.
std::string report_json(const RunReport& r);
void write_report_json(const RunReport& r, const std::filesystem::path& path);

/// One row per task: the decision trace joined with its slot's reward and regret.
void write_task_trace_csv(const sim::Trace& trace, const std::filesystem::path& path);
void write_slot_trace_csv(const sim::Trace& trace, const std::filesystem::path& path);

/// Shortest round-trip decimal form, identical across runs.
std::string format_number(double v);

}  // namespace edgecloud::metrics
