#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace edgecloud {

enum class Preference : std::uint8_t { BandwidthPreferring = 0, ComputePreferring = 1 };

enum class Tier : std::uint8_t { Edge = 0, Cloud = 1 };

std::string_view to_string(Preference p);
std::string_view to_string(Tier t);

using TaskId = std::uint32_t;
using ServerId = std::uint32_t;

/// One inference request.
struct Task {
  TaskId id = 0;
  std::uint32_t arrival_slot = 0;
  double data_size_mbit = 0.0;
  double accuracy_req = 0.0;  // mAP points
  double delay_req_s = 0.0;
  double complexity = 0.0;  // scaled to [0, 1]
  Preference predicted_pref = Preference::BandwidthPreferring;
};

/// Throws RangeError unless accuracy_req in [0, 100], delay_req > 0,
/// data_size > 0 and complexity in [0, 1].
void validate(const Task& task);

/// Detection model profile (params in millions, FLOPs in GFLOP per inference).
struct ModelSpec {
  std::string name;
  double params_millions = 0.0;
  double map50 = 0.0;
  double gflops = 0.0;
};

struct ServerSpec {
  ServerId id = 0;
  Tier tier = Tier::Edge;
  double fp16_tflops = 0.0;
  double work_power_w = 0.0;
  double idle_power_w = 0.0;
  double tx_power_w = 0.0;
  ModelSpec model;
  std::uint32_t max_concurrency = 1;
};

}  // namespace edgecloud
