#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "edgecloud/types.hpp"

namespace edgecloud::catalog {

/// YOLOv5 family: params (M), mAP50, GFLOPs per inference.
std::span<const ModelSpec> models();

/// Throws ConfigError on an unknown name.
const ModelSpec& model(std::string_view name);

/// Edge/cloud model pairing of a deployment version.
struct DeploymentVersion {
  std::string_view name;
  const ModelSpec* edge_model;
  const ModelSpec* cloud_model;
};

/// "V1".."V4". Throws ConfigError on an unknown name.
DeploymentVersion version(std::string_view name);
std::span<const std::string_view> version_names();

/// Per-tier hardware and power defaults; calibration inputs, not measurements.
struct TierDefaults {
  double fp16_tflops;
  double work_power_w;
  double idle_power_w;
  double tx_power_w;
  std::uint32_t max_concurrency;
};

inline constexpr TierDefaults kEdgeDefaults{21.0, 15.0, 5.0, 2.0, 4};
inline constexpr TierDefaults kCloudDefaults{312.0, 300.0, 60.0, 10.0, 16};

/// `edge_count` edge servers (ids 0..edge_count-1) followed by one cloud server.
/// Throws NoServerError if edge_count is 0.
std::vector<ServerSpec> make_servers(const DeploymentVersion& version, std::size_t edge_count,
                                     const TierDefaults& edge = kEdgeDefaults,
                                     const TierDefaults& cloud = kCloudDefaults);

}  // namespace edgecloud::catalog
