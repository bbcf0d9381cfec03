#include "edgecloud/catalog.hpp"

#include <array>
#include <cmath>
#include <string>

#include "edgecloud/error.hpp"

namespace edgecloud {

std::string_view to_string(Preference p) {
  return p == Preference::ComputePreferring ? "compute" : "bandwidth";
}

std::string_view to_string(Tier t) { return t == Tier::Cloud ? "cloud" : "edge"; }

void validate(const Task& task) {
  auto bad = [&](const char* what) {
    throw RangeError("task " + std::to_string(task.id) + ": " + what);
  };
  if (!std::isfinite(task.accuracy_req) || task.accuracy_req < 0.0 || task.accuracy_req > 100.0)
    bad("accuracy requirement outside [0, 100]");
  if (!std::isfinite(task.delay_req_s) || task.delay_req_s <= 0.0) bad("delay requirement must be > 0");
  if (!std::isfinite(task.data_size_mbit) || task.data_size_mbit <= 0.0) bad("data size must be > 0");
  if (!std::isfinite(task.complexity) || task.complexity < 0.0 || task.complexity > 1.0)
    bad("complexity outside [0, 1]");
}

namespace catalog {

namespace {

const std::array<ModelSpec, 6> kModels{{
    {"YOLOv5s", 7.2, 56.8, 16.5},
    {"YOLOv5l", 46.5, 67.3, 109.1},
    {"YOLOv5x", 86.7, 68.9, 205.7},
    {"YOLOv5s6", 12.6, 63.7, 16.8},
    {"YOLOv5l6", 76.8, 71.3, 111.4},
    {"YOLOv5x6", 140.7, 72.7, 209.8},
}};

constexpr std::array<std::string_view, 4> kVersionNames{"V1", "V2", "V3", "V4"};

}  // namespace

std::span<const ModelSpec> models() { return kModels; }

const ModelSpec& model(std::string_view name) {
  for (const auto& m : kModels) {
    if (m.name == name) return m;
  }
  throw ConfigError("unknown model: " + std::string(name));
}

DeploymentVersion version(std::string_view name) {
  if (name == "V1") return {kVersionNames[0], &model("YOLOv5s"), &model("YOLOv5l")};
  if (name == "V2") return {kVersionNames[1], &model("YOLOv5s"), &model("YOLOv5x")};
  if (name == "V3") return {kVersionNames[2], &model("YOLOv5s6"), &model("YOLOv5l6")};
  if (name == "V4") return {kVersionNames[3], &model("YOLOv5s6"), &model("YOLOv5x6")};
  throw ConfigError("unknown deployment version: " + std::string(name));
}

std::span<const std::string_view> version_names() { return kVersionNames; }

std::vector<ServerSpec> make_servers(const DeploymentVersion& version, std::size_t edge_count,
                                     const TierDefaults& edge, const TierDefaults& cloud) {
  if (edge_count == 0) throw NoServerError("at least one edge server is required");
  std::vector<ServerSpec> servers;
  servers.reserve(edge_count + 1);
  for (std::size_t i = 0; i < edge_count; ++i) {
    servers.push_back({static_cast<ServerId>(i), Tier::Edge, edge.fp16_tflops, edge.work_power_w,
                       edge.idle_power_w, edge.tx_power_w, *version.edge_model, edge.max_concurrency});
  }
  servers.push_back({static_cast<ServerId>(edge_count), Tier::Cloud, cloud.fp16_tflops,
                     cloud.work_power_w, cloud.idle_power_w, cloud.tx_power_w, *version.cloud_model,
                     cloud.max_concurrency});
  return servers;
}

}  // namespace catalog
}  // namespace edgecloud
