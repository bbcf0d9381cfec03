#include "edgecloud/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "edgecloud/error.hpp"
#include "edgecloud/rng.hpp"

namespace edgecloud::config {

namespace {

using json = nlohmann::ordered_json;

// Reads the keys of one JSON object and rejects any it was not asked about.
class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where_ + "." + key + " has the wrong type");
    }
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), where_ + "." + key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown key " + where_ + "." + item.key());
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::string_view fallback_name(scheduler::Fallback f) {
  return f == scheduler::Fallback::MinCost ? "min_cost" : "max_feasibility";
}

scheduler::Fallback parse_fallback(std::string_view s) {
  if (s == "min_cost") return scheduler::Fallback::MinCost;
  if (s == "max_feasibility") return scheduler::Fallback::MaxFeasibility;
  throw ConfigError("unknown fallback '" + std::string(s) + "' (expected min_cost or max_feasibility)");
}

void read_tier(Section s, catalog::TierDefaults& t) {
  s.read("fp16_tflops", t.fp16_tflops);
  s.read("work_power_w", t.work_power_w);
  s.read("idle_power_w", t.idle_power_w);
  s.read("tx_power_w", t.tx_power_w);
  s.read("max_concurrency", t.max_concurrency);
  s.finish();
}

json tier_json(const catalog::TierDefaults& t) {
  return json{{"fp16_tflops", t.fp16_tflops},
              {"work_power_w", t.work_power_w},
              {"idle_power_w", t.idle_power_w},
              {"tx_power_w", t.tx_power_w},
              {"max_concurrency", t.max_concurrency}};
}

void read_range(Section& s, const std::string& key, double& lo, double& hi) {
  if (!s.has(key)) return;
  const json& r = s.raw(key);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
    throw ConfigError(key + " must be a [lo, hi] pair of numbers");
  }
  lo = r[0].get<double>();
  hi = r[1].get<double>();
}

}  // namespace

void RunConfig::validate() const {
  catalog::version(version);
  for (const auto& v : versions) catalog::version(v);
  for (const auto& p : policies) policies::parse_kind(p);
  if (policies.empty() || versions.empty() || bw_modes.empty()) throw ConfigError("matrix axes must not be empty");
  if (!(bw_base_mbps > 0.0)) throw ConfigError("bandwidth base must be > 0");
  if (!(bw_fluctuation >= 0.0 && bw_fluctuation < 1.0)) throw ConfigError("bandwidth fluctuation must lie in [0, 1)");
  if (workload.n_tasks > 0) workload.validate();
  if (edge_count == 0) throw ConfigError("at least one edge server is required");
  for (const auto* t : {&edge, &cloud}) {
    if (!(t->fp16_tflops > 0.0) || t->work_power_w < 0.0 || t->idle_power_w < 0.0 || t->tx_power_w < 0.0 ||
        t->max_concurrency == 0) {
      throw ConfigError("server throughput and concurrency must be > 0 and powers >= 0");
    }
  }
  if (!(cloud.fp16_tflops > edge.fp16_tflops)) throw ConfigError("cloud FP16 throughput must exceed the edge's");
  if (!(local_link_factor > 0.0 && slot_s > 0.0 && preproc_s >= 0.0 && accuracy_penalty >= 0.0)) {
    throw ConfigError("world parameters out of range");
  }
  try {
    bandit.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const auto& p = predictor;
  if (p.architecture.hidden_size < 1 || p.architecture.layers < 1 || p.architecture.seq_len < 1) {
    throw ConfigError("predictor architecture sizes must be >= 1");
  }
  if (p.train.epochs < 1 || !(p.train.learning_rate > 0.0) || p.train.batch_size == 0 || p.train.clip_norm < 0.0) {
    throw ConfigError("predictor training parameters out of range");
  }
  if (p.train_windows == 0 || p.holdout_windows == 0) throw ConfigError("predictor datasets must be non-empty");
  if (!(p.label_slack >= 0.0 && p.label_slack < 1.0)) throw ConfigError("label slack must lie in [0, 1)");
  if (p.weights && !std::filesystem::exists(*p.weights)) {
    throw ConfigError("weights file " + p.weights->string() + " does not exist");
  }
}

static RunConfig parse_document(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(doc, "config");
  if (!root.has("schema_version")) throw ConfigError("config.schema_version is required");
  int schema = 0;
  root.read("schema_version", schema);
  if (schema != kSchemaVersion) throw ConfigError("unsupported schema_version " + std::to_string(schema));

  if (root.has("seed")) {
    if (!root.raw("seed").is_number_unsigned()) throw ConfigError("config.seed must be an unsigned 64-bit integer");
    c.seed = root.raw("seed").get<std::uint64_t>();
  }
  root.read("version", c.version);
  root.read("versions", c.versions);
  root.read("policies", c.policies);
  if (root.has("ablation")) c.ablation = policies::parse_ablation(root.raw("ablation").get<std::string>());
  if (root.has("output_dir")) {
    c.output_dir = root.raw("output_dir").get<std::string>();
  }

  if (root.has("bandwidth")) {
    Section s = root.sub("bandwidth");
    std::string mode;
    s.read("mode", mode);
    if (!mode.empty()) c.bw_mode = sim::parse_bandwidth_mode(mode);
    s.read("base_mbps", c.bw_base_mbps);
    s.read("fluctuation", c.bw_fluctuation);
    if (s.has("matrix_modes")) {
      c.bw_modes.clear();
      for (const auto& m : s.raw("matrix_modes")) c.bw_modes.push_back(sim::parse_bandwidth_mode(m.get<std::string>()));
    }
    s.finish();
  }

  if (root.has("workload")) {
    Section s = root.sub("workload");
    auto& w = c.workload;
    s.read("n_tasks", w.n_tasks);
    s.read("arrival_rate", w.arrival_rate);
    read_range(s, "accuracy_req", w.acc_lo, w.acc_hi);
    read_range(s, "delay_req_s", w.delay_lo, w.delay_hi);
    s.read("frame_side", w.frame_side);
    s.read("frame_width", w.frame_width);
    s.read("frame_height", w.frame_height);
    s.read("bits_per_pixel", w.bits_per_pixel);
    s.read("compression_ratio", w.compression_ratio);
    s.finish();
  }

  if (root.has("world")) {
    Section s = root.sub("world");
    s.read("edge_count", c.edge_count);
    if (s.has("edge")) read_tier(s.sub("edge"), c.edge);
    if (s.has("cloud")) read_tier(s.sub("cloud"), c.cloud);
    s.read("local_link_factor", c.local_link_factor);
    s.read("slot_s", c.slot_s);
    s.read("preproc_s", c.preproc_s);
    s.read("accuracy_penalty", c.accuracy_penalty);
    s.finish();
  }

  if (root.has("scheduler")) {
    Section s = root.sub("scheduler");
    auto& b = c.bandit;
    s.read("phi", b.phi);
    s.read("alpha", b.alpha);
    s.read("beta", b.beta);
    s.read("exploration", b.exploration);
    s.read("feasibility_threshold", b.feasibility_threshold);
    if (s.has("fallback")) b.fallback = parse_fallback(s.raw("fallback").get<std::string>());
    if (s.has("escalation")) c.escalate = scheduler::parse_escalate(s.raw("escalation").get<std::string>());
    s.read("count_failed_attempt_delay", c.count_failed_attempt_delay);
    s.finish();
  }

  if (root.has("predictor")) {
    Section s = root.sub("predictor");
    auto& p = c.predictor;
    if (s.has("weights") && !s.raw("weights").is_null()) {
      p.weights = std::filesystem::path(s.raw("weights").get<std::string>());
    }
    s.read("hidden_size", p.architecture.hidden_size);
    s.read("layers", p.architecture.layers);
    s.read("seq_len", p.architecture.seq_len);
    s.read("epochs", p.train.epochs);
    s.read("learning_rate", p.train.learning_rate);
    s.read("batch_size", p.train.batch_size);
    s.read("clip_norm", p.train.clip_norm);
    s.read("train_windows", p.train_windows);
    s.read("holdout_windows", p.holdout_windows);
    if (s.has("label_rule")) p.label_rule = sim::parse_label_rule(s.raw("label_rule").get<std::string>());
    s.read("label_slack", p.label_slack);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig parse(const std::string& json_text) {
  try {
    return parse_document(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string to_json(const RunConfig& c) {
  json modes = json::array();
  for (auto m : c.bw_modes) modes.push_back(std::string(sim::to_string(m)));
  const auto& w = c.workload;
  const auto& b = c.bandit;
  const auto& p = c.predictor;
  json doc{
      {"schema_version", kSchemaVersion},
      {"seed", c.seed},
      {"version", c.version},
      {"versions", c.versions},
      {"policies", c.policies},
      {"ablation", std::string(policies::to_string(c.ablation))},
      {"output_dir", c.output_dir.string()},
      {"bandwidth",
       {{"mode", std::string(sim::to_string(c.bw_mode))},
        {"base_mbps", c.bw_base_mbps},
        {"fluctuation", c.bw_fluctuation},
        {"matrix_modes", modes}}},
      {"workload",
       {{"n_tasks", w.n_tasks},
        {"arrival_rate", w.arrival_rate},
        {"accuracy_req", {w.acc_lo, w.acc_hi}},
        {"delay_req_s", {w.delay_lo, w.delay_hi}},
        {"frame_side", w.frame_side},
        {"frame_width", w.frame_width},
        {"frame_height", w.frame_height},
        {"bits_per_pixel", w.bits_per_pixel},
        {"compression_ratio", w.compression_ratio}}},
      {"world",
       {{"edge_count", c.edge_count},
        {"edge", tier_json(c.edge)},
        {"cloud", tier_json(c.cloud)},
        {"local_link_factor", c.local_link_factor},
        {"slot_s", c.slot_s},
        {"preproc_s", c.preproc_s},
        {"accuracy_penalty", c.accuracy_penalty}}},
      {"scheduler",
       {{"phi", b.phi},
        {"alpha", b.alpha},
        {"beta", b.beta},
        {"exploration", b.exploration},
        {"feasibility_threshold", b.feasibility_threshold},
        {"fallback", std::string(fallback_name(b.fallback))},
        {"escalation", std::string(scheduler::to_string(c.escalate))},
        {"count_failed_attempt_delay", c.count_failed_attempt_delay}}},
      {"predictor",
       {{"weights", p.weights ? json(p.weights->string()) : json(nullptr)},
        {"hidden_size", p.architecture.hidden_size},
        {"layers", p.architecture.layers},
        {"seq_len", p.architecture.seq_len},
        {"epochs", p.train.epochs},
        {"learning_rate", p.train.learning_rate},
        {"batch_size", p.train.batch_size},
        {"clip_norm", p.train.clip_norm},
        {"train_windows", p.train_windows},
        {"holdout_windows", p.holdout_windows},
        {"label_rule", std::string(sim::to_string(p.label_rule))},
        {"label_slack", p.label_slack}}},
  };
  return doc.dump(2) + "\n";
}

sim::WorldConfig make_world(const RunConfig& c, const std::string& version, sim::BandwidthMode mode) {
  sim::WorldConfig w;
  w.servers = catalog::make_servers(catalog::version(version), c.edge_count, c.edge, c.cloud);
  w.wan.mode = mode;
  w.wan.base_mbps = c.bw_base_mbps;
  w.wan.fluctuation = c.bw_fluctuation;
  w.wan.seed = stream_seed(c.seed, "bandwidth");
  w.local_link_factor = c.local_link_factor;
  w.slot_s = c.slot_s;
  w.preproc_s = c.preproc_s;
  w.accuracy_penalty = c.accuracy_penalty;
  w.validate();
  return w;
}

sim::WorkloadSpec workload_spec(const RunConfig& c) {
  sim::WorkloadSpec w = c.workload;
  w.seed = stream_seed(c.seed, "workload");
  return w;
}

policies::PolicySettings policy_settings(const RunConfig& c) {
  policies::PolicySettings s;
  s.bandit = c.bandit;
  s.escalate = c.escalate;
  s.ablation = c.ablation;
  s.seed = stream_seed(c.seed, "policy");
  return s;
}

sim::SimulationOptions simulation_options(const RunConfig& c) {
  sim::SimulationOptions o;
  o.phi = c.bandit.phi;
  o.alpha = c.bandit.alpha;
  o.beta = c.bandit.beta;
  o.count_failed_attempt_delay = c.count_failed_attempt_delay;
  return o;
}

}  // namespace edgecloud::config
