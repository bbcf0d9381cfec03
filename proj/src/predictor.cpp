#include "edgecloud/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "edgecloud/error.hpp"
#include "edgecloud/rng.hpp"

namespace edgecloud::predictor {

using json = nlohmann::ordered_json;

Vector FeatureVector::to_vector() const {
  Vector v(kFeatureSize);
  v << time_index, complexity, accuracy, delay;
  return v;
}

FeatureVector make_feature(const Task& task, double complexity_scaled, double time_index,
                           double max_delay_req_s) {
  for (double v : {complexity_scaled, time_index, task.accuracy_req, task.delay_req_s, max_delay_req_s}) {
    if (!std::isfinite(v)) throw RangeError("non-finite feature input");
  }
  if (max_delay_req_s <= 0.0) throw RangeError("max delay requirement must be > 0");
  FeatureVector f{time_index, complexity_scaled, task.accuracy_req / 100.0,
                  task.delay_req_s / max_delay_req_s};
  for (double v : {f.time_index, f.complexity, f.accuracy, f.delay}) {
    if (v < 0.0 || v > 1.0) throw RangeError("feature component outside [0, 1]");
  }
  return f;
}

// ---------------------------------------------------------------------------
// Parameters

Parameters Parameters::zeros(const Architecture& arch) {
  if (arch.layers < 1 || arch.hidden_size < 1 || arch.input_size < 1) {
    throw ShapeError("architecture needs at least one layer and positive sizes");
  }
  Parameters p;
  for (int k = 0; k < arch.layers; ++k) {
    p.layers.push_back(LstmLayerParams::zeros(arch.hidden_size, k == 0 ? arch.input_size : arch.hidden_size));
  }
  p.head_w = Vector::Zero(arch.hidden_size);
  return p;
}

namespace {

// Visits every parameter block in a fixed order: per layer the four gate
// weights then the four biases, then the head weights and bias.
template <typename Params, typename Fn>
void for_each_block(Params& p, Fn&& fn) {
  for (auto& layer : p.layers) {
    for (auto* w : {&layer.forget_w, &layer.input_w, &layer.candidate_w, &layer.output_w})
      fn(w->data(), static_cast<std::size_t>(w->size()));
    for (auto* b : {&layer.forget_b, &layer.input_b, &layer.candidate_b, &layer.output_b})
      fn(b->data(), static_cast<std::size_t>(b->size()));
  }
  fn(p.head_w.data(), static_cast<std::size_t>(p.head_w.size()));
  fn(&p.head_b, std::size_t{1});
}

}  // namespace

std::size_t Parameters::size() const {
  std::size_t n = 0;
  for_each_block(*this, [&](const double*, std::size_t len) { n += len; });
  return n;
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  for_each_block(*this, [&](const double* d, std::size_t n) { flat.insert(flat.end(), d, d + n); });
  return flat;
}

void Parameters::assign(std::span<const double> flat) {
  if (flat.size() != size()) throw ShapeError("flat parameter vector has the wrong length");
  std::size_t offset = 0;
  for_each_block(*this, [&](double* d, std::size_t n) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), n, d);
    offset += n;
  });
}

void Parameters::set_zero() {
  for_each_block(*this, [](double* d, std::size_t n) { std::fill_n(d, n, 0.0); });
}

void Parameters::add_scaled(const Parameters& other, double scale) {
  std::vector<const double*> src;
  std::vector<std::size_t> lens;
  for_each_block(other, [&](const double* d, std::size_t n) {
    src.push_back(d);
    lens.push_back(n);
  });
  std::size_t idx = 0;
  for_each_block(*this, [&](double* d, std::size_t n) {
    if (idx >= src.size() || lens[idx] != n) throw ShapeError("parameter shape mismatch");
    for (std::size_t i = 0; i < n; ++i) d[i] += scale * src[idx][i];
    ++idx;
  });
}

double Parameters::squared_norm() const {
  double s = 0.0;
  for_each_block(*this, [&](const double* d, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) s += d[i] * d[i];
  });
  return s;
}

bool Parameters::all_finite() const {
  bool ok = true;
  for_each_block(*this, [&](const double* d, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) ok = ok && std::isfinite(d[i]);
  });
  return ok;
}

// ---------------------------------------------------------------------------
// PreferencePredictor

PreferencePredictor::PreferencePredictor(Parameters params, int seq_len)
    : params_(std::move(params)), seq_len_(seq_len) {
  if (params_.layers.empty()) throw ShapeError("predictor needs at least one LSTM layer");
  if (seq_len_ < 1) throw ShapeError("seq_len must be >= 1");
  for (std::size_t k = 0; k < params_.layers.size(); ++k) {
    params_.layers[k].validate();
    if (k > 0 && params_.layers[k].input_size() != params_.layers[k - 1].hidden_size()) {
      throw ShapeError("LSTM layer " + std::to_string(k) + " input does not match previous hidden size");
    }
  }
  if (params_.head_w.size() != params_.layers.back().hidden_size()) {
    throw ShapeError("head weight size does not match top hidden size");
  }
}

PreferencePredictor PreferencePredictor::zeros(const Architecture& arch) {
  return {Parameters::zeros(arch), arch.seq_len};
}

PreferencePredictor PreferencePredictor::initialized(const Architecture& arch, std::uint64_t seed) {
  Parameters p = Parameters::zeros(arch);
  Rng rng(seed);
  for_each_block(p, [&](double* d, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) d[i] = rng.uniform(-0.1, 0.1);
  });
  for (auto& layer : p.layers) layer.forget_b.setConstant(1.0);
  return {std::move(p), arch.seq_len};
}

Architecture PreferencePredictor::architecture() const {
  return {params_.layers.front().input_size(), params_.layers.front().hidden_size(),
          static_cast<int>(params_.layers.size()), seq_len_};
}

double PreferencePredictor::forward(std::span<const FeatureVector> window, ForwardTrace& trace) const {
  if (static_cast<int>(window.size()) != seq_len_) {
    throw ShapeError("window length " + std::to_string(window.size()) + " != seq_len " +
                     std::to_string(seq_len_));
  }
  const std::size_t n_layers = params_.layers.size();
  trace.steps.resize(n_layers);
  std::vector<Vector> inputs;
  inputs.reserve(window.size());
  for (const auto& f : window) inputs.push_back(f.to_vector());

  for (std::size_t k = 0; k < n_layers; ++k) {
    const auto& layer = params_.layers[k];
    auto& caches = trace.steps[k];
    caches.resize(window.size());
    LstmState state = LstmState::zeros(layer.hidden_size());
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      state = lstm_step(layer, state, inputs[t], caches[t]);
      inputs[t] = state.h;  // h-sequence feeds the next layer
    }
  }
  trace.top_h = inputs.back();
  trace.logit = params_.head_w.dot(trace.top_h) + params_.head_b;
  trace.probability = sigmoid(trace.logit);
  return trace.probability;
}

double PreferencePredictor::forward(std::span<const FeatureVector> window) const {
  ForwardTrace trace;
  return forward(window, trace);
}

Preference PreferencePredictor::predict_preference(std::span<const FeatureVector> window) const {
  return forward(window) >= 0.5 ? Preference::ComputePreferring : Preference::BandwidthPreferring;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr const char* kFormat = "edgecloud.lstm-preference-predictor";
constexpr int kFormatVersion = 1;

json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    throw ShapeError("serialized matrix shape does not match its data");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
  return m;
}

Vector vector_from_json(const json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(data.size()));
}

std::vector<double> vector_to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string PreferencePredictor::to_json() const {
  const Architecture arch = architecture();
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kFormatVersion;
  doc["input_size"] = arch.input_size;
  doc["hidden_size"] = arch.hidden_size;
  doc["seq_len"] = seq_len_;
  json layers = json::array();
  for (const auto& l : params_.layers) {
    layers.push_back(json{{"forget_w", matrix_to_json(l.forget_w)},
                          {"input_w", matrix_to_json(l.input_w)},
                          {"candidate_w", matrix_to_json(l.candidate_w)},
                          {"output_w", matrix_to_json(l.output_w)},
                          {"forget_b", vector_to_std(l.forget_b)},
                          {"input_b", vector_to_std(l.input_b)},
                          {"candidate_b", vector_to_std(l.candidate_b)},
                          {"output_b", vector_to_std(l.output_b)}});
  }
  doc["layers"] = std::move(layers);
  doc["head"] = json{{"w", vector_to_std(params_.head_w)}, {"b", params_.head_b}};
  return doc.dump(1) + "\n";
}

PreferencePredictor PreferencePredictor::from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) throw ConfigError("not a predictor weights file");
    if (doc.at("version").get<int>() != kFormatVersion) {
      throw ConfigError("unsupported predictor weights version " + doc.at("version").dump());
    }
    Parameters p;
    for (const auto& l : doc.at("layers")) {
      LstmLayerParams layer;
      layer.forget_w = matrix_from_json(l.at("forget_w"));
      layer.input_w = matrix_from_json(l.at("input_w"));
      layer.candidate_w = matrix_from_json(l.at("candidate_w"));
      layer.output_w = matrix_from_json(l.at("output_w"));
      layer.forget_b = vector_from_json(l.at("forget_b"));
      layer.input_b = vector_from_json(l.at("input_b"));
      layer.candidate_b = vector_from_json(l.at("candidate_b"));
      layer.output_b = vector_from_json(l.at("output_b"));
      p.layers.push_back(std::move(layer));
    }
    p.head_w = vector_from_json(doc.at("head").at("w"));
    p.head_b = doc.at("head").at("b").get<double>();
    PreferencePredictor predictor(std::move(p), doc.at("seq_len").get<int>());
    const Architecture arch = predictor.architecture();
    if (arch.input_size != doc.at("input_size").get<Eigen::Index>() ||
        arch.hidden_size != doc.at("hidden_size").get<Eigen::Index>()) {
      throw ShapeError("predictor header does not match layer shapes");
    }
    return predictor;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed predictor weights: ") + e.what());
  }
}

void PreferencePredictor::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_json();
}

PreferencePredictor PreferencePredictor::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read predictor weights " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ---------------------------------------------------------------------------

double bce_loss(std::span<const int> labels, std::span<const double> predictions) {
  if (labels.empty() || labels.size() != predictions.size()) {
    throw DomainError("BCE needs equal-length, non-empty label and prediction lists");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int g = labels[i];
    const double p = predictions[i];
    if (g != 0 && g != 1) throw DomainError("BCE label must be 0 or 1");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("BCE prediction outside [0, 1]");
    const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
    sum += g == 1 ? std::log(q) : std::log(1.0 - q);
  }
  return -sum / static_cast<double>(labels.size());
}

}  // namespace edgecloud::predictor
