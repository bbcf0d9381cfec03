#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "edgecloud/lstm.hpp"
#include "edgecloud/types.hpp"

namespace edgecloud::predictor {

inline constexpr Eigen::Index kFeatureSize = 4;

/// Per-task input to the LSTM. The four components are kept side by side,
/// each scaled to [0, 1].
struct FeatureVector {
  double time_index = 0.0;  // normalized arrival time
  double complexity = 0.0;
  double accuracy = 0.0;  // A^q / 100
  double delay = 0.0;     // D^q / max delay requirement

  Vector to_vector() const;
  bool operator==(const FeatureVector&) const = default;
};

/// Throws RangeError on non-finite inputs or any component outside [0, 1].
FeatureVector make_feature(const Task& task, double complexity_scaled, double time_index,
                           double max_delay_req_s);

/// Sequence of historical task features, oldest first, and its label
/// (1 = compute-preferring, 0 = bandwidth-preferring).
struct LabeledWindow {
  std::vector<FeatureVector> sequence;
  int label = 0;
};

struct Architecture {
  Eigen::Index input_size = kFeatureSize;
  Eigen::Index hidden_size = 16;
  int layers = 2;
  int seq_len = 8;
};

/// Trainable state: stacked LSTM layers plus the sigmoid head on the last
/// hidden state. Also used as the gradient container.
struct Parameters {
  std::vector<LstmLayerParams> layers;
  Vector head_w;
  double head_b = 0.0;

  static Parameters zeros(const Architecture& arch);
  std::size_t size() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  void set_zero();
  void add_scaled(const Parameters& other, double scale);
  double squared_norm() const;
  bool all_finite() const;
};

/// Cached activations of a forward pass, for backpropagation.
struct ForwardTrace {
  std::vector<std::vector<LstmStepCache>> steps;  // [layer][t]
  Vector top_h;
  double logit = 0.0;
  double probability = 0.5;
};

class PreferencePredictor {
 public:
  /// Throws ShapeError if the layers do not chain (layer k+1 input == layer k
  /// hidden), the head does not match, or fewer than one layer is given.
  PreferencePredictor(Parameters params, int seq_len);

  static PreferencePredictor zeros(const Architecture& arch);

  /// Weights and biases uniform in [-0.1, 0.1]; forget-gate biases set to 1.
  static PreferencePredictor initialized(const Architecture& arch, std::uint64_t seed);

  /// Probability of compute preference, in (0, 1). Throws ShapeError unless
  /// window.size() == seq_len().
  double forward(std::span<const FeatureVector> window) const;
  double forward(std::span<const FeatureVector> window, ForwardTrace& trace) const;

  /// ComputePreferring iff forward(window) >= 0.5.
  Preference predict_preference(std::span<const FeatureVector> window) const;

  int seq_len() const { return seq_len_; }
  Architecture architecture() const;
  const Parameters& params() const { return params_; }
  Parameters& mutable_params() { return params_; }

  /// Versioned JSON document: shape header plus row-major values.
  std::string to_json() const;
  static PreferencePredictor from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static PreferencePredictor load(const std::filesystem::path& path);

 private:
  Parameters params_;
  int seq_len_;
};

inline constexpr double kBceEpsilon = 1e-7;

/// Mean binary cross-entropy. Predictions are clamped to [eps, 1 - eps]
/// before the log. Throws DomainError on empty/mismatched inputs, labels not
/// in {0, 1}, or predictions outside [0, 1].
double bce_loss(std::span<const int> labels, std::span<const double> predictions);

}  // namespace edgecloud::predictor
