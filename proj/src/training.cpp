#include "edgecloud/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "edgecloud/error.hpp"
#include "edgecloud/rng.hpp"

namespace edgecloud::predictor {

namespace {

struct BatchResult {
  double loss_sum = 0.0;
  std::size_t correct = 0;
};

double sample_loss(int label, double p) {
  const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return label == 1 ? -std::log(q) : -std::log(1.0 - q);
}

bool classified_correctly(int label, double p) { return (p >= 0.5 ? 1 : 0) == label; }

// Accumulates (not overwrites) the gradient of `scale * BCE(window)` into grad.
BatchResult backprop_window(const PreferencePredictor& predictor, const LabeledWindow& sample,
                            double scale, Parameters& grad, ForwardTrace& trace) {
  const double p = predictor.forward(sample.sequence, trace);
  const Parameters& params = predictor.params();

  const double dlogit = scale * (p - static_cast<double>(sample.label));
  grad.head_w += dlogit * trace.top_h;
  grad.head_b += dlogit;

  const std::size_t steps = sample.sequence.size();
  std::vector<Vector> dh_ext(steps, Vector::Zero(params.layers.back().hidden_size()));
  dh_ext.back() = dlogit * params.head_w;

  for (std::size_t k = params.layers.size(); k-- > 0;) {
    const LstmLayerParams& layer = params.layers[k];
    LstmLayerParams& g = grad.layers[k];
    const auto& caches = trace.steps[k];
    const Eigen::Index hidden = layer.hidden_size();
    const Eigen::Index input = layer.input_size();

    Vector dh_next = Vector::Zero(hidden);
    Vector dc_next = Vector::Zero(hidden);
    std::vector<Vector> dx(steps);
    for (std::size_t t = steps; t-- > 0;) {
      const LstmStepCache& c = caches[t];
      const Vector dh = dh_ext[t] + dh_next;
      const auto one = Vector::Ones(hidden).array();

      const Vector dz_output =
          (dh.array() * c.cell_tanh.array() * c.output.array() * (one - c.output.array())).matrix();
      const Vector dc = (dh.array() * c.output.array() * (one - c.cell_tanh.array().square())).matrix() + dc_next;
      const Vector dz_forget =
          (dc.array() * c.cell_prev.array() * c.forget.array() * (one - c.forget.array())).matrix();
      const Vector dz_input =
          (dc.array() * c.candidate.array() * c.input.array() * (one - c.input.array())).matrix();
      const Vector dz_candidate =
          (dc.array() * c.input.array() * (one - c.candidate.array().square())).matrix();
      dc_next = dc.cwiseProduct(c.forget);

      g.forget_w.noalias() += dz_forget * c.concat.transpose();
      g.input_w.noalias() += dz_input * c.concat.transpose();
      g.candidate_w.noalias() += dz_candidate * c.concat.transpose();
      g.output_w.noalias() += dz_output * c.concat.transpose();
      g.forget_b += dz_forget;
      g.input_b += dz_input;
      g.candidate_b += dz_candidate;
      g.output_b += dz_output;

      Vector dconcat = layer.forget_w.transpose() * dz_forget;
      dconcat.noalias() += layer.input_w.transpose() * dz_input;
      dconcat.noalias() += layer.candidate_w.transpose() * dz_candidate;
      dconcat.noalias() += layer.output_w.transpose() * dz_output;
      dh_next = dconcat.head(hidden);
      dx[t] = dconcat.tail(input);
    }
    dh_ext = std::move(dx);
  }
  return {sample_loss(sample.label, p), classified_correctly(sample.label, p) ? 1u : 0u};
}

// `grad` must be zeroed and shaped like the predictor's parameters.
template <typename Batch, typename Get>
BatchResult batch_gradient(const PreferencePredictor& predictor, const Batch& batch, Get get, Parameters& grad) {
  BatchResult total;
  ForwardTrace trace;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& item : batch) {
    const LabeledWindow& sample = get(item);
    if (sample.label != 0 && sample.label != 1) throw DomainError("window label must be 0 or 1");
    const BatchResult r = backprop_window(predictor, sample, scale, grad, trace);
    total.loss_sum += r.loss_sum;
    total.correct += r.correct;
  }
  return total;
}

}  // namespace

double loss_and_gradient(const PreferencePredictor& predictor, std::span<const LabeledWindow> batch,
                         Parameters& grad) {
  if (batch.empty()) throw DomainError("gradient of an empty batch");
  grad = Parameters::zeros(predictor.architecture());
  const auto same = [](const LabeledWindow& w) -> const LabeledWindow& { return w; };
  return batch_gradient(predictor, batch, same, grad).loss_sum / static_cast<double>(batch.size());
}

double evaluate_loss(const PreferencePredictor& predictor, std::span<const LabeledWindow> data) {
  if (data.empty()) throw DomainError("loss of an empty dataset");
  std::vector<int> labels;
  std::vector<double> preds;
  labels.reserve(data.size());
  preds.reserve(data.size());
  for (const auto& w : data) {
    labels.push_back(w.label);
    preds.push_back(predictor.forward(w.sequence));
  }
  return bce_loss(labels, preds);
}

double evaluate_accuracy(const PreferencePredictor& predictor, std::span<const LabeledWindow> data) {
  if (data.empty()) throw DomainError("accuracy of an empty dataset");
  std::size_t correct = 0;
  for (const auto& w : data) correct += classified_correctly(w.label, predictor.forward(w.sequence)) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainingReport train(PreferencePredictor& predictor, std::span<const LabeledWindow> data,
                     const TrainOptions& options) {
  if (data.empty()) throw DomainError("training set is empty");
  if (!(options.learning_rate > 0.0)) throw DomainError("learning rate must be > 0");
  if (options.batch_size == 0) throw DomainError("batch size must be >= 1");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(options.seed);
  Parameters grad = Parameters::zeros(predictor.architecture());
  std::vector<std::size_t> batch;
  batch.reserve(options.batch_size);

  TrainingReport report;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(order[i]);

      const auto lookup = [&](std::size_t i) -> const LabeledWindow& { return data[i]; };
      grad.set_zero();
      const BatchResult r = batch_gradient(predictor, batch, lookup, grad);
      loss_sum += r.loss_sum;
      correct += r.correct;

      const double norm = std::sqrt(grad.squared_norm());
      const double clip = (options.clip_norm > 0.0 && norm > options.clip_norm) ? options.clip_norm / norm : 1.0;
      predictor.mutable_params().add_scaled(grad, -options.learning_rate * clip);
    }
    const double n = static_cast<double>(data.size());
    EpochStats stats{epoch, loss_sum / n, static_cast<double>(correct) / n};
    if (!std::isfinite(stats.loss) || !predictor.params().all_finite()) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch));
    }
    report.epochs.push_back(stats);
  }
  report.final_loss = evaluate_loss(predictor, data);
  report.final_accuracy = evaluate_accuracy(predictor, data);
  if (!std::isfinite(report.final_loss)) throw DivergenceError("final training loss is not finite");
  return report;
}

void write_training_csv(const TrainingReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "epoch,loss,accuracy\n";
  char line[96];
  for (const auto& e : report.epochs) {
    std::snprintf(line, sizeof line, "%d,%.10g,%.10g\n", e.epoch, e.loss, e.accuracy);
    out << line;
  }
}

std::vector<LabeledWindow> make_separable_dataset(std::size_t count, int seq_len, std::uint64_t seed,
                                                  double threshold) {
  Rng rng(seed);
  std::vector<LabeledWindow> data(count);
  for (auto& w : data) {
    std::vector<double> times(static_cast<std::size_t>(seq_len));
    for (double& t : times) t = rng.uniform();
    std::sort(times.begin(), times.end());
    w.sequence.resize(static_cast<std::size_t>(seq_len));
    for (std::size_t i = 0; i < w.sequence.size(); ++i) {
      w.sequence[i] = {times[i], rng.uniform(), rng.uniform(), rng.uniform()};
    }
    w.label = w.sequence.back().accuracy > threshold ? 1 : 0;
  }
  return data;
}

}  // namespace edgecloud::predictor
