#include "edgecloud/lstm.hpp"

#include <cmath>
#include <string>

#include "edgecloud/error.hpp"

namespace edgecloud::predictor {

LstmLayerParams LstmLayerParams::zeros(Eigen::Index hidden, Eigen::Index input) {
  const Eigen::Index cols = hidden + input;
  LstmLayerParams p;
  p.forget_w = p.input_w = p.candidate_w = p.output_w = Matrix::Zero(hidden, cols);
  p.forget_b = p.input_b = p.candidate_b = p.output_b = Vector::Zero(hidden);
  return p;
}

void LstmLayerParams::validate() const {
  const Eigen::Index h = forget_b.size();
  const Eigen::Index cols = forget_w.cols();
  if (h == 0 || cols <= h) throw ShapeError("LSTM layer needs hidden >= 1 and input >= 1");
  for (const Matrix* w : {&forget_w, &input_w, &candidate_w, &output_w}) {
    if (w->rows() != h || w->cols() != cols) throw ShapeError("LSTM gate weight shape mismatch");
    if (!w->allFinite()) throw DomainError("non-finite LSTM weight");
  }
  for (const Vector* b : {&forget_b, &input_b, &candidate_b, &output_b}) {
    if (b->size() != h) throw ShapeError("LSTM gate bias shape mismatch");
    if (!b->allFinite()) throw DomainError("non-finite LSTM bias");
  }
}

double sigmoid(double z) {
  // Branching keeps exp() from overflowing for large |z|.
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

void check_shapes(const LstmLayerParams& params, const LstmState& state, const Vector& x) {
  const Eigen::Index h = params.hidden_size();
  if (state.h.size() != h || state.cell.size() != h) {
    throw ShapeError("LSTM state size " + std::to_string(state.h.size()) + " != hidden " +
                     std::to_string(h));
  }
  if (x.size() != params.input_size()) {
    throw ShapeError("LSTM input size " + std::to_string(x.size()) + " != " +
                     std::to_string(params.input_size()));
  }
}

void gate(const Matrix& w, const Vector& b, const Vector& concat, Vector& out) {
  out.noalias() = w * concat;
  out += b;
}

void sigmoid_in_place(Vector& z) {
  for (double& v : z) v = edgecloud::predictor::sigmoid(v);
}

}  // namespace

LstmState lstm_step(const LstmLayerParams& params, const LstmState& state, const Vector& x,
                    LstmStepCache& cache) {
  check_shapes(params, state, x);
  const Eigen::Index h = params.hidden_size();
  cache.concat.resize(h + x.size());
  cache.concat << state.h, x;
  cache.cell_prev = state.cell;
  gate(params.forget_w, params.forget_b, cache.concat, cache.forget);
  sigmoid_in_place(cache.forget);
  gate(params.input_w, params.input_b, cache.concat, cache.input);
  sigmoid_in_place(cache.input);
  gate(params.candidate_w, params.candidate_b, cache.concat, cache.candidate);
  cache.candidate = cache.candidate.array().tanh().matrix();
  gate(params.output_w, params.output_b, cache.concat, cache.output);
  sigmoid_in_place(cache.output);
  cache.cell = cache.forget.cwiseProduct(state.cell) + cache.input.cwiseProduct(cache.candidate);
  cache.cell_tanh = cache.cell.array().tanh().matrix();
  return {cache.output.cwiseProduct(cache.cell_tanh), cache.cell};
}

LstmState lstm_step(const LstmLayerParams& params, const LstmState& state, const Vector& x) {
  LstmStepCache cache;
  return lstm_step(params, state, x, cache);
}

}  // namespace edgecloud::predictor
