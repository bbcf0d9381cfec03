#pragma once

#include <Eigen/Dense>

namespace edgecloud::predictor {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Gate weights of one LSTM layer. Every weight matrix is
/// hidden x (hidden + input) and multiplies the concatenation [h_prev, x].
struct LstmLayerParams {
  Matrix forget_w, input_w, candidate_w, output_w;
  Vector forget_b, input_b, candidate_b, output_b;

  static LstmLayerParams zeros(Eigen::Index hidden, Eigen::Index input);

  Eigen::Index hidden_size() const { return forget_b.size(); }
  Eigen::Index input_size() const { return forget_w.cols() - forget_w.rows(); }

  /// Throws ShapeError on inconsistent shapes, DomainError on non-finite values.
  void validate() const;
};

struct LstmState {
  Vector h;     // output state
  Vector cell;  // cell state

  static LstmState zeros(Eigen::Index hidden) { return {Vector::Zero(hidden), Vector::Zero(hidden)}; }
};

/// Intermediate values of one step, kept for backpropagation through time.
struct LstmStepCache {
  Vector concat;  // [h_prev, x]
  Vector cell_prev;
  Vector forget, input, candidate, output;
  Vector cell, cell_tanh;
};

double sigmoid(double z);

/// One time step: gates from [h, x], cell update f*Q + v*Q~, h' = o * tanh(Q').
/// Throws ShapeError on mismatched dimensions.
LstmState lstm_step(const LstmLayerParams& params, const LstmState& state, const Vector& x);

/// Same as lstm_step, recording the intermediates into `cache`.
LstmState lstm_step(const LstmLayerParams& params, const LstmState& state, const Vector& x,
                    LstmStepCache& cache);

}  // namespace edgecloud::predictor
