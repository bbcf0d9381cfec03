#pragma once

// Independent straight-line reference implementations used only by tests.
// They deliberately avoid the library's code paths.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

/// Spatial complexity computed by brute force: every level is rebuilt
/// directly from the original pixels (mean over G^n x G^n blocks), replicated
/// to full resolution, and overlaps are summed over all L0^2 positions.
struct BruteForceComplexity {
  std::vector<std::vector<double>> upsampled;  // [level][L0*L0]
  std::size_t side;

  BruteForceComplexity(const std::vector<double>& pixels, std::size_t side_, int block, int depth)
      : side(side_) {
    std::size_t bs = 1;
    for (int n = 0; n <= depth; ++n) {
      std::vector<double> up(side * side);
      for (std::size_t r0 = 0; r0 < side; r0 += bs) {
        for (std::size_t c0 = 0; c0 < side; c0 += bs) {
          double s = 0;
          for (std::size_t r = r0; r < r0 + bs; ++r)
            for (std::size_t c = c0; c < c0 + bs; ++c) s += pixels[r * side + c];
          const double mean = s / static_cast<double>(bs * bs);
          for (std::size_t r = r0; r < r0 + bs; ++r)
            for (std::size_t c = c0; c < c0 + bs; ++c) up[r * side + c] = mean;
        }
      }
      upsampled.push_back(std::move(up));
      bs *= static_cast<std::size_t>(block);
    }
  }

  double overlap(int m, int n) const {
    double s = 0;
    for (std::size_t i = 0; i < side * side; ++i) s += upsampled[m][i] * upsampled[n][i];
    return s / static_cast<double>(side * side);
  }

  double total() const {
    double c = 0;
    const int depth = static_cast<int>(upsampled.size()) - 1;
    for (int n = 0; n < depth; ++n) c += std::abs(overlap(n + 1, n) - 0.5 * (overlap(n, n) + overlap(n + 1, n + 1)));
    return c;
  }
};

inline double sigm(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// One LSTM step with explicit index loops. Weights are row-major
/// hidden x (hidden + input) arrays.
struct ScalarLstm {
  std::size_t hidden, input;
  std::vector<double> wf, wv, wq, wo, bf, bv, bq, bo;

  void step(std::vector<double>& h, std::vector<double>& q, const std::vector<double>& x) const {
    const std::size_t cols = hidden + input;
    std::vector<double> z(cols);
    for (std::size_t i = 0; i < hidden; ++i) z[i] = h[i];
    for (std::size_t i = 0; i < input; ++i) z[hidden + i] = x[i];
    std::vector<double> hn(hidden), qn(hidden);
    for (std::size_t r = 0; r < hidden; ++r) {
      double af = bf[r], av = bv[r], aq = bq[r], ao = bo[r];
      for (std::size_t c = 0; c < cols; ++c) {
        af += wf[r * cols + c] * z[c];
        av += wv[r * cols + c] * z[c];
        aq += wq[r * cols + c] * z[c];
        ao += wo[r * cols + c] * z[c];
      }
      const double f = sigm(af), v = sigm(av), qt = std::tanh(aq), o = sigm(ao);
      qn[r] = f * q[r] + v * qt;
      hn[r] = o * std::tanh(qn[r]);
    }
    h = hn;
    q = qn;
  }
};

}  // namespace oracle
