#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace edgecloud::complexity {

/// Square grid of real values stored row-major.
struct Grid {
  std::size_t side = 0;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const { return values[row * side + col]; }
};

/// A square grayscale frame with pixel values in [-1, 1].
class Frame {
 public:
  /// Throws DimensionError unless `pixels.size() == side * side` and side >= 2,
  /// RangeError if any pixel lies outside [-1, 1] or is not finite.
  Frame(std::size_t side, std::vector<double> pixels);

  /// Maps 8-bit grayscale to [-1, 1] via v / 127.5 - 1 and center-crops to the
  /// largest square whose side is a multiple of block^depth. Without `depth`
  /// the crop is to the largest power of `block` that fits.
  static Frame from_grayscale(std::span<const std::uint8_t> bytes, std::size_t width,
                              std::size_t height, int block = 2,
                              std::optional<int> depth = std::nullopt);

  std::size_t side() const { return grid_.side; }
  const Grid& grid() const { return grid_; }
  double at(std::size_t row, std::size_t col) const { return grid_.at(row, col); }

 private:
  Grid grid_;
};

/// Levels of repeated G x G block-mean coarse-graining. levels[0] is the frame.
struct ScalePyramid {
  std::vector<Grid> levels;
  int block_size = 2;
  int depth = 0;

  std::size_t original_side() const { return levels.front().side; }
};

struct ComplexityReport {
  std::vector<double> per_scale;  // C_n for n in [0, depth)
  double total = 0.0;
  /// (depth+1) x (depth+1) row-major overlap matrix; only the entries the
  /// complexity sum needs are computed, the others are NaN.
  std::vector<double> overlaps;
  int depth = 0;

  double overlap(int m, int n) const { return overlaps[static_cast<std::size_t>(m * (depth + 1) + n)]; }
};

/// Number of coarse-graining steps that reduce `side` to one pixel, or 0 if
/// `side` is not a power of `block`.
int full_depth(std::size_t side, int block);

/// Throws DimensionError unless side is divisible by block^depth, block >= 2
/// and depth >= 1.
ScalePyramid build_pyramid(const Frame& frame, int block, int depth);

/// Normalized inner product of levels m and n, both replicated back to the
/// original resolution. Throws IndexError for levels outside [0, depth].
double overlap(const ScalePyramid& pyramid, int m, int n);

/// Multiscale structural complexity: sum over scales of
/// |O(n+1,n) - (O(n,n) + O(n+1,n+1)) / 2|.
ComplexityReport spatial_complexity(const Frame& frame, int block, int depth);

/// Defaults: block 2, depth so the pyramid ends at a single pixel.
ComplexityReport spatial_complexity(const Frame& frame);

/// Min-max scaling of raw complexities to [0, 1], fitted once per run.
class MinMaxScaler {
 public:
  MinMaxScaler() = default;
  MinMaxScaler(double lo, double hi) : lo_(lo), hi_(hi) {}

  static MinMaxScaler fit(std::span<const double> values);

  /// Constant inputs (hi == lo) map to 0. Values outside the fitted range clamp.
  double apply(double value) const;

  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
};

}  // namespace edgecloud::complexity
