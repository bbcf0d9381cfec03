#include "edgecloud/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "edgecloud/error.hpp"

namespace edgecloud::complexity {

namespace {

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

Grid coarse_grain(const Grid& fine, int block) {
  const auto g = static_cast<std::size_t>(block);
  Grid coarse;
  coarse.side = fine.side / g;
  coarse.values.assign(coarse.side * coarse.side, 0.0);
  const double inv = 1.0 / static_cast<double>(g * g);
  for (std::size_t a = 0; a < coarse.side; ++a) {
    for (std::size_t e = 0; e < coarse.side; ++e) {
      const double first = fine.at(a * g, e * g);
      double sum = 0.0;
      bool uniform = true;
      for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
          const double v = fine.at(a * g + i, e * g + j);
          sum += v;
          uniform = uniform && v == first;
        }
      }
      // A constant block keeps its value exactly so flat regions score 0.
      coarse.values[a * coarse.side + e] = uniform ? first : sum * inv;
    }
  }
  return coarse;
}

// (1/L0^2) * sum over original positions of (up(n) - up(n+1))^2. Because
// level n+1 is the block mean of level n this equals O(n,n) - O(n+1,n+1), and
// with O(n+1,n) = O(n+1,n+1) it gives 2 * C_n without cancellation.
double within_block_energy(const Grid& fine, const Grid& coarse, int block, std::size_t footprint,
                           std::size_t original_side) {
  const auto g = static_cast<std::size_t>(block);
  double sum = 0.0;
  for (std::size_t r = 0; r < fine.side; ++r) {
    for (std::size_t c = 0; c < fine.side; ++c) {
      const double d = fine.at(r, c) - coarse.at(r / g, c / g);
      sum += d * d;
    }
  }
  const double l0 = static_cast<double>(original_side);
  return sum * static_cast<double>(footprint) / (l0 * l0);
}

}  // namespace

Frame::Frame(std::size_t side, std::vector<double> pixels) {
  if (side < 2 || pixels.size() != side * side) {
    throw DimensionError("frame must be a square grid with side >= 2, got side " +
                         std::to_string(side) + " and " + std::to_string(pixels.size()) + " pixels");
  }
  for (double v : pixels) {
    if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
      throw RangeError("pixel value outside [-1, 1]: " + std::to_string(v));
    }
  }
  grid_.side = side;
  grid_.values = std::move(pixels);
}

Frame Frame::from_grayscale(std::span<const std::uint8_t> bytes, std::size_t width,
                            std::size_t height, int block, std::optional<int> depth) {
  if (bytes.size() != width * height) {
    throw DimensionError("byte buffer does not match " + std::to_string(width) + "x" +
                         std::to_string(height));
  }
  if (block < 2) throw DimensionError("block size must be >= 2");
  const std::size_t limit = std::min(width, height);
  std::size_t side = 0;
  if (depth) {
    if (*depth < 1) throw DimensionError("depth must be >= 1");
    const std::size_t unit = ipow(static_cast<std::size_t>(block), *depth);
    side = (limit / unit) * unit;
  } else {
    side = 1;
    while (side * static_cast<std::size_t>(block) <= limit) side *= static_cast<std::size_t>(block);
  }
  if (side < 2) throw DimensionError("frame too small to crop to a coarse-grainable square");

  const std::size_t top = (height - side) / 2;
  const std::size_t left = (width - side) / 2;
  std::vector<double> pixels(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      pixels[r * side + c] = static_cast<double>(bytes[(top + r) * width + left + c]) / 127.5 - 1.0;
    }
  }
  return Frame(side, std::move(pixels));
}

int full_depth(std::size_t side, int block) {
  if (block < 2 || side < 2) return 0;
  int depth = 0;
  while (side > 1) {
    if (side % static_cast<std::size_t>(block) != 0) return 0;
    side /= static_cast<std::size_t>(block);
    ++depth;
  }
  return depth;
}

ScalePyramid build_pyramid(const Frame& frame, int block, int depth) {
  if (block < 2) throw DimensionError("block size must be >= 2");
  if (depth < 1) throw DimensionError("depth must be >= 1");
  const std::size_t unit = ipow(static_cast<std::size_t>(block), depth);
  if (frame.side() % unit != 0) {
    throw DimensionError("frame side " + std::to_string(frame.side()) + " is not divisible by " +
                         std::to_string(block) + "^" + std::to_string(depth));
  }
  ScalePyramid pyramid;
  pyramid.block_size = block;
  pyramid.depth = depth;
  pyramid.levels.reserve(static_cast<std::size_t>(depth) + 1);
  pyramid.levels.push_back(frame.grid());
  for (int n = 1; n <= depth; ++n) pyramid.levels.push_back(coarse_grain(pyramid.levels.back(), block));
  return pyramid;
}

double overlap(const ScalePyramid& pyramid, int m, int n) {
  if (m < 0 || n < 0 || m > pyramid.depth || n > pyramid.depth) {
    throw IndexError("overlap level out of range [0, " + std::to_string(pyramid.depth) + "]");
  }
  const int fine_level = std::min(m, n);
  const int coarse_level = std::max(m, n);
  const Grid& fine = pyramid.levels[static_cast<std::size_t>(fine_level)];
  const Grid& coarse = pyramid.levels[static_cast<std::size_t>(coarse_level)];
  const std::size_t ratio = fine.side / coarse.side;  // G^(coarse - fine)
  const auto g = static_cast<std::size_t>(pyramid.block_size);

  // Each fine pixel covers G^fine x G^fine original positions, over which
  // both replicated levels are constant.
  const double footprint = static_cast<double>(ipow(g, 2 * fine_level));
  double sum = 0.0;
  for (std::size_t a = 0; a < coarse.side; ++a) {
    for (std::size_t e = 0; e < coarse.side; ++e) {
      double inner = 0.0;
      for (std::size_t i = 0; i < ratio; ++i) {
        for (std::size_t j = 0; j < ratio; ++j) inner += fine.at(a * ratio + i, e * ratio + j);
      }
      sum += coarse.at(a, e) * inner;
    }
  }
  const double l0 = static_cast<double>(pyramid.original_side());
  return sum * footprint / (l0 * l0);
}

ComplexityReport spatial_complexity(const Frame& frame, int block, int depth) {
  const ScalePyramid pyramid = build_pyramid(frame, block, depth);
  ComplexityReport report;
  report.depth = depth;
  const auto dim = static_cast<std::size_t>(depth + 1);
  report.overlaps.assign(dim * dim, std::numeric_limits<double>::quiet_NaN());
  auto set = [&](int m, int n, double v) {
    report.overlaps[static_cast<std::size_t>(m) * dim + static_cast<std::size_t>(n)] = v;
  };
  for (int n = 0; n <= depth; ++n) set(n, n, overlap(pyramid, n, n));
  for (int n = 0; n < depth; ++n) set(n + 1, n, overlap(pyramid, n + 1, n));

  report.per_scale.reserve(static_cast<std::size_t>(depth));
  const auto g = static_cast<std::size_t>(block);
  for (int n = 0; n < depth; ++n) {
    const auto& fine = pyramid.levels[static_cast<std::size_t>(n)];
    const auto& coarse = pyramid.levels[static_cast<std::size_t>(n) + 1];
    const double c = 0.5 * within_block_energy(fine, coarse, block, ipow(g, 2 * n), pyramid.original_side());
    report.per_scale.push_back(c);
    report.total += c;
  }
  return report;
}

ComplexityReport spatial_complexity(const Frame& frame) {
  const int depth = full_depth(frame.side(), 2);
  if (depth < 1) {
    throw DimensionError("frame side " + std::to_string(frame.side()) +
                         " is not a power of 2; pass block and depth explicitly");
  }
  return spatial_complexity(frame, 2, depth);
}

MinMaxScaler MinMaxScaler::fit(std::span<const double> values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

double MinMaxScaler::apply(double value) const {
  if (!(hi_ > lo_)) return 0.0;
  return std::clamp((value - lo_) / (hi_ - lo_), 0.0, 1.0);
}

}  // namespace edgecloud::complexity
