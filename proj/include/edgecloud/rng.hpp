#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace edgecloud {

/// SplitMix64 finalizer; used to derive independent sub-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the named sub-stream `name` under `root`. All randomness in a run
/// flows from one root seed through these streams ("workload", "bandwidth",
/// "predictor-init", "bandit", ...), so components vary independently.
constexpr std::uint64_t stream_seed(std::uint64_t root, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(root ^ mix64(h));
}

/// Deterministic generator with platform-independent real-valued draws.
/// std::uniform_real_distribution is implementation-defined, so draws are
/// built directly from the 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t root, std::string_view stream) : engine_(stream_seed(root, stream)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi]; returns lo when the range is degenerate.
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Uses rejection to stay unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace edgecloud
