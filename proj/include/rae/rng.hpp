#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rae {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, const std::string& tag) {
  std::uint64_t h = seed;
  for (unsigned char c : tag) h = splitmix64(h ^ c);
  return splitmix64(h);
}
}  // namespace detail

/// Named, seeded pseudo-random stream. Platform, planner and generator
/// streams derive independent sub-seeds from (seed, name), so the same
/// top-level seed reproduces the same draws on every stream regardless
/// of how the other streams are consumed.
///
/// Uniform doubles are built from raw 64-bit draws instead of
/// std::uniform_real_distribution, whose output is implementation
/// defined; this keeps traces stable across standard libraries.
class RngStream {
 public:
  RngStream() : engine_(0) {}
  RngStream(std::uint64_t seed, const std::string& name)
      : engine_(detail::mix_seed(seed, name)) {}

  explicit RngStream(std::uint64_t raw_seed) : engine_(raw_seed) {}

  /// Uniform in [0,1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::runtime_error("RngStream: empty range");
    // Rejection sampling keeps the draw unbiased.
    std::uint64_t bound = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= bound);
    return static_cast<std::size_t>(x % n);
  }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform_index(static_cast<std::size_t>(hi - lo + 1)));
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Index drawn from an explicit discrete distribution (weights need not
  /// be normalized).
  std::size_t discrete(const std::vector<double>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    if (total <= 0) throw std::runtime_error("RngStream: non-positive weight total");
    double x = uniform01() * total;
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (x < acc) return i;
    }
    return weights.size() - 1;
  }

  /// Child stream with an independent state, derived deterministically.
  RngStream fork(const std::string& tag) {
    return RngStream(detail::mix_seed(engine_(), tag));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rae
