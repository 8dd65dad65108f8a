#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include <kimura/types.hpp>

namespace kimura {

/// splitmix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key of the stream for (seed, path).
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t path) {
  return mix64(mix64(seed ^ 0x6a09e667f3bcc909ULL) + 0x9e3779b97f4a7c15ULL * (path + 1));
}

/// Counter-based uniform bit generator for one (stream, step) pair. Draws depend
/// only on (key, step, draw index), never on the order in which paths run.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  CounterEngine(std::uint64_t key, std::uint64_t step) : base_(mix64(key ^ mix64(step + 0x243f6a8885a308d3ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(base_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

/// Fills dW with i.i.d. N(0, dt) draws for the given stream and step.
inline void brownian_increment(std::uint64_t key, std::uint64_t step, double sqrt_dt, Vector& dW) {
  CounterEngine engine(key, step);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < dW.size(); ++i) {
    dW(i) = sqrt_dt * normal(engine);
  }
}

}  // namespace kimura
