#pragma once

#include <cmath>
#include <cstdint>

namespace qsi {

/// Counter-based pseudorandom stream.
///
/// Output i of stream (seed, stream_id) is mix64(key + i * gamma) with the
/// key derived from (seed, stream_id) -- the splitmix64 finalizer run in
/// counter mode. A stream's values depend only on (seed, stream_id, i),
/// never on what other streams did, so frame-parallel simulation gives the
/// same results for any worker count and execution order.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream)
      : key_(derive_key(seed, stream)) {}

  std::uint64_t next_u64() {
    return mix64(key_ + kGamma * ++counter_);
  }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_unit() < p; }

  /// floor(u * n): uniform index in [0, n). n must be >= 1.
  std::uint32_t uniform_index(std::uint32_t n) {
    const auto idx = static_cast<std::uint32_t>(next_unit() * n);
    return idx < n ? idx : n - 1;  // guards the one-ulp rounding edge at u ~ 1
  }

  /// Poisson sample by Knuth's product-of-uniforms method; fine for the
  /// mean-of-order-one pulses this simulator uses.
  int poisson(double mean) {
    const double limit = std::exp(-mean);
    int count = -1;
    double prod = 1.0;
    do {
      ++count;
      prod *= next_unit();
    } while (prod > limit);
    return count;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed + kGamma) ^ mix64(stream + 0xD1B54A32D192ED03ull));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace qsi
