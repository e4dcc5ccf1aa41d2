#pragma once

#include <cmath>
#include <cstdint>

namespace fjlat {

// Counter-based stream: output j of stream (seed, id) is mix64(base + j*gamma),
// so streams are independent and adding a stream never perturbs another one.
// mix64 is the splitmix64 finalizer.
class RandomStream {
 public:
  RandomStream() : RandomStream(0, 0) {}
  RandomStream(std::uint64_t seed, std::uint64_t stream_id)
      : state_(mix64(seed + 0x9E3779B97F4A7C15ull * (stream_id + 1)) ^
               mix64(stream_id + 0x853C49E6748FEA9Bull)) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Inverse-CDF sample; -log1p(-u) maps [0,1) to (0, inf] safely.
  double next_exponential(double rate) {
    return -std::log1p(-next_uniform()) / rate;
  }

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t state_;
};

}  // namespace fjlat
