#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "fdrpower/specfun.hpp"

namespace fdrpower {

// Philox4x32-10 counter-based generator. A stream is keyed by
// (seed, stream_id) so every simulation replicate owns an independent
// stream whose output is a pure function of its counter; parallel
// scheduling cannot change any draw.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id) {
    // hash (seed, stream) into the Philox key so related seeds and stream
    // ids never share or permute streams
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t k = splitmix64(a ^ (0x9E3779B97F4A7C15ULL * (stream_id + 1)));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  std::uint32_t next_u32() {
    if (idx_ == 4) {
      block_ = philox(counter_, key_);
      ++counter_[0];
      if (counter_[0] == 0) ++counter_[1];
      idx_ = 0;
    }
    return block_[idx_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // uniform on (0, 1): 53-bit mantissa, offset so 0 is excluded
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 1.1102230246251565e-16;
  }

  // standard normal via the inverse CDF (reproducible across platforms)
  double normal() { return norm_quantile(uniform()); }

  // Marsaglia-Tsang gamma(shape >= 1, scale 1)
  double gamma(double shape) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double chi_square(double df) { return 2.0 * gamma(0.5 * df); }

 private:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  static Block philox(Block ctr, const Key& key) {
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = 0xD2511F53ULL * ctr[0];
      const std::uint64_t p1 = 0xCD9E8D57ULL * ctr[2];
      const Block next = {
          static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k0,
          static_cast<std::uint32_t>(p1),
          static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k1,
          static_cast<std::uint32_t>(p0)};
      ctr = next;
      k0 += 0x9E3779B9U;
      k1 += 0xBB67AE85U;
    }
    return ctr;
  }

  Key key_;
  Block counter_{0, 0, 0, 0};
  Block block_{};
  int idx_ = 4;
};

}  // namespace fdrpower
