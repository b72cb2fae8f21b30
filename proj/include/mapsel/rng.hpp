#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace mapsel {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).  Output is
// a pure function of (key, counter), so every draw is addressable by
// position: chains, replications and worker threads can share one seed and
// still produce bit-identical streams regardless of scheduling.
namespace philox {

inline constexpr std::uint32_t kMult0 = 0xD2511F53u;
inline constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const std::uint64_t prod0 = std::uint64_t(kMult0) * ctr[0];
    const std::uint64_t prod1 = std::uint64_t(kMult1) * ctr[2];
    ctr = {std::uint32_t(prod1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(prod1),
           std::uint32_t(prod0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(prod0)};
  }
  return ctr;
}

}  // namespace philox

// Purpose tags keep independent uses of one seed on disjoint streams.
enum class RngStream : std::uint64_t {
  noise = 1,
  design = 2,
  gibbs = 3,
  gibbs_init = 4,
  search = 5,
};

inline std::uint64_t stream_id(RngStream purpose, std::uint64_t id = 0) {
  return (static_cast<std::uint64_t>(purpose) << 56) |
         (id & 0x00FF'FFFF'FFFF'FFFFull);
}

// One logical stream of a keyed Philox instance.  The 128-bit counter is
// (index, stream); each block yields one uniform, which keeps the
// position arithmetic trivial at a negligible throughput cost.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream) {}

  std::uint64_t raw_at(std::uint64_t index) const {
    const auto out = philox::block(
        {std::uint32_t(index), std::uint32_t(index >> 32),
         std::uint32_t(stream_), std::uint32_t(stream_ >> 32)},
        key_);
    return (std::uint64_t(out[0]) << 32) | out[1];
  }

  // uniform on (0,1): 53-bit mantissa, offset half an ulp off the endpoints
  double uniform_at(std::uint64_t index) const {
    return (double(raw_at(index) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller pair from the uniforms at positions (2i, 2i+1)
  std::pair<double, double> normal_pair_at(std::uint64_t pair_index) const {
    const double u1 = uniform_at(2 * pair_index);
    const double u2 = uniform_at(2 * pair_index + 1);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  double normal_at(std::uint64_t index) const {
    const auto pair = normal_pair_at(index / 2);
    return index % 2 == 0 ? pair.first : pair.second;
  }

  std::uint64_t stream() const { return stream_; }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
};

// Cursor-style adapter for call sites that just want "the next draw".
class SequentialRng {
 public:
  explicit SequentialRng(CounterRng rng) : rng_(rng) {}

  double uniform() { return rng_.uniform_at(pos_++); }

  double normal() {
    // consume positions pairwise so the cursor stays aligned with uniform()
    const auto pair = rng_.normal_pair_at(pos_ / 2);
    const double value = pos_ % 2 == 0 ? pair.first : pair.second;
    ++pos_;
    return value;
  }

  // integer in [0, bound); the 2^-53 scaling bias is irrelevant here
  std::uint64_t below(std::uint64_t bound) {
    const auto v = std::uint64_t(uniform() * double(bound));
    return v < bound ? v : bound - 1;
  }

  std::uint64_t position() const { return pos_; }

 private:
  CounterRng rng_;
  std::uint64_t pos_ = 0;
};

}  // namespace mapsel
