#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "kawalab/errors.hpp"

namespace kawalab {

// Counter-based generator (Philox 4x32, 10 rounds).  Streams are keyed by a
// 64-bit seed; the block counter advances deterministically, so replicas with
// distinct seeds have independent, platform-independent streams.
class Philox4x32 {
 public:
  static constexpr const char* kName = "philox4x32-10";

  explicit Philox4x32(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    key_[0] = static_cast<std::uint32_t>(seed);
    key_[1] = static_cast<std::uint32_t>(seed >> 32);
    counter_ = {0, 0, 0, 0};
    buf_pos_ = 4;
  }

  std::uint32_t next_u32() {
    if (buf_pos_ >= 4) {
      buf_ = block(counter_, key_);
      advance_counter();
      buf_pos_ = 0;
    }
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // One block of output for a given counter/key; used by the known-answer test.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += 0x9E3779B9u;
      key[1] += 0xBB67AE85u;
    }
    return ctr;
  }

 private:
  static std::array<std::uint32_t, 4> single_round(
      const std::array<std::uint32_t, 4>& ctr,
      const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = 0xD2511F53ull * ctr[0];
    const std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
    std::array<std::uint32_t, 4> out;
    out[0] = static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0];
    out[1] = static_cast<std::uint32_t>(p1);
    out[2] = static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1];
    out[3] = static_cast<std::uint32_t>(p0);
    return out;
  }

  void advance_counter() {
    for (int i = 0; i < 4; ++i) {
      if (++counter_[i] != 0) break;
    }
  }

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
};

using Rng = Philox4x32;

// SplitMix64 finalizer; bijective, so distinct inputs give distinct seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed for replica r derived from the ensemble base seed.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(base_seed + index * 0x9E3779B97F4A7C15ull);
}

inline double sample_uniform_open(Rng& rng) {
  // (0, 1): rejects exact zeros so logs stay finite.
  double u;
  do {
    u = rng.next_double();
  } while (u <= 0.0);
  return u;
}

inline double sample_exponential(Rng& rng, double rate) {
  require(rate > 0.0, "sample_exponential: rate must be positive");
  return -std::log(sample_uniform_open(rng)) / rate;
}

// Box-Muller; one value per call keeps the stream layout obvious.
inline double sample_normal(Rng& rng) {
  const double u1 = sample_uniform_open(rng);
  const double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Poisson count via unit-rate arrival times; exact for any mean that fits a
// desk-scale run.
inline std::uint64_t sample_poisson(Rng& rng, double mean) {
  require(mean >= 0.0, "sample_poisson: mean must be nonnegative");
  require(mean < 1.0e7, "sample_poisson: mean exceeds desk-scale guard");
  std::uint64_t n = 0;
  double acc = sample_exponential(rng, 1.0);
  while (acc <= mean) {
    ++n;
    acc += sample_exponential(rng, 1.0);
  }
  return n;
}

}  // namespace kawalab
