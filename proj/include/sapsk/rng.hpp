#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

// Counter-based pseudorandom generation (Philox4x32-10) with disjoint,
// addressable substreams, plus exact uniform and Gaussian sampling.
//
// Reproducibility contract: the k-th 128-bit block of a stream is a pure
// function of (key, counter), so trial t of curve point p under seed s reads
// exactly the blocks {s; t, block, p} regardless of evaluation order or
// thread count.  Gaussian samples use the Box-Muller transform (exact, no
// central-limit approximation) because error floors near 1e-5 are sensitive
// to tail accuracy.

namespace sapsk {

// Philox4x32-10: ten rounds of two 32x32->64 multiplies with a Weyl key
// schedule.  Constants are the published reference values; known-answer
// vectors are pinned in tests/test_rng.cpp.
struct Philox4x32 {
  static constexpr uint32_t kMul0 = 0xD2511F53u;
  static constexpr uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr uint32_t kWeyl1 = 0xBB67AE85u;

  static std::array<uint32_t, 4> block(uint32_t key0, uint32_t key1,
                                       std::array<uint32_t, 4> x) {
    for (int round = 0; round < 10; ++round) {
      const uint64_t p0 = uint64_t(kMul0) * x[0];
      const uint64_t p1 = uint64_t(kMul1) * x[2];
      x = {uint32_t(p1 >> 32) ^ x[1] ^ key0, uint32_t(p1),
           uint32_t(p0 >> 32) ^ x[3] ^ key1, uint32_t(p0)};
      key0 += kWeyl0;
      key1 += kWeyl1;
    }
    return x;
  }
};

// One logical stream per (seed, point_index, trial_index) triple.  The 128-bit
// counter is laid out as {trial_lo, trial_hi, block, point}: 2^32 blocks per
// trial, 2^64 trials per point, 2^32 points per seed.  Each next_*_pair()
// call consumes one block.
class TrialRng {
 public:
  TrialRng(uint64_t seed, uint32_t point_index, uint64_t trial_index)
      : key0_(uint32_t(seed)),
        key1_(uint32_t(seed >> 32)),
        trial_lo_(uint32_t(trial_index)),
        trial_hi_(uint32_t(trial_index >> 32)),
        point_(point_index),
        block_(0) {}

  // Two independent uniforms in [0, 1), each with 53 random bits.
  std::pair<double, double> next_uniform_pair() {
    const std::array<uint32_t, 4> x = next_block();
    return {uniform53(x[0], x[1]), uniform53(x[2], x[3])};
  }

  double next_uniform() { return next_uniform_pair().first; }

  // Two independent standard normal samples (Box-Muller).  The radial
  // uniform is mapped to (0, 1] so log() never sees zero.
  std::pair<double, double> next_gaussian_pair() {
    const auto [u1, u2] = next_uniform_pair();
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double angle = 2.0 * kPi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  // 53-bit uniform: high 27 bits of `a`, high 26 bits of `b`.
  static double uniform53(uint32_t a, uint32_t b) {
    const uint64_t mantissa = (uint64_t(a >> 5) << 26) | uint64_t(b >> 6);
    return double(mantissa) * 0x1.0p-53;
  }

  std::array<uint32_t, 4> next_block() {
    const std::array<uint32_t, 4> counter = {trial_lo_, trial_hi_, block_,
                                             point_};
    ++block_;
    return Philox4x32::block(key0_, key1_, counter);
  }

  uint32_t key0_, key1_;
  uint32_t trial_lo_, trial_hi_;
  uint32_t point_;
  uint32_t block_;
};

}  // namespace sapsk
