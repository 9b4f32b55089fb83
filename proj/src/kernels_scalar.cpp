#include <cmath>

#include "sapsk/kernels.hpp"

// Scalar reference argmin kernels.  The arithmetic here is the definition
// the AVX2 variants must reproduce exactly: same operation order per symbol,
// no fused multiply-add, wrap via nearbyint (ties-to-even).  Keep the three
// metric expressions in sync with kernels_avx2.cpp.

namespace sapsk::kernels {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559005768;
constexpr double kInvTwoPi = 1.0 / kTwoPi;

inline double wrap(double x) {
  return x - kTwoPi * std::nearbyint(x * kInvTwoPi);
}

uint32_t eucd_scalar(const double* in_phase, const double* quadrature,
                     size_t count, double ri, double rq) {
  double best = HUGE_VAL;
  uint32_t best_index = 0;
  for (size_t i = 0; i < count; ++i) {
    const double di = ri - in_phase[i];
    const double dq = rq - quadrature[i];
    const double metric = di * di + dq * dq;
    if (metric < best) {
      best = metric;
      best_index = uint32_t(i);
    }
  }
  return best_index;
}

uint32_t gapd_scalar(const double* amplitude, const double* phase,
                     const double* inv_weight, const double* log_weight,
                     size_t count, double ra, double rp,
                     double inv_half_sn2) {
  double best = HUGE_VAL;
  uint32_t best_index = 0;
  for (size_t i = 0; i < count; ++i) {
    const double da = ra - amplitude[i];
    const double dp = wrap(rp - phase[i]);
    const double metric =
        da * da * inv_half_sn2 + dp * dp * inv_weight[i] + log_weight[i];
    if (metric < best) {
      best = metric;
      best_index = uint32_t(i);
    }
  }
  return best_index;
}

uint32_t gpdd_scalar(const double* amplitude, const double* phase,
                     size_t count, double ra, double rp, double two_inv_sn2,
                     double inv_weight_r) {
  double best = HUGE_VAL;
  uint32_t best_index = 0;
  for (size_t i = 0; i < count; ++i) {
    const double da = ra - amplitude[i];
    const double dp = wrap(rp - phase[i]);
    const double metric = da * da * two_inv_sn2 + dp * dp * inv_weight_r;
    if (metric < best) {
      best = metric;
      best_index = uint32_t(i);
    }
  }
  return best_index;
}

}  // namespace

const KernelSet& scalar() {
  static const KernelSet set = {"scalar", eucd_scalar, gapd_scalar,
                                gpdd_scalar};
  return set;
}

}  // namespace sapsk::kernels
