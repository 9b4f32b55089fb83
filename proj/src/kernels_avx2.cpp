// AVX2 argmin kernels, decision-equivalent to the scalar reference set.
//
// Equivalence rests on three properties, all asserted by tests:
//   1. identical per-symbol arithmetic: the same subtract/multiply/add order
//      as kernels_scalar.cpp, no FMA (this file is compiled with -mavx2 only,
//      and the project disables floating-point contraction), and
//      _mm256_round_pd's ties-to-even matching std::nearbyint;
//   2. lane-local strict `<` keeps the earliest index within a lane;
//   3. the horizontal reduce walks lanes with an explicit lowest-index tie
//      rule, and the scalar tail only replaces on strict improvement — so
//      the global winner is the lowest index among metric minimizers, the
//      scalar rule.
//
// This file is only part of the build on x86-64 targets (see CMakeLists).

#include <immintrin.h>

#include <cmath>

#include "sapsk/kernels.hpp"

namespace sapsk::kernels {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559005768;
constexpr double kInvTwoPi = 1.0 / kTwoPi;

inline double wrap1(double x) {
  return x - kTwoPi * std::nearbyint(x * kInvTwoPi);
}

inline __m256d wrap4(__m256d x) {
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kInvTwoPi)),
                                    _MM_FROUND_TO_NEAREST_INT |
                                        _MM_FROUND_NO_EXC);
  return _mm256_sub_pd(x, _mm256_mul_pd(_mm256_set1_pd(kTwoPi), k));
}

// Fold four (metric, index) lanes plus a scalar tail into the final argmin.
template <typename Tail>
uint32_t reduce(__m256d vbest, __m256d vindex, size_t vec_count, size_t count,
                Tail&& tail_metric) {
  alignas(32) double metrics[4];
  alignas(32) double indices[4];
  _mm256_store_pd(metrics, vbest);
  _mm256_store_pd(indices, vindex);

  double best = HUGE_VAL;
  uint32_t best_index = 0;
  bool have = false;
  for (int lane = 0; lane < 4; ++lane) {
    const uint32_t index = uint32_t(indices[lane]);
    if (!have || metrics[lane] < best ||
        (metrics[lane] == best && index < best_index)) {
      best = metrics[lane];
      best_index = index;
      have = true;
    }
  }
  for (size_t i = vec_count; i < count; ++i) {
    const double metric = tail_metric(i);
    if (metric < best) {
      best = metric;
      best_index = uint32_t(i);
    }
  }
  return best_index;
}

uint32_t eucd_avx2(const double* in_phase, const double* quadrature,
                   size_t count, double ri, double rq) {
  const size_t vec_count = count & ~size_t(3);
  __m256d vbest = _mm256_set1_pd(HUGE_VAL);
  __m256d vindex = _mm256_setzero_pd();
  const __m256d vri = _mm256_set1_pd(ri);
  const __m256d vrq = _mm256_set1_pd(rq);
  __m256d vi = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d vstep = _mm256_set1_pd(4.0);
  for (size_t i = 0; i < vec_count; i += 4) {
    const __m256d di = _mm256_sub_pd(vri, _mm256_loadu_pd(in_phase + i));
    const __m256d dq = _mm256_sub_pd(vrq, _mm256_loadu_pd(quadrature + i));
    const __m256d metric =
        _mm256_add_pd(_mm256_mul_pd(di, di), _mm256_mul_pd(dq, dq));
    const __m256d lt = _mm256_cmp_pd(metric, vbest, _CMP_LT_OQ);
    vbest = _mm256_blendv_pd(vbest, metric, lt);
    vindex = _mm256_blendv_pd(vindex, vi, lt);
    vi = _mm256_add_pd(vi, vstep);
  }
  return reduce(vbest, vindex, vec_count, count, [&](size_t i) {
    const double di = ri - in_phase[i];
    const double dq = rq - quadrature[i];
    return di * di + dq * dq;
  });
}

uint32_t gapd_avx2(const double* amplitude, const double* phase,
                   const double* inv_weight, const double* log_weight,
                   size_t count, double ra, double rp, double inv_half_sn2) {
  const size_t vec_count = count & ~size_t(3);
  __m256d vbest = _mm256_set1_pd(HUGE_VAL);
  __m256d vindex = _mm256_setzero_pd();
  const __m256d vra = _mm256_set1_pd(ra);
  const __m256d vrp = _mm256_set1_pd(rp);
  const __m256d vwa = _mm256_set1_pd(inv_half_sn2);
  __m256d vi = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d vstep = _mm256_set1_pd(4.0);
  for (size_t i = 0; i < vec_count; i += 4) {
    const __m256d da = _mm256_sub_pd(vra, _mm256_loadu_pd(amplitude + i));
    const __m256d dp = wrap4(_mm256_sub_pd(vrp, _mm256_loadu_pd(phase + i)));
    const __m256d metric = _mm256_add_pd(
        _mm256_add_pd(
            _mm256_mul_pd(_mm256_mul_pd(da, da), vwa),
            _mm256_mul_pd(_mm256_mul_pd(dp, dp),
                          _mm256_loadu_pd(inv_weight + i))),
        _mm256_loadu_pd(log_weight + i));
    const __m256d lt = _mm256_cmp_pd(metric, vbest, _CMP_LT_OQ);
    vbest = _mm256_blendv_pd(vbest, metric, lt);
    vindex = _mm256_blendv_pd(vindex, vi, lt);
    vi = _mm256_add_pd(vi, vstep);
  }
  return reduce(vbest, vindex, vec_count, count, [&](size_t i) {
    const double da = ra - amplitude[i];
    const double dp = wrap1(rp - phase[i]);
    return da * da * inv_half_sn2 + dp * dp * inv_weight[i] + log_weight[i];
  });
}

uint32_t gpdd_avx2(const double* amplitude, const double* phase, size_t count,
                   double ra, double rp, double two_inv_sn2,
                   double inv_weight_r) {
  const size_t vec_count = count & ~size_t(3);
  __m256d vbest = _mm256_set1_pd(HUGE_VAL);
  __m256d vindex = _mm256_setzero_pd();
  const __m256d vra = _mm256_set1_pd(ra);
  const __m256d vrp = _mm256_set1_pd(rp);
  const __m256d vwa = _mm256_set1_pd(two_inv_sn2);
  const __m256d vwp = _mm256_set1_pd(inv_weight_r);
  __m256d vi = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d vstep = _mm256_set1_pd(4.0);
  for (size_t i = 0; i < vec_count; i += 4) {
    const __m256d da = _mm256_sub_pd(vra, _mm256_loadu_pd(amplitude + i));
    const __m256d dp = wrap4(_mm256_sub_pd(vrp, _mm256_loadu_pd(phase + i)));
    const __m256d metric =
        _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(da, da), vwa),
                      _mm256_mul_pd(_mm256_mul_pd(dp, dp), vwp));
    const __m256d lt = _mm256_cmp_pd(metric, vbest, _CMP_LT_OQ);
    vbest = _mm256_blendv_pd(vbest, metric, lt);
    vindex = _mm256_blendv_pd(vindex, vi, lt);
    vi = _mm256_add_pd(vi, vstep);
  }
  return reduce(vbest, vindex, vec_count, count, [&](size_t i) {
    const double da = ra - amplitude[i];
    const double dp = wrap1(rp - phase[i]);
    return da * da * two_inv_sn2 + dp * dp * inv_weight_r;
  });
}

const KernelSet avx2_set = {"avx2", eucd_avx2, gapd_avx2, gpdd_avx2};

}  // namespace

const KernelSet* avx2_or_null() { return &avx2_set; }

}  // namespace sapsk::kernels
