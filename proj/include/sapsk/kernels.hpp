#pragma once

#include <cstddef>
#include <cstdint>

// Brute-force argmin kernels for the O(M) detectors, in two interchangeable
// implementations: a scalar reference and an AVX2 variant selected at
// runtime.  The two are decision-equivalent by construction — identical
// arithmetic per symbol (same operation order, no FMA contraction; the whole
// project builds with -ffp-contract=off and the AVX2 translation unit is
// compiled without -mfma) and the same tie rule (lowest index wins) — and the
// test suite asserts exact index equality between them.
//
// Phase differences are wrapped with x - 2π·nearbyint(x/2π); nearbyint
// (ties-to-even) matches the vector rounding mode used by the AVX2 kernel,
// and the wrapped value is only ever squared, so the ±π seam cannot split
// the two implementations.

namespace sapsk::kernels {

// Each kernel returns the index of the metric-minimizing symbol.
//
//   eucd:  (ri - I_i)² + (rq - Q_i)²
//   gapd:  (ra - A_i)²·inv_half_sn2 + wrap(rp - P_i)²·inv_w[i] + log_w[i]
//   gpdd:  (ra - A_i)²·two_inv_sn2 + wrap(rp - P_i)²·inv_w_r
struct KernelSet {
  const char* name;
  uint32_t (*eucd)(const double* in_phase, const double* quadrature,
                   size_t count, double ri, double rq);
  uint32_t (*gapd)(const double* amplitude, const double* phase,
                   const double* inv_weight, const double* log_weight,
                   size_t count, double ra, double rp, double inv_half_sn2);
  uint32_t (*gpdd)(const double* amplitude, const double* phase, size_t count,
                   double ra, double rp, double two_inv_sn2,
                   double inv_weight_r);
};

const KernelSet& scalar();

// True when this build carries the AVX2 kernels and the CPU executes them.
bool avx2_supported();

// The AVX2 set; call only when avx2_supported().  Null on builds without
// x86-64 support.
const KernelSet* avx2_or_null();

// Runtime selection: AVX2 when supported, else scalar.  The environment
// variable SAPSK_KERNELS=scalar|avx2|auto overrides (bad values or an
// unsatisfiable "avx2" fall back to auto/scalar).
const KernelSet& active();

}  // namespace sapsk::kernels
