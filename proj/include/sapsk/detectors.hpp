#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sapsk/channel.hpp"
#include "sapsk/constellation.hpp"
#include "sapsk/kernels.hpp"

// The four detectors, all mapping a received sample to a symbol index under
// a common contract (valid index in [0, M), deterministic lowest-index tie
// break):
//
//   EUC-D      argmin |r - s|²                       — nearest neighbor in IQ
//   GAP-D      argmin (|r|-|s|)²/(σ_n²/2)
//                    + Δθ²/w_s + ln w_s,  w_s = σ_φ² + σ_n²/(2|s|²)
//   GPD-D      argmin 2(|r|-|s|)²/σ_n² + Δθ²/w_r,   w_r = σ_φ² + σ_n²/(2|r|²)
//   SAPSK-fast GPD-D restricted to a constant-size candidate set found by
//              amplitude/phase table interpolation — O(1) work per decision,
//              independent of M (SAPSK constellations only).
//
// Δθ is the phase difference wrapped to (-π, π].  GAP-D and GPD-D require
// σ_n² > 0; a received sample with |r| = 0 (where the GPD-D phase weight is
// undefined) falls back to EUC-D, and the fast detector returns index 0 for
// it (its ring bracketing is undefined at the origin; measure-zero event).

namespace sapsk {

enum class DetectorKind { kEucD, kGapD, kGpdD, kSapskFast };

const char* detector_name(DetectorKind kind);

struct NoiseModel {
  double sigma_n_sq = 0.0;   // total complex noise variance N₀
  double sigma_phi_sq = 0.0; // phase-noise variance (rad²)
};

// Wrap an angle difference to (-π, π].  Ties-to-even rounding keeps this
// bit-identical with the vectorized kernels.
inline double wrap_phase(double x) {
  constexpr double kTwoPi = 6.283185307179586476925286766559005768;
  return x - kTwoPi * std::nearbyint(x * (1.0 / kTwoPi));
}

// Reference implementations: straightforward full scans, independent of the
// kernel dispatch (the kernels are equivalence-tested against these).
uint32_t detect_eucd(const Received& r, const Constellation& c);
uint32_t detect_gapd(const Received& r, const Constellation& c,
                     const NoiseModel& noise);
uint32_t detect_gpdd(const Received& r, const Constellation& c,
                     const NoiseModel& noise);

// Precomputed lookup state for the constant-time SAPSK detector: the
// ascending ring-amplitude array, per-ring ascending phase tables with
// constant gap δ_θ, and the first phase of each ring (per-ring tables are
// affine in the position index, so detection touches O(1) of this).
struct SapskIndex {
  uint32_t order = 0;
  uint32_t rings = 0;
  uint32_t per_ring = 0;
  double delta_rho = 0.0;
  double delta_theta = 0.0;
  double first_amplitude = 0.0;            // innermost radius √E_1
  std::vector<double> ring_amplitudes;     // Γ entries, ascending, gap δ_ρ
  std::vector<double> first_phase;         // θ_{q,1} per ring
  std::vector<std::vector<double>> ring_phase_tables;  // per ring, ascending
};

// Throws Error{WrongFamily} unless c is SAPSK.
SapskIndex build_sapsk_index(const Constellation& c);

// Work counter for the constant-work property test: totals must be identical
// across constellation orders.
struct FastDetectOps {
  uint64_t table_loads = 0;    // reads of ring amplitude / first-phase entries
  uint64_t metric_evals = 0;   // candidate GPD-D metric evaluations
  uint64_t candidates = 0;     // candidate symbols formed
  bool used_fallback = false;  // |r| = 0 path taken
};

// O(1) SAPSK detection.  `robust_corners` widens the candidate set from the
// two nearest-per-bracket-ring symbols to all four bracket corners
// (diagnostic mode; quantifies the boundary loss of the pruned set).
uint32_t detect_sapsk_fast(const Received& r, const SapskIndex& index,
                           const NoiseModel& noise,
                           FastDetectOps* ops = nullptr,
                           bool robust_corners = false);

// Workspace-backed detector bound to one (constellation, noise model) pair:
// precomputes the per-symbol arrays once and runs the runtime-dispatched
// argmin kernels (or the O(1) index for kSapskFast).  This is the hot path
// the Monte Carlo engine uses.
class Detector {
 public:
  Detector(const Constellation& c, NoiseModel noise, DetectorKind kind,
           const kernels::KernelSet& kernel_set = kernels::active());

  uint32_t detect(const Received& r) const;

  DetectorKind kind() const { return kind_; }
  const NoiseModel& noise() const { return noise_; }

  // Diagnostic 4-corner candidate set for kSapskFast (see detect_sapsk_fast).
  void set_robust_corners(bool robust) { robust_corners_ = robust; }

 private:
  DetectorKind kind_;
  NoiseModel noise_;
  const kernels::KernelSet* kernels_;
  size_t count_ = 0;
  // SoA views of the constellation, populated per detector kind.
  std::vector<double> in_phase_, quadrature_;      // EUC-D
  std::vector<double> amplitude_, phase_;          // GAP-D / GPD-D
  std::vector<double> inv_weight_, log_weight_;    // GAP-D
  double inv_half_sn2_ = 0.0;                      // GAP-D
  double two_inv_sn2_ = 0.0;                       // GPD-D
  SapskIndex index_;                               // SAPSK-fast
  bool robust_corners_ = false;
};

}  // namespace sapsk
