#pragma once

#include <cstdint>
#include <vector>

// Closed-form SEP machinery for SAPSK under AWGN + Gaussian phase noise.
//
// Per ring q the effective polar noise is n_ρ ~ N(0, σ_n²/2) along the
// amplitude axis and n_θ ~ N(0, T_q) along the phase axis, with
// T_q = σ_φ² + σ_n²/(2E_q) = σ_φ² + (4Γ²-1)/(6·γ̄·(2q-1)²).  In noise-scaled
// coordinates the spacings become δ_ρ' = √(24γ̄/(4Γ²-1)) and
// δ_θ' = (2πΓ/M)/√T_q, and the decision cell is a hexagon whose orientation
// flips at tan α = δ_θ'/(2δ_ρ') = 1 (equivalently at the per-ring SNR
// threshold γ_q):
//
//   amplitude-axis cell (tan α ≥ 1, γ̄ ≤ γ_q): main rectangle
//     [-δ_ρ', δ_ρ'] × [±(δ_θ'/2)(1-D₁)] with apexes at (0, ±(δ_θ'/2)·D₁),
//     D₁ = (tan²α + 1)/(2tan²α);
//   phase-axis cell (tan α < 1): main rectangle [±δ_ρ'(1-D₂)] × [-δ_θ'/2,
//     δ_θ'/2] with apexes at (±δ_ρ'·D₂, 0), D₂ = (1 + tan²α)/2.
//
// The four corner triangles are approximated by N inscribed rectangles
// sliced from the far edge (B_z = D + (1-2D)·z/N), giving
//   P_q = clamp(1 - P_main - 4·P_triangle, 0, 1)
// and the constellation SEP P_e = (1/Γ)·Σ_q P_q.  The N-rectangle staircase
// converges to the exact hexagon integral from above as N grows; tests and
// the acceptance gate check that convergence against 2-D quadrature.

namespace sapsk {

struct SepModelParams {
  uint32_t order = 0;          // M
  uint32_t rings = 1;          // Γ, must divide M
  double snr_linear = 1.0;     // γ̄ = E_s/N₀
  double sigma_phi_sq = 0.0;   // σ_φ² (rad²)
  uint32_t rect_count = 10;    // N rectangles per corner triangle
};

enum class CellOrientation { kAmplitudeAxis, kPhaseAxis };

// The published per-ring formula carries a handful of internal
// inconsistencies against its own derivation (a 2Γ²-1 where the spacing
// formula gives 4Γ²-1; an unsquared staircase bound).  kDerived follows the
// derivation (validated against quadrature and simulation); kAsPrinted
// reproduces the literal printed formula for diagnostic comparison.
enum class ModelVariant { kDerived, kAsPrinted };

// Q(x) = P(N(0,1) > x) = erfc(x/√2)/2, accurate to ~1e-12 relative for
// x ≤ 8 and monotone down to the ~1e-300 underflow floor near x ≈ 38.7.
double q_function(double x);

// Per-ring SNR threshold where the cell orientation flips:
//   γ_q = (4Γ²-1)·((2q-1)²π²Γ² - 4M²) / (24·M²·(2q-1)²·σ_φ²).
// Negative when the ring is phase-axis oriented at every SNR.  Throws
// Error{ZeroPhaseNoise} when σ_φ² = 0 (threshold diverges; the orientation
// is amplitude-axis for all finite γ̄).
double gamma_threshold(uint32_t order, uint32_t rings, uint32_t q,
                       double sigma_phi_sq);

struct RingGeometry {
  uint32_t q = 0;
  double t_q = 0.0;              // σ_φ² + σ_n²/(2E_q)
  double delta_rho_prime = 0.0;  // δ_ρ in units of σ_n/√2
  double delta_theta_prime = 0.0;// δ_θ in units of √T_q
  double tan_alpha = 0.0;
  double d1 = 0.0;               // (tan²α+1)/(2tan²α)
  double d2 = 0.0;               // (1+tan²α)/2
  double gamma_threshold = 0.0;  // +inf when σ_φ² = 0
  CellOrientation orientation = CellOrientation::kAmplitudeAxis;
  double r_depth = 0.0;          // center-to-apex distance of the hexagon
  double r_width = 0.0;          // main-rectangle extent along the apex axis
  double a_factor = 0.0;         // A = πΓ√(4Γ²-1)/M
  // √((4Γ²-1)/(2Γ²-1)): rescales δ_ρ' to the literal printed main-rectangle
  // term; used by the kAsPrinted diagnostic variant only.
  double printed_rho_scale = 1.0;
};

RingGeometry ring_geometry(const SepModelParams& params, uint32_t q);

// Per-ring error probability from the hexagon decomposition (clamped to
// [0, 1]).  The orientation follows ring_geometry; the *_oriented form
// forces a branch, which the branch-continuity tests use.
double ring_error_prob(const SepModelParams& params, uint32_t q,
                       ModelVariant variant = ModelVariant::kDerived);
double ring_error_prob_oriented(const SepModelParams& params, uint32_t q,
                                CellOrientation orientation,
                                ModelVariant variant = ModelVariant::kDerived);

// Exact 2-D Gaussian integral over the same hexagonal cell, by adaptive
// quadrature — the convergence oracle for the N-rectangle staircase.
double ring_error_prob_quadrature(const SepModelParams& params, uint32_t q);

// P_e = (1/Γ) Σ_q P_q.
double sep_approx(const SepModelParams& params,
                  ModelVariant variant = ModelVariant::kDerived);

// Published high-phase-noise SEP floor, Q(2πΓ/(M·σ_φ)).  Kept exactly as
// published; the Monte Carlo harness reports how it compares to measured
// floors.  Throws Error{ZeroPhaseNoise} when σ_φ² = 0.
double error_floor(uint32_t order, uint32_t rings, double sigma_phi_sq);

// Exhaustive Γ* search over every divisor of M (ties → smaller Γ).
struct GammaSearchRow {
  uint32_t rings = 0;
  double sep = 0.0;
};

struct GammaSearchResult {
  uint32_t best_rings = 0;
  double best_sep = 0.0;
  std::vector<GammaSearchRow> table;  // all divisors, ascending
};

GammaSearchResult optimize_gamma(uint32_t order, double snr_db,
                                 double sigma_phi_sq,
                                 uint32_t rect_count = 10);

}  // namespace sapsk
