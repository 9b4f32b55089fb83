#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Construction and validation of the three constellation families:
//
//   SAPSK(M, Γ): Γ concentric rings with radii ρ_q = (δ_ρ/2)(2q-1),
//     δ_ρ = sqrt(12·E_s/(4Γ²-1)), M/Γ symbols per ring spaced by
//     δ_θ = 2πΓ/M, with every second ring phase-staggered by δ_θ/2 so each
//     symbol and its two nearest neighbors on an adjacent ring form an
//     isosceles triangle in the polar plane.
//   PQAM(M, Γ): same radii and spacing, no stagger (rectangular polar
//     lattice).
//   QAM(M):     square grid on odd-integer coordinates {±1, ±3, ...} scaled
//     to the requested mean energy; M must be a perfect square.
//
// All families are normalized so the mean of amplitude² over the symbol set
// equals mean_energy exactly (Σ_{q=1..Γ} (2q-1)² = Γ(4Γ²-1)/3 makes the ring
// ladder average out).

namespace sapsk {

enum class Family { kSapsk, kPqam, kQam };

const char* family_name(Family family);

struct ConstellationSpec {
  Family family = Family::kSapsk;
  uint32_t order = 0;       // M
  uint32_t rings = 1;       // Γ (derived for QAM: number of distinct radii)
  double mean_energy = 1.0; // E_s
};

struct Symbol {
  uint32_t ring;      // q, 1-based, innermost first
  uint32_t position;  // p, 1-based, phase-ascending within the ring
  double amplitude;
  double phase;       // radians in [0, 2π)
  double in_phase;
  double quadrature;
};

struct Constellation {
  ConstellationSpec spec;
  double delta_rho = 0.0;    // ring spacing (QAM: scaled grid step)
  double delta_theta = 0.0;  // per-ring phase spacing (QAM: 0, not applicable)
  std::vector<double> ring_amplitudes;  // ascending, one per ring
  std::vector<double> ring_energies;    // amplitude², one per ring
  // Ring-major, phase-ascending within each ring; symbol index
  // = (ring-1)·per_ring + (position-1) for SAPSK/PQAM.
  std::vector<Symbol> symbols;

  uint32_t order() const { return spec.order; }
  uint32_t rings() const { return spec.rings; }
  // Symbols per ring; uniform for SAPSK/PQAM only.
  uint32_t per_ring() const { return spec.order / spec.rings; }
};

// Builders.  Throw Error{InvalidOrder | NonDividingGamma | NotPerfectSquare |
// InvalidEnergy} on bad parameters.
Constellation build_sapsk(uint32_t order, uint32_t rings,
                          double mean_energy = 1.0);
Constellation build_pqam(uint32_t order, uint32_t rings,
                         double mean_energy = 1.0);
Constellation build_qam(uint32_t order, double mean_energy = 1.0);
Constellation build(const ConstellationSpec& spec);

// Validation report: one row per structural invariant with the measured
// deviation.  Checks that do not apply to the family (e.g. the stagger check
// for QAM) are flagged not-applicable rather than pass/fail.
struct CheckResult {
  std::string name;
  bool applicable = true;
  bool pass = true;
  double deviation = 0.0;  // measured worst-case deviation for this check
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

ValidationReport validate(const Constellation& c);

// Plain-text export, one symbol per line:
//   q p amplitude phase in_phase quadrature
// space-separated, 9 significant digits.  No header; callers prepend one.
std::string to_table(const Constellation& c);

}  // namespace sapsk
