#include "sapsk/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "sapsk/error.hpp"

namespace sapsk {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

void check_common(uint32_t order, double mean_energy) {
  if (order < 2) {
    throw Error("InvalidOrder", "constellation order must be at least 2");
  }
  if (!(mean_energy > 0.0) || !std::isfinite(mean_energy)) {
    throw Error("InvalidEnergy", "mean energy must be positive and finite");
  }
}

void check_rings(uint32_t order, uint32_t rings) {
  if (rings < 1) {
    throw Error("NonDividingGamma", "ring count must be at least 1");
  }
  if (order % rings != 0) {
    throw Error("NonDividingGamma", "ring count must divide the order");
  }
}

double canonical_phase(double phase) {
  double p = std::fmod(phase, kTwoPi);
  if (p < 0.0) p += kTwoPi;
  // fmod can land exactly on 2π after the adjustment when phase is a tiny
  // negative; fold that back to 0.
  if (p >= kTwoPi) p -= kTwoPi;
  return p;
}

// Shared ring-lattice builder for SAPSK (staggered) and PQAM (aligned).
Constellation build_ring_lattice(Family family, uint32_t order, uint32_t rings,
                                 double mean_energy, bool staggered) {
  check_common(order, mean_energy);
  check_rings(order, rings);

  Constellation c;
  c.spec = {family, order, rings, mean_energy};
  const uint32_t per_ring = order / rings;
  const double four_g2_m1 = 4.0 * double(rings) * double(rings) - 1.0;
  c.delta_rho = std::sqrt(12.0 * mean_energy / four_g2_m1);
  c.delta_theta = kTwoPi * double(rings) / double(order);

  c.ring_amplitudes.reserve(rings);
  c.ring_energies.reserve(rings);
  c.symbols.reserve(order);
  for (uint32_t q = 1; q <= rings; ++q) {
    const double amplitude = 0.5 * c.delta_rho * double(2 * q - 1);
    c.ring_amplitudes.push_back(amplitude);
    c.ring_energies.push_back(amplitude * amplitude);

    // Ring 1 carries the base phases (δ_θ/2)(2p-1); on staggered lattices
    // every second ring is offset by δ_θ/2.  Ring 1 stays unstaggered so the
    // single-ring case coincides with the aligned lattice (and plain PSK).
    const double offset =
        (staggered && q % 2 == 0) ? 0.5 * c.delta_theta : 0.0;
    std::vector<double> phases(per_ring);
    for (uint32_t p = 1; p <= per_ring; ++p) {
      phases[p - 1] =
          canonical_phase(0.5 * c.delta_theta * double(2 * p - 1) + offset);
    }
    // A staggered ring's last base phase wraps to exactly 0; store each ring
    // phase-ascending and let the position index be the ascending rank.
    std::sort(phases.begin(), phases.end());
    for (uint32_t p = 1; p <= per_ring; ++p) {
      const double phase = phases[p - 1];
      c.symbols.push_back({q, p, amplitude, phase,
                           amplitude * std::cos(phase),
                           amplitude * std::sin(phase)});
    }
  }
  return c;
}

std::string format_row(const Symbol& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%u %u %.9g %.9g %.9g %.9g\n", s.ring,
                s.position, s.amplitude, s.phase, s.in_phase, s.quadrature);
  return buf;
}

}  // namespace

const char* family_name(Family family) {
  switch (family) {
    case Family::kSapsk: return "sapsk";
    case Family::kPqam: return "pqam";
    case Family::kQam: return "qam";
  }
  return "?";
}

Constellation build_sapsk(uint32_t order, uint32_t rings, double mean_energy) {
  return build_ring_lattice(Family::kSapsk, order, rings, mean_energy, true);
}

Constellation build_pqam(uint32_t order, uint32_t rings, double mean_energy) {
  return build_ring_lattice(Family::kPqam, order, rings, mean_energy, false);
}

Constellation build_qam(uint32_t order, double mean_energy) {
  check_common(order, mean_energy);
  const uint32_t side = uint32_t(std::lround(std::sqrt(double(order))));
  if (side * side != order) {
    throw Error("NotPerfectSquare", "qam order must be a perfect square");
  }

  // Odd-integer grid {±1, ±3, ...}² has mean energy 2·(side²-1)/3; scale it
  // down to the requested mean energy.
  const double unscaled = 2.0 * (double(side) * double(side) - 1.0) / 3.0;
  const double scale = std::sqrt(mean_energy / unscaled);

  struct GridPoint {
    double i, q, amplitude, phase;
  };
  std::vector<GridPoint> points;
  points.reserve(order);
  for (uint32_t a = 0; a < side; ++a) {
    for (uint32_t b = 0; b < side; ++b) {
      const double gi = (2.0 * double(a) - double(side - 1)) * scale;
      const double gq = (2.0 * double(b) - double(side - 1)) * scale;
      const double amplitude = std::hypot(gi, gq);
      double phase = std::atan2(gq, gi);
      if (phase < 0.0) phase += kTwoPi;
      points.push_back({gi, gq, amplitude, phase});
    }
  }

  // Ring indices by ascending distinct amplitude, positions by ascending
  // phase within a ring.  Amplitudes that should coincide do so exactly
  // (hypot of identical operand magnitudes), so no tolerance is needed.
  std::sort(points.begin(), points.end(), [](const auto& x, const auto& y) {
    if (x.amplitude != y.amplitude) return x.amplitude < y.amplitude;
    return x.phase < y.phase;
  });

  Constellation c;
  c.spec = {Family::kQam, order, 0, mean_energy};
  c.delta_rho = 2.0 * scale;  // lattice step
  c.delta_theta = 0.0;        // not applicable to a rectangular grid
  uint32_t ring = 0;
  uint32_t position = 0;
  double current = -1.0;
  for (const GridPoint& g : points) {
    if (g.amplitude != current) {
      current = g.amplitude;
      ++ring;
      position = 0;
      c.ring_amplitudes.push_back(g.amplitude);
      c.ring_energies.push_back(g.amplitude * g.amplitude);
    }
    ++position;
    c.symbols.push_back({ring, position, g.amplitude, g.phase, g.i, g.q});
  }
  c.spec.rings = ring;
  return c;
}

Constellation build(const ConstellationSpec& spec) {
  switch (spec.family) {
    case Family::kSapsk:
      return build_sapsk(spec.order, spec.rings, spec.mean_energy);
    case Family::kPqam:
      return build_pqam(spec.order, spec.rings, spec.mean_energy);
    case Family::kQam:
      return build_qam(spec.order, spec.mean_energy);
  }
  throw Error("InvalidFamily", "unknown constellation family");
}

bool ValidationReport::all_pass() const {
  for (const CheckResult& check : checks) {
    if (check.applicable && !check.pass) return false;
  }
  return true;
}

ValidationReport validate(const Constellation& c) {
  ValidationReport report;
  const auto add = [&report](std::string name, bool pass, double deviation) {
    report.checks.push_back({std::move(name), true, pass, deviation});
  };
  const auto add_na = [&report](std::string name) {
    report.checks.push_back({std::move(name), false, true, 0.0});
  };
  const bool ring_lattice = c.spec.family != Family::kQam;
  const double es = c.spec.mean_energy;

  // Symbol count and (ring, position) uniqueness.
  add("symbol_count", c.symbols.size() == c.spec.order,
      double(c.symbols.size()) - double(c.spec.order));
  {
    std::map<std::pair<uint32_t, uint32_t>, int> seen;
    bool unique = true;
    for (const Symbol& s : c.symbols) {
      if (++seen[{s.ring, s.position}] > 1) unique = false;
    }
    add("ring_position_unique", unique, unique ? 0.0 : 1.0);
  }

  // Mean energy.
  {
    double sum = 0.0;
    for (const Symbol& s : c.symbols) sum += s.amplitude * s.amplitude;
    const double dev = std::abs(sum / double(c.symbols.size()) - es) / es;
    add("mean_energy", dev <= 1e-12, dev);
  }

  // Polar and rectangular coordinates agree.
  {
    double worst = 0.0;
    for (const Symbol& s : c.symbols) {
      const double di = s.in_phase - s.amplitude * std::cos(s.phase);
      const double dq = s.quadrature - s.amplitude * std::sin(s.phase);
      const double scale = std::max(s.amplitude, es);
      worst = std::max(worst, std::hypot(di, dq) / scale);
    }
    add("coordinate_consistency", worst <= 1e-12, worst);
  }

  if (ring_lattice) {
    const uint32_t rings = c.spec.rings;
    const uint32_t per_ring = c.spec.order / rings;
    const double four_g2_m1 = 4.0 * double(rings) * double(rings) - 1.0;

    // Radius ladder ρ_q = (δ_ρ/2)(2q-1) and energies E_q = 3E_s(2q-1)²/(4Γ²-1).
    double worst_rho = 0.0, worst_e = 0.0;
    for (uint32_t q = 1; q <= rings; ++q) {
      const double rho = 0.5 * c.delta_rho * double(2 * q - 1);
      const double eq = 3.0 * es * double(2 * q - 1) * double(2 * q - 1) /
                        four_g2_m1;
      worst_rho = std::max(
          worst_rho, std::abs(c.ring_amplitudes[q - 1] - rho) / rho);
      worst_e = std::max(worst_e, std::abs(c.ring_energies[q - 1] - eq) / eq);
    }
    add("ring_amplitude_ladder", worst_rho <= 1e-12, worst_rho);
    add("ring_energy_ladder", worst_e <= 1e-12, worst_e);

    // Phase spacing: consecutive gaps within each ring equal δ_θ, including
    // the wrap-around gap.
    double worst_gap = 0.0;
    for (uint32_t q = 0; q < rings; ++q) {
      const Symbol* ring = &c.symbols[size_t(q) * per_ring];
      for (uint32_t p = 0; p < per_ring; ++p) {
        const double next =
            p + 1 < per_ring ? ring[p + 1].phase : ring[0].phase + kTwoPi;
        worst_gap =
            std::max(worst_gap, std::abs(next - ring[p].phase - c.delta_theta));
      }
    }
    add("phase_spacing", worst_gap <= 1e-9, worst_gap);

    // Stagger: nearest adjacent-ring phase offset is δ_θ/2 for the staggered
    // lattice (isosceles triangles) and 0 for the aligned one.
    if (rings >= 2) {
      const double expected =
          c.spec.family == Family::kSapsk ? 0.5 * c.delta_theta : 0.0;
      double worst = 0.0;
      for (uint32_t q = 0; q + 1 < rings; ++q) {
        const Symbol* lower = &c.symbols[size_t(q) * per_ring];
        const Symbol* upper = &c.symbols[size_t(q + 1) * per_ring];
        for (uint32_t p = 0; p < per_ring; ++p) {
          double nearest = kTwoPi;
          for (uint32_t w = 0; w < per_ring; ++w) {
            double d = std::abs(
                std::remainder(upper[w].phase - lower[p].phase, kTwoPi));
            nearest = std::min(nearest, d);
          }
          worst = std::max(worst, std::abs(nearest - expected));
        }
      }
      add(c.spec.family == Family::kSapsk ? "stagger_isosceles"
                                          : "stagger_aligned",
          worst <= 1e-9, worst);
    } else {
      add_na(c.spec.family == Family::kSapsk ? "stagger_isosceles"
                                             : "stagger_aligned");
    }
  } else {
    add_na("ring_amplitude_ladder");
    add_na("ring_energy_ladder");
    add_na("phase_spacing");
    add_na("stagger_isosceles");

    // QAM-specific: every point sits on the scaled odd-integer lattice.
    const double step = c.delta_rho / 2.0;  // scale factor
    double worst = 0.0;
    for (const Symbol& s : c.symbols) {
      const double gi = s.in_phase / step;
      const double gq = s.quadrature / step;
      worst = std::max(worst, std::abs(gi - std::nearbyint(gi)));
      worst = std::max(worst, std::abs(gq - std::nearbyint(gq)));
      // Odd integers only.
      worst = std::max(
          worst, std::abs(std::fmod(std::abs(std::nearbyint(gi)), 2.0) - 1.0));
      worst = std::max(
          worst, std::abs(std::fmod(std::abs(std::nearbyint(gq)), 2.0) - 1.0));
    }
    add("qam_odd_integer_grid", worst <= 1e-9, worst);
  }

  return report;
}

std::string to_table(const Constellation& c) {
  std::string out;
  out.reserve(c.symbols.size() * 64);
  for (const Symbol& s : c.symbols) out += format_row(s);
  return out;
}

}  // namespace sapsk
