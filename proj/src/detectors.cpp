#include "sapsk/detectors.hpp"

#include <algorithm>
#include <cmath>

#include "sapsk/error.hpp"

namespace sapsk {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559005768;

void require_awgn(const NoiseModel& noise) {
  if (!(noise.sigma_n_sq > 0.0)) {
    throw Error("DegenerateNoise",
                "amplitude-weighted detectors require sigma_n_sq > 0");
  }
}

// Nearest phase position (0-based) on a ring whose table is affine:
// θ_{q,p} = first_phase + (p-1)·δ_θ.  Rounds ties to even, consistent with
// the kernels' wrap.
inline uint32_t nearest_position(double phase, double first_phase,
                                 double inv_delta_theta, uint32_t per_ring) {
  const double steps = (phase - first_phase) * inv_delta_theta;
  long pos = long(std::nearbyint(steps)) % long(per_ring);
  if (pos < 0) pos += per_ring;
  return uint32_t(pos);
}

}  // namespace

const char* detector_name(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::kEucD: return "eucd";
    case DetectorKind::kGapD: return "gapd";
    case DetectorKind::kGpdD: return "gpdd";
    case DetectorKind::kSapskFast: return "fast";
  }
  return "?";
}

uint32_t detect_eucd(const Received& r, const Constellation& c) {
  double best = HUGE_VAL;
  uint32_t best_index = 0;
  for (size_t i = 0; i < c.symbols.size(); ++i) {
    const double di = r.in_phase - c.symbols[i].in_phase;
    const double dq = r.quadrature - c.symbols[i].quadrature;
    const double metric = di * di + dq * dq;
    if (metric < best) {
      best = metric;
      best_index = uint32_t(i);
    }
  }
  return best_index;
}

uint32_t detect_gapd(const Received& r, const Constellation& c,
                     const NoiseModel& noise) {
  if (noise.sigma_n_sq == 0.0 && noise.sigma_phi_sq == 0.0) {
    throw Error("DegenerateNoise",
                "gap-d weights are undefined with zero noise variances");
  }
  require_awgn(noise);

  const double inv_half_sn2 = 1.0 / (0.5 * noise.sigma_n_sq);
  double best = HUGE_VAL;
  uint32_t best_index = 0;
  for (size_t i = 0; i < c.symbols.size(); ++i) {
    const Symbol& s = c.symbols[i];
    const double w =
        noise.sigma_phi_sq + noise.sigma_n_sq / (2.0 * s.amplitude * s.amplitude);
    const double da = r.amplitude - s.amplitude;
    const double dp = wrap_phase(r.phase - s.phase);
    const double metric =
        da * da * inv_half_sn2 + dp * dp * (1.0 / w) + std::log(w);
    if (metric < best) {
      best = metric;
      best_index = uint32_t(i);
    }
  }
  return best_index;
}

uint32_t detect_gpdd(const Received& r, const Constellation& c,
                     const NoiseModel& noise) {
  require_awgn(noise);
  if (r.amplitude == 0.0) return detect_eucd(r, c);

  const double two_inv_sn2 = 2.0 / noise.sigma_n_sq;
  const double weight_r =
      noise.sigma_phi_sq +
      noise.sigma_n_sq / (2.0 * r.amplitude * r.amplitude);
  const double inv_weight_r = 1.0 / weight_r;
  double best = HUGE_VAL;
  uint32_t best_index = 0;
  for (size_t i = 0; i < c.symbols.size(); ++i) {
    const Symbol& s = c.symbols[i];
    const double da = r.amplitude - s.amplitude;
    const double dp = wrap_phase(r.phase - s.phase);
    const double metric = da * da * two_inv_sn2 + dp * dp * inv_weight_r;
    if (metric < best) {
      best = metric;
      best_index = uint32_t(i);
    }
  }
  return best_index;
}

SapskIndex build_sapsk_index(const Constellation& c) {
  if (c.spec.family != Family::kSapsk) {
    throw Error("WrongFamily",
                "the constant-time detector requires a sapsk constellation");
  }
  SapskIndex index;
  index.order = c.spec.order;
  index.rings = c.spec.rings;
  index.per_ring = c.per_ring();
  index.delta_rho = c.delta_rho;
  index.delta_theta = c.delta_theta;
  index.first_amplitude = c.ring_amplitudes.front();
  index.ring_amplitudes = c.ring_amplitudes;
  index.first_phase.reserve(index.rings);
  index.ring_phase_tables.assign(index.rings, {});
  for (uint32_t q = 0; q < index.rings; ++q) {
    std::vector<double>& table = index.ring_phase_tables[q];
    table.reserve(index.per_ring);
    for (uint32_t p = 0; p < index.per_ring; ++p) {
      table.push_back(c.symbols[size_t(q) * index.per_ring + p].phase);
    }
    index.first_phase.push_back(table.front());
  }
  return index;
}

uint32_t detect_sapsk_fast(const Received& r, const SapskIndex& index,
                           const NoiseModel& noise, FastDetectOps* ops,
                           bool robust_corners) {
  require_awgn(noise);
  if (r.amplitude == 0.0) {
    // Ring bracketing is undefined at the origin (measure-zero event); any
    // fixed decision preserves correctness of the error count to within
    // that null set.
    if (ops) ops->used_fallback = true;
    return 0;
  }

  // Ring bracket from the amplitude interpolation
  //   f_E(u) = u/δ_ρ + 1 - √E_1/δ_ρ,
  // which maps ring centers to their 1-based indices exactly; the two rings
  // enclosing |r| are floor(f_E) and floor(f_E)+1, clamped so both exist.
  const double inv_delta_rho = 1.0 / index.delta_rho;
  const double f_e =
      r.amplitude * inv_delta_rho + 1.0 - index.first_amplitude * inv_delta_rho;
  uint32_t ring_lo = 1, ring_hi = 1;
  if (index.rings >= 2) {
    double f = std::floor(f_e);
    if (f < 1.0) f = 1.0;
    const double max_lo = double(index.rings - 1);
    if (f > max_lo) f = max_lo;
    ring_lo = uint32_t(f);
    ring_hi = ring_lo + 1;
  }

  // Candidates: the nearest-phase symbol on each bracketing ring.  With the
  // half-step stagger these are exactly the two facing corners of the phase
  // bracket, the pattern alternating with which half of the bracket arg r
  // falls in; |S_c| ≤ 2 always.  robust_corners widens to all four bracket
  // corners (diagnostic).
  const double inv_delta_theta = 1.0 / index.delta_theta;
  const uint32_t per_ring = index.per_ring;
  uint32_t candidate_count = 0;
  uint32_t candidates[4];
  const uint32_t step = robust_corners ? 1 : 0;
  for (uint32_t ring : {ring_lo, ring_hi}) {
    const double first_phase = index.first_phase[ring - 1];
    if (ops) ops->table_loads += 2;  // ring amplitude + first phase
    if (!robust_corners) {
      const uint32_t pos = nearest_position(r.phase, first_phase,
                                            inv_delta_theta, per_ring);
      candidates[candidate_count++] = (ring - 1) * per_ring + pos;
    } else {
      const double steps = (r.phase - first_phase) * inv_delta_theta;
      const long lo = long(std::floor(steps));
      for (long d = 0; d <= long(step); ++d) {
        long pos = (lo + d) % long(per_ring);
        if (pos < 0) pos += per_ring;
        candidates[candidate_count++] =
            (ring - 1) * per_ring + uint32_t(pos);
      }
    }
    if (ring_lo == ring_hi) break;  // single-ring constellation
  }

  // Final decision: the GPD-D metric restricted to the candidate set.
  const double two_inv_sn2 = 2.0 / noise.sigma_n_sq;
  const double weight_r =
      noise.sigma_phi_sq +
      noise.sigma_n_sq / (2.0 * r.amplitude * r.amplitude);
  const double inv_weight_r = 1.0 / weight_r;
  double best = HUGE_VAL;
  uint32_t best_index = 0;
  for (uint32_t k = 0; k < candidate_count; ++k) {
    const uint32_t i = candidates[k];
    const uint32_t ring = i / per_ring;
    const uint32_t pos = i % per_ring;
    // Per-ring phases are affine in the position, so the metric needs no
    // per-symbol table walk.
    const double amplitude = index.ring_amplitudes[ring];
    const double phase =
        index.first_phase[ring] + double(pos) * index.delta_theta;
    const double da = r.amplitude - amplitude;
    const double dp = wrap_phase(r.phase - phase);
    const double metric = da * da * two_inv_sn2 + dp * dp * inv_weight_r;
    if (ops) {
      ops->metric_evals += 1;
      ops->table_loads += 2;
    }
    if (metric < best || (metric == best && i < best_index)) {
      best = metric;
      best_index = i;
    }
  }
  if (ops) ops->candidates += candidate_count;
  return best_index;
}

Detector::Detector(const Constellation& c, NoiseModel noise,
                   DetectorKind kind, const kernels::KernelSet& kernel_set)
    : kind_(kind), noise_(noise), kernels_(&kernel_set),
      count_(c.symbols.size()) {
  switch (kind_) {
    case DetectorKind::kEucD: {
      in_phase_.reserve(count_);
      quadrature_.reserve(count_);
      for (const Symbol& s : c.symbols) {
        in_phase_.push_back(s.in_phase);
        quadrature_.push_back(s.quadrature);
      }
      break;
    }
    case DetectorKind::kGapD: {
      if (noise_.sigma_n_sq == 0.0 && noise_.sigma_phi_sq == 0.0) {
        throw Error("DegenerateNoise",
                    "gap-d weights are undefined with zero noise variances");
      }
      require_awgn(noise_);
      amplitude_.reserve(count_);
      phase_.reserve(count_);
      inv_weight_.reserve(count_);
      log_weight_.reserve(count_);
      for (const Symbol& s : c.symbols) {
        const double w = noise_.sigma_phi_sq +
                         noise_.sigma_n_sq / (2.0 * s.amplitude * s.amplitude);
        amplitude_.push_back(s.amplitude);
        phase_.push_back(s.phase);
        inv_weight_.push_back(1.0 / w);
        log_weight_.push_back(std::log(w));
      }
      inv_half_sn2_ = 1.0 / (0.5 * noise_.sigma_n_sq);
      break;
    }
    case DetectorKind::kGpdD: {
      require_awgn(noise_);
      amplitude_.reserve(count_);
      phase_.reserve(count_);
      for (const Symbol& s : c.symbols) {
        amplitude_.push_back(s.amplitude);
        phase_.push_back(s.phase);
      }
      two_inv_sn2_ = 2.0 / noise_.sigma_n_sq;
      break;
    }
    case DetectorKind::kSapskFast: {
      require_awgn(noise_);
      index_ = build_sapsk_index(c);
      break;
    }
  }
  // EUC-D fallback state for |r| = 0, where the GPD-D phase weight is
  // undefined.
  if (kind_ == DetectorKind::kGpdD) {
    in_phase_.reserve(count_);
    quadrature_.reserve(count_);
    for (const Symbol& s : c.symbols) {
      in_phase_.push_back(s.in_phase);
      quadrature_.push_back(s.quadrature);
    }
  }
}

uint32_t Detector::detect(const Received& r) const {
  switch (kind_) {
    case DetectorKind::kEucD:
      return kernels_->eucd(in_phase_.data(), quadrature_.data(), count_,
                            r.in_phase, r.quadrature);
    case DetectorKind::kGapD:
      return kernels_->gapd(amplitude_.data(), phase_.data(),
                            inv_weight_.data(), log_weight_.data(), count_,
                            r.amplitude, r.phase, inv_half_sn2_);
    case DetectorKind::kGpdD: {
      if (r.amplitude == 0.0) {
        return kernels_->eucd(in_phase_.data(), quadrature_.data(), count_,
                              r.in_phase, r.quadrature);
      }
      const double weight_r =
          noise_.sigma_phi_sq +
          noise_.sigma_n_sq / (2.0 * r.amplitude * r.amplitude);
      return kernels_->gpdd(amplitude_.data(), phase_.data(), count_,
                            r.amplitude, r.phase, two_inv_sn2_,
                            1.0 / weight_r);
    }
    case DetectorKind::kSapskFast:
      return detect_sapsk_fast(r, index_, noise_, nullptr, robust_corners_);
  }
  return 0;
}

}  // namespace sapsk
