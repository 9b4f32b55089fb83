#pragma once

#include "sapsk/constellation.hpp"
#include "sapsk/rng.hpp"

// Memoryless AWGN + Gaussian phase noise channel:
//
//   r = |s|·e^{j(φ + arg s)} + n
//
// with φ ~ N(0, σ_φ²) drawn independently per symbol and n complex Gaussian
// with total variance σ_n² = N₀ = E_s / 10^{snr_db/10} (σ_n²/2 per
// quadrature component).  Infinite SNR is not accepted; noiseless runs set
// zero_awgn explicitly so IEEE infinities never enter N₀.

namespace sapsk {

struct ChannelParams {
  double snr_db = 0.0;
  double sigma_phi_sq = 0.0;  // rad²
  double mean_energy = 1.0;   // E_s
  bool zero_awgn = false;     // force σ_n² = 0 (exact pass-through of n)
};

// γ̄ = E_s/N₀ = 10^{snr_db/10}.
double snr_linear(const ChannelParams& params);

// N₀ = σ_n² (0 when zero_awgn).
double noise_density(const ChannelParams& params);

struct Received {
  double in_phase;
  double quadrature;
  double amplitude;
  double phase;  // radians in [0, 2π)
};

Received make_received(double in_phase, double quadrature);

// One channel use.  Consumes exactly two Gaussian pairs from `rng`, in this
// order: (n_re, n_im), then (φ, discarded) — the layout the reproducibility
// tests pin down.
Received transmit(const Symbol& s, const ChannelParams& params, TrialRng& rng);

}  // namespace sapsk
