#include "sapsk/channel.hpp"

#include <cmath>

#include "sapsk/error.hpp"

namespace sapsk {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559005768;
}

double snr_linear(const ChannelParams& params) {
  if (!std::isfinite(params.snr_db)) {
    throw Error("InvalidSnr",
                "snr_db must be finite; use zero_awgn for noiseless runs");
  }
  return std::pow(10.0, params.snr_db / 10.0);
}

double noise_density(const ChannelParams& params) {
  if (params.zero_awgn) return 0.0;
  return params.mean_energy / snr_linear(params);
}

Received make_received(double in_phase, double quadrature) {
  Received r;
  r.in_phase = in_phase;
  r.quadrature = quadrature;
  r.amplitude = std::hypot(in_phase, quadrature);
  r.phase = std::atan2(quadrature, in_phase);
  if (r.phase < 0.0) r.phase += kTwoPi;
  return r;
}

Received transmit(const Symbol& s, const ChannelParams& params,
                  TrialRng& rng) {
  // Fixed draw order is part of the reproducibility contract: AWGN pair
  // first, then the phase-noise draw (second half of its pair discarded).
  const auto [noise_re, noise_im] = rng.next_gaussian_pair();
  const auto [phase_noise, unused] = rng.next_gaussian_pair();
  (void)unused;

  const double sigma_component =
      std::sqrt(0.5 * noise_density(params));  // per-quadrature std dev
  const double sigma_phi = std::sqrt(params.sigma_phi_sq);

  const double rotated = s.phase + sigma_phi * phase_noise;
  const double in_phase =
      s.amplitude * std::cos(rotated) + sigma_component * noise_re;
  const double quadrature =
      s.amplitude * std::sin(rotated) + sigma_component * noise_im;
  return make_received(in_phase, quadrature);
}

}  // namespace sapsk
