#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sapsk/constellation.hpp"
#include "sapsk/detectors.hpp"

// Monte Carlo SEP estimation with reproducible parallelism.
//
// Trial t of curve point p draws all of its randomness from the counter-based
// substream (seed, p, t): one uniform for the transmitted symbol, one
// Gaussian pair for the AWGN, one Gaussian draw for the phase noise.  Early
// stopping is quantized to fixed 65536-trial chunks: the run ends at the
// first chunk boundary where the error count over trials [0, boundary)
// reaches target_errors (or at max_trials).  Workers claim chunks atomically
// and their counts are folded in trial order, so the estimate is
// byte-identical for every worker count.

namespace sapsk {

struct SimPlan {
  ConstellationSpec constellation;
  DetectorKind detector = DetectorKind::kGapD;
  double sigma_phi_sq = 0.0;
  std::vector<double> snr_grid_db;   // ascending
  uint64_t seed = 1;
  uint64_t target_errors = 200;      // 0 disables early stopping
  uint64_t max_trials = 20'000'000;
  double confidence = 0.95;
  uint32_t workers = 0;              // 0 = all hardware threads
  bool robust_fast = false;          // 4-corner diagnostic fast detector
  // Noiseless channel (σ_n² forced to 0, never an infinite-SNR limit).
  // Only the geometric detector accepts a zero-AWGN noise model.
  bool zero_awgn = false;
};

struct SepPoint {
  double snr_db = 0.0;
  double sep = 0.0;
  double ci_half_width = 0.0;
  uint64_t trials = 0;
  uint64_t errors = 0;
  // Below 20 errors the normal approximation is replaced by an exact
  // binomial interval, reported as the symmetric half-width that covers it.
  bool exact_interval = false;
};

struct SepCurve {
  SimPlan plan;
  std::vector<SepPoint> points;
};

// One SNR point on substream point_index.  simulate_curve numbers the grid
// points 0, 1, 2, ... in grid order.
SepPoint simulate_point(const SimPlan& plan, double snr_db,
                        uint32_t point_index);
SepCurve simulate_curve(const SimPlan& plan);

// Fraction of identical decisions between two detectors on shared noise
// realizations (same substreams, same received samples).
double agreement_rate(const ConstellationSpec& spec, DetectorKind first,
                      DetectorKind second, double snr_db, double sigma_phi_sq,
                      uint64_t trials, uint64_t seed);

// Plain-text exports: `snr_db sep` rows, extended adds
// `ci_half_width errors trials`.  No header; the CLI prepends one.
std::string curve_rows(const SepCurve& curve, bool extended);

// Run manifest: the full resolved plan and stopping rule, `# `-prefixed.
std::string curve_manifest(const SepCurve& curve);

namespace detail {

inline constexpr uint64_t kChunkTrials = 65536;

struct StopResult {
  uint64_t trials = 0;
  uint64_t errors = 0;
};

// The chunked deterministic stopping engine.  errors_in_range(first, count)
// must be a pure function of the trial indices it is given.
StopResult run_chunked(uint64_t target_errors, uint64_t max_trials,
                       uint32_t workers,
                       const std::function<uint64_t(uint64_t, uint64_t)>&
                           errors_in_range);

// Φ⁻¹(p) for the CI z-value (rational approximation, |rel| < 1.2e-9).
double normal_quantile(double p);

// Exact (Clopper-Pearson) binomial confidence bounds on p given `errors`
// successes in `trials`, via log-space CDF bisection.
std::pair<double, double> binomial_interval(uint64_t errors, uint64_t trials,
                                            double confidence);

}  // namespace detail

}  // namespace sapsk
