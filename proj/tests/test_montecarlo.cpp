#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sapsk/constellation.hpp"
#include "sapsk/detectors.hpp"
#include "sapsk/error.hpp"
#include "sapsk/montecarlo.hpp"
#include "sapsk/sep_model.hpp"

using namespace sapsk;

namespace {

// Deterministic per-trial coin: splits the trial index through an integer
// hash so every chunk sees an i.i.d.-looking error pattern with a known rate.
uint64_t hash_trial(uint64_t t) {
  uint64_t x = t * 0x9E3779B97F4A7C15ull;
  x ^= x >> 32;
  x *= 0xD6E8FEB86659FD93ull;
  x ^= x >> 32;
  return x;
}

auto rigged_coin(double p) {
  const auto threshold = uint64_t(p * 18446744073709551616.0);
  return [threshold](uint64_t first, uint64_t count) -> uint64_t {
    uint64_t errors = 0;
    for (uint64_t t = first; t < first + count; ++t) {
      errors += hash_trial(t) < threshold;
    }
    return errors;
  };
}

// Serial reference for the chunked stopping rule.
detail::StopResult stop_reference(uint64_t target, uint64_t max_trials,
                                  const std::function<uint64_t(uint64_t,
                                                               uint64_t)>& fn) {
  detail::StopResult r;
  uint64_t done = 0, errors = 0;
  while (done < max_trials) {
    const uint64_t count = std::min(detail::kChunkTrials, max_trials - done);
    errors += fn(done, count);
    done += count;
    if (target != 0 && errors >= target) break;
  }
  r.trials = done;
  r.errors = errors;
  return r;
}

SimPlan base_plan() {
  SimPlan plan;
  plan.constellation = {Family::kSapsk, 64, 8, 1.0};
  plan.detector = DetectorKind::kGapD;
  plan.sigma_phi_sq = 1e-3;
  plan.snr_grid_db = {14.0, 18.0, 22.0};
  plan.seed = 11;
  plan.target_errors = 400;
  plan.max_trials = 400000;
  plan.workers = 1;
  return plan;
}

}  // namespace

TEST_CASE("chunked stopping matches the serial reference for any workers") {
  const struct {
    double p;
    uint64_t target, max_trials;
  } cases[] = {
      {3e-3, 250, 1000000},   // stops mid-run
      {1e-6, 250, 400000},    // never reaches the target
      {0.2, 0, 200000},       // early stopping disabled
      {0.5, 100, 70000},      // max_trials not a chunk multiple
      {1e-3, 50, 65536},      // exactly one chunk
  };
  for (const auto& k : cases) {
    CAPTURE(k.p);
    CAPTURE(k.target);
    const auto fn = rigged_coin(k.p);
    const detail::StopResult expect =
        stop_reference(k.target, k.max_trials, fn);
    for (uint32_t workers : {1u, 2u, 8u}) {
      CAPTURE(workers);
      const detail::StopResult got =
          detail::run_chunked(k.target, k.max_trials, workers, fn);
      CHECK(got.trials == expect.trials);
      CHECK(got.errors == expect.errors);
    }
  }
}

TEST_CASE("stopping is quantized to chunk boundaries") {
  // All 150 errors sit inside the first chunk: a target of 100 is reached at
  // the first boundary, with every error before it counted.
  const auto front_loaded = [](uint64_t first, uint64_t count) -> uint64_t {
    uint64_t errors = 0;
    for (uint64_t t = first; t < first + count; ++t) errors += t < 150;
    return errors;
  };
  const detail::StopResult stopped =
      detail::run_chunked(100, 1000000, 4, front_loaded);
  CHECK(stopped.trials == detail::kChunkTrials);
  CHECK(stopped.errors == 150);
  // An unreachable target runs the full budget.
  const detail::StopResult full =
      detail::run_chunked(151, 200000, 4, front_loaded);
  CHECK(full.trials == 200000);
  CHECK(full.errors == 150);
}

TEST_CASE("rigged coin estimates land inside their confidence interval") {
  const double p = 7e-3;
  const detail::StopResult stopped =
      detail::run_chunked(300, 2000000, 2, rigged_coin(p));
  REQUIRE(stopped.errors >= 300);
  const double estimate = double(stopped.errors) / double(stopped.trials);
  const double se = std::sqrt(estimate * (1.0 - estimate) /
                              double(stopped.trials));
  CHECK(std::abs(estimate - p) < 3.5 * se);
}

TEST_CASE("normal quantile values") {
  CHECK(detail::normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0));
  CHECK(detail::normal_quantile(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-8));
  CHECK(detail::normal_quantile(0.995) ==
        doctest::Approx(2.5758293035489004).epsilon(1e-8));
  CHECK(detail::normal_quantile(0.1) ==
        doctest::Approx(-detail::normal_quantile(0.9)).epsilon(1e-8));
  CHECK_THROWS_AS((void)detail::normal_quantile(0.0), Error);
  CHECK_THROWS_AS((void)detail::normal_quantile(1.0), Error);
}

TEST_CASE("exact binomial bounds") {
  const auto close = [](std::pair<double, double> got, double lo, double up) {
    CHECK(got.first == doctest::Approx(lo).scale(1.0).epsilon(1e-9));
    CHECK(got.second == doctest::Approx(up).scale(1.0).epsilon(1e-9));
  };
  close(detail::binomial_interval(0, 100, 0.95), 0.0, 0.03621669264517643);
  close(detail::binomial_interval(5, 100, 0.95), 0.01643187918204711,
        0.1128349111054629);
  close(detail::binomial_interval(3, 50, 0.95), 0.012548587835335,
        0.1654819466037735);
  close(detail::binomial_interval(1, 20, 0.95), 0.001265089497949873,
        0.2487327627720276);
  // Stable at simulation scale.
  close(detail::binomial_interval(19, 1000000, 0.95), 1.143927871413708e-05,
        2.967069526307875e-05);
  // Degenerate edges.
  const auto all = detail::binomial_interval(10, 10, 0.95);
  CHECK(all.second == 1.0);
  CHECK(all.first > 0.6);
}

TEST_CASE("noiseless plan yields zero errors across the full budget") {
  SimPlan plan = base_plan();
  plan.detector = DetectorKind::kEucD;
  plan.sigma_phi_sq = 0.0;
  plan.zero_awgn = true;
  plan.target_errors = 10;
  plan.max_trials = 100000;
  const SepPoint point = simulate_point(plan, 40.0, 0);
  CHECK(point.errors == 0);
  CHECK(point.trials == 100000);  // no early exit without errors
  CHECK(point.sep == 0.0);
  CHECK(point.exact_interval);
  CHECK(point.ci_half_width > 0.0);  // the upper bound stays informative
  CHECK(point.ci_half_width < 1e-4);
}

TEST_CASE("phase-error rate of a single ring matches the classical tail") {
  // 8 symbols on one ring, no phase noise: the exact-index error rate obeys
  // the two-sided Gaussian tail approximation at high SNR.
  SimPlan plan;
  plan.constellation = {Family::kSapsk, 8, 1, 1.0};
  plan.detector = DetectorKind::kEucD;
  plan.sigma_phi_sq = 0.0;
  plan.snr_grid_db = {18.0};
  plan.seed = 3;
  plan.target_errors = 0;
  plan.max_trials = 2000000;
  plan.workers = 1;
  const SepPoint point = simulate_point(plan, 18.0, 0);
  const double snr = std::pow(10.0, 1.8);
  const double expected =
      2.0 * q_function(std::sqrt(2.0 * snr) *
                       std::sin(3.141592653589793 / 8.0));
  const double se = std::sqrt(expected * (1.0 - expected) /
                              double(point.trials));
  CHECK(std::abs(point.sep - expected) < 3.0 * se);
}

TEST_CASE("simulated points are invariant to the worker count") {
  SimPlan plan = base_plan();
  plan.target_errors = 20000;  // several chunks deep at this error rate
  SepPoint reference;
  for (uint32_t workers : {1u, 2u, 8u}) {
    plan.workers = workers;
    const SepPoint point = simulate_point(plan, 22.0, 0);
    REQUIRE(point.trials > detail::kChunkTrials);  // folding actually crossed
    if (workers == 1u) {
      reference = point;
      continue;
    }
    CHECK(point.sep == reference.sep);  // bit-exact
    CHECK(point.trials == reference.trials);
    CHECK(point.errors == reference.errors);
    CHECK(point.ci_half_width == reference.ci_half_width);
  }
}

TEST_CASE("identical plans give byte-identical exports") {
  const SimPlan plan = base_plan();
  const SepCurve a = simulate_curve(plan);
  const SepCurve b = simulate_curve(plan);
  CHECK(curve_rows(a, true) == curve_rows(b, true));
  CHECK(curve_manifest(a) == curve_manifest(b));
}

TEST_CASE("curves order points by the grid and tighten with snr") {
  const SepCurve curve = simulate_curve(base_plan());
  REQUIRE(curve.points.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(curve.points[i].snr_db == curve.plan.snr_grid_db[i]);
    CHECK(curve.points[i].sep >= 0.0);
    CHECK(curve.points[i].sep <= 1.0);
  }
  CHECK(curve.points.front().sep > curve.points.back().sep);
}

TEST_CASE("interval style switches at twenty errors") {
  SimPlan plan = base_plan();
  plan.target_errors = 300;
  const SepPoint busy = simulate_point(plan, 14.0, 0);
  REQUIRE(busy.errors >= 20);
  CHECK_FALSE(busy.exact_interval);
  const double z = detail::normal_quantile(0.5 * (1.0 + plan.confidence));
  CHECK(busy.ci_half_width ==
        doctest::Approx(z * std::sqrt(busy.sep * (1.0 - busy.sep) /
                                      double(busy.trials)))
            .epsilon(1e-12));
  plan.max_trials = 65536;
  plan.target_errors = 0;
  const SepPoint quiet = simulate_point(plan, 40.0, 0);
  REQUIRE(quiet.errors < 20);
  CHECK(quiet.exact_interval);
}

TEST_CASE("export formats parse back") {
  const SepCurve curve = simulate_curve(base_plan());
  SUBCASE("plain rows") {
    std::istringstream rows(curve_rows(curve, false));
    std::string line;
    size_t count = 0;
    while (std::getline(rows, line)) {
      double snr = 0, sep = -1;
      CHECK(std::sscanf(line.c_str(), "%lf %lf", &snr, &sep) == 2);
      CHECK(snr == curve.points[count].snr_db);
      CHECK(sep == doctest::Approx(curve.points[count].sep).epsilon(1e-9));
      ++count;
    }
    CHECK(count == curve.points.size());
  }
  SUBCASE("extended rows") {
    std::istringstream rows(curve_rows(curve, true));
    std::string line;
    size_t count = 0;
    while (std::getline(rows, line)) {
      double snr = 0, sep = -1, ci = -1;
      unsigned long long errors = 0, trials = 0;
      int exact = -1;
      CHECK(std::sscanf(line.c_str(), "%lf %lf %lf %llu %llu %d", &snr, &sep,
                        &ci, &errors, &trials, &exact) == 6);
      CHECK(errors == curve.points[count].errors);
      CHECK(trials == curve.points[count].trials);
      CHECK((exact == 0 || exact == 1));
      ++count;
    }
    CHECK(count == curve.points.size());
  }
  SUBCASE("manifest lines are all comments and carry the plan") {
    const std::string manifest = curve_manifest(curve);
    std::istringstream lines(manifest);
    std::string line;
    while (std::getline(lines, line)) {
      REQUIRE(!line.empty());
      CHECK(line[0] == '#');
    }
    CHECK(manifest.find("# family sapsk") != std::string::npos);
    CHECK(manifest.find("# detector gapd") != std::string::npos);
    CHECK(manifest.find("# seed 11") != std::string::npos);
    CHECK(manifest.find("# snr_grid_db 14 18 22") != std::string::npos);
  }
}

TEST_CASE("agreement rate is exactly one for identical metrics") {
  const ConstellationSpec spec{Family::kSapsk, 64, 8, 1.0};
  CHECK(agreement_rate(spec, DetectorKind::kGapD, DetectorKind::kGapD, 20.0,
                       1e-3, 50000, 5) == 1.0);
  // On a single ring the two weighted metrics share their argmin.
  const ConstellationSpec ring{Family::kSapsk, 16, 1, 1.0};
  CHECK(agreement_rate(ring, DetectorKind::kGapD, DetectorKind::kGpdD, 12.0,
                       1e-2, 50000, 5) == 1.0);
}

TEST_CASE("weighted metrics agree almost everywhere at scale") {
  const ConstellationSpec spec{Family::kSapsk, 4096, 512, 1.0};
  const double rate = agreement_rate(spec, DetectorKind::kGapD,
                                     DetectorKind::kGpdD, 50.0, 1e-4, 65536,
                                     7);
  CHECK(rate > 0.995);
}

TEST_CASE("plan validation rejects inconsistent budgets") {
  SimPlan plan = base_plan();
  plan.max_trials = 0;
  CHECK_THROWS_AS((void)simulate_point(plan, 20.0, 0), Error);
  plan = base_plan();
  plan.target_errors = 1000;
  plan.max_trials = 999;
  CHECK_THROWS_AS((void)simulate_point(plan, 20.0, 0), Error);
  plan = base_plan();
  plan.confidence = 1.0;
  CHECK_THROWS_AS((void)simulate_point(plan, 20.0, 0), Error);
  plan = base_plan();
  plan.snr_grid_db = {};
  CHECK_THROWS_AS((void)simulate_curve(plan), Error);
}
