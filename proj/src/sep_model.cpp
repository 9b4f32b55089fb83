#include "sapsk/sep_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sapsk/error.hpp"

namespace sapsk {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void check_params(const SepModelParams& p) {
  if (p.order < 2) {
    throw Error("InvalidOrder", "constellation order must be at least 2");
  }
  if (p.rings < 1 || p.order % p.rings != 0) {
    throw Error("NonDividingGamma", "ring count must divide the order");
  }
  if (!(p.snr_linear > 0.0) || !std::isfinite(p.snr_linear)) {
    throw Error("InvalidSnr", "snr_linear must be positive and finite");
  }
  if (p.sigma_phi_sq < 0.0) {
    throw Error("InvalidPhaseNoise", "sigma_phi_sq must be nonnegative");
  }
  if (p.rect_count < 1) {
    throw Error("InvalidRectCount", "rect_count must be at least 1");
  }
}

// Staircase sum over the four corner triangles: N inscribed rectangles
// sliced from the far edge, leg division `leg_step`·z along the long axis
// and bounds from edge·(1-D) to edge·B_z across it.
double triangle_sum(uint32_t n, double leg, double edge, double d) {
  double sum = 0.0;
  double q_prev = q_function(0.0);
  const double q_edge = q_function(edge * (1.0 - d));
  for (uint32_t z = 1; z <= n; ++z) {
    const double q_z = q_function(leg * double(z) / double(n));
    const double b_z = d + (1.0 - 2.0 * d) * double(z) / double(n);
    sum += (q_prev - q_z) * (q_edge - q_function(edge * b_z));
    q_prev = q_z;
  }
  return sum;
}

// Same staircase with the literal printed far bound, which takes B_z
// unsquared under the root — i.e. Q(edge·√B_z) — in the phase-axis branch.
double triangle_sum_printed(uint32_t n, double leg, double edge, double d) {
  double sum = 0.0;
  double q_prev = q_function(0.0);
  const double q_edge = q_function(edge * (1.0 - d));
  for (uint32_t z = 1; z <= n; ++z) {
    const double q_z = q_function(leg * double(z) / double(n));
    const double b_z = d + (1.0 - 2.0 * d) * double(z) / double(n);
    const double far = b_z > 0.0 ? edge * std::sqrt(b_z) : 0.0;
    sum += (q_prev - q_z) * (q_edge - q_function(far));
    q_prev = q_z;
  }
  return sum;
}

double ring_error_prob_impl(const RingGeometry& g, uint32_t rect_count,
                            CellOrientation orientation,
                            ModelVariant variant) {
  const double h = 0.5 * g.delta_theta_prime;
  double p_main, p_tri;
  if (orientation == CellOrientation::kAmplitudeAxis) {
    const double d = g.d1;
    double rho_main = g.delta_rho_prime;
    if (variant == ModelVariant::kAsPrinted) {
      // The printed main-rectangle term carries 2Γ²-1 where the spacing
      // formula has 4Γ²-1; reproduce it by rescaling the argument.
      rho_main = g.delta_rho_prime * g.printed_rho_scale;
    }
    p_main = (1.0 - 2.0 * q_function(rho_main)) *
             (1.0 - 2.0 * q_function(h * (1.0 - d)));
    p_tri = triangle_sum(rect_count, g.delta_rho_prime, h, d);
  } else {
    const double d = g.d2;
    p_main = (1.0 - 2.0 * q_function(g.delta_rho_prime * (1.0 - d))) *
             (1.0 - 2.0 * q_function(h));
    p_tri = variant == ModelVariant::kAsPrinted
                ? triangle_sum_printed(rect_count, h, g.delta_rho_prime, d)
                : triangle_sum(rect_count, h, g.delta_rho_prime, d);
  }
  const double p = 1.0 - p_main - 4.0 * p_tri;
  return std::clamp(p, 0.0, 1.0);
}

// Adaptive Simpson quadrature on a smooth integrand.
template <typename F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 48);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.3989422804014326779399460599343819;
}

}  // namespace

double q_function(double x) {
  // Q(x) = erfc(x/√2)/2; erfc from the C math library (rational
  // approximations accurate to a few ulp across the full range), so the
  // result holds ~1e-12 relative error for x ≤ 8 and stays monotone down to
  // the ~1e-300 underflow floor near x ≈ 38.7.
  return 0.5 * std::erfc(x * 0.7071067811865475244008443621048490393);
}

double gamma_threshold(uint32_t order, uint32_t rings, uint32_t q,
                       double sigma_phi_sq) {
  if (sigma_phi_sq == 0.0) {
    throw Error("ZeroPhaseNoise",
                "the orientation threshold diverges at zero phase noise");
  }
  const double m = double(order);
  const double g = double(rings);
  const double odd = double(2 * q - 1);
  const double four_g2_m1 = 4.0 * g * g - 1.0;
  return four_g2_m1 * (odd * odd * kPi * kPi * g * g - 4.0 * m * m) /
         (24.0 * m * m * odd * odd * sigma_phi_sq);
}

RingGeometry ring_geometry(const SepModelParams& params, uint32_t q) {
  check_params(params);
  if (q < 1 || q > params.rings) {
    throw Error("InvalidRing", "ring index out of range");
  }
  const double m = double(params.order);
  const double g = double(params.rings);
  const double odd = double(2 * q - 1);
  const double four_g2_m1 = 4.0 * g * g - 1.0;
  const double gbar = params.snr_linear;

  RingGeometry geo;
  geo.q = q;
  geo.t_q = params.sigma_phi_sq + four_g2_m1 / (6.0 * gbar * odd * odd);
  geo.delta_rho_prime = std::sqrt(24.0 * gbar / four_g2_m1);
  geo.delta_theta_prime = (2.0 * kPi * g / m) / std::sqrt(geo.t_q);
  geo.tan_alpha = geo.delta_theta_prime / (2.0 * geo.delta_rho_prime);
  geo.a_factor = kPi * g * std::sqrt(four_g2_m1) / m;
  const double t2 = geo.tan_alpha * geo.tan_alpha;
  geo.d1 = (t2 + 1.0) / (2.0 * t2);
  geo.d2 = (1.0 + t2) / 2.0;
  geo.printed_rho_scale =
      std::sqrt(four_g2_m1 / (2.0 * g * g - 1.0));  // diagnostic variant only
  if (params.sigma_phi_sq > 0.0) {
    geo.gamma_threshold =
        gamma_threshold(params.order, params.rings, q, params.sigma_phi_sq);
  } else {
    // Threshold diverges; its sign — hence the orientation — is fixed by the
    // geometry factor alone.
    geo.gamma_threshold = odd * kPi * g >= 2.0 * m
                              ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
  }
  // tan α ≥ 1 is algebraically equivalent to γ̄ ≤ γ_q (both compare
  // 24·γ̄·T_q against A²); the tan-α form stays finite at σ_φ² = 0.
  geo.orientation = geo.tan_alpha >= 1.0 ? CellOrientation::kAmplitudeAxis
                                         : CellOrientation::kPhaseAxis;
  if (geo.orientation == CellOrientation::kAmplitudeAxis) {
    geo.r_depth = 0.5 * geo.delta_theta_prime * geo.d1;
    geo.r_width = geo.delta_theta_prime * (1.0 - geo.d1);
  } else {
    geo.r_depth = geo.delta_rho_prime * geo.d2;
    geo.r_width = 2.0 * geo.delta_rho_prime * (1.0 - geo.d2);
  }
  return geo;
}

double ring_error_prob(const SepModelParams& params, uint32_t q,
                       ModelVariant variant) {
  const RingGeometry geo = ring_geometry(params, q);
  return ring_error_prob_impl(geo, params.rect_count, geo.orientation,
                              variant);
}

double ring_error_prob_oriented(const SepModelParams& params, uint32_t q,
                                CellOrientation orientation,
                                ModelVariant variant) {
  const RingGeometry geo = ring_geometry(params, q);
  return ring_error_prob_impl(geo, params.rect_count, orientation, variant);
}

double ring_error_prob_quadrature(const SepModelParams& params, uint32_t q) {
  const RingGeometry geo = ring_geometry(params, q);
  const double h = 0.5 * geo.delta_theta_prime;
  // P(inside hexagon) = 2·∫₀^L φ(t)·(1 - 2Q(cross(t))) dt along the long
  // axis, with the transverse extent shrinking linearly from the apex value
  // D·edge at t = 0 to (1-D)·edge at t = L.
  double inside;
  if (geo.orientation == CellOrientation::kAmplitudeAxis) {
    const double d = geo.d1;
    const double length = geo.delta_rho_prime;
    const auto f = [&](double x) {
      const double ytop = h * (d - (2.0 * d - 1.0) * x / length);
      return normal_pdf(x) * (1.0 - 2.0 * q_function(ytop));
    };
    inside = 2.0 * integrate(f, 0.0, length, 1e-14);
  } else {
    const double d = geo.d2;
    const double length = h;
    const auto f = [&](double y) {
      const double xtop =
          geo.delta_rho_prime * (d - (2.0 * d - 1.0) * y / length);
      return normal_pdf(y) * (1.0 - 2.0 * q_function(xtop));
    };
    inside = 2.0 * integrate(f, 0.0, length, 1e-14);
  }
  return std::clamp(1.0 - inside, 0.0, 1.0);
}

double sep_approx(const SepModelParams& params, ModelVariant variant) {
  check_params(params);
  double sum = 0.0;
  for (uint32_t q = 1; q <= params.rings; ++q) {
    sum += ring_error_prob(params, q, variant);
  }
  return sum / double(params.rings);
}

double error_floor(uint32_t order, uint32_t rings, double sigma_phi_sq) {
  if (!(sigma_phi_sq > 0.0)) {
    throw Error("ZeroPhaseNoise", "the floor formula requires sigma_phi_sq > 0");
  }
  const double argument =
      2.0 * kPi * double(rings) / (double(order) * std::sqrt(sigma_phi_sq));
  return q_function(argument);
}

GammaSearchResult optimize_gamma(uint32_t order, double snr_db,
                                 double sigma_phi_sq, uint32_t rect_count) {
  if (order < 2) {
    throw Error("InvalidOrder", "constellation order must be at least 2");
  }
  const double gbar = std::pow(10.0, snr_db / 10.0);
  GammaSearchResult result;
  for (uint32_t g = 1; g <= order; ++g) {
    if (order % g != 0) continue;
    SepModelParams params{order, g, gbar, sigma_phi_sq, rect_count};
    const double sep = sep_approx(params);
    result.table.push_back({g, sep});
    // Strict improvement keeps the smaller Γ on ties.
    if (result.best_rings == 0 || sep < result.best_sep) {
      result.best_rings = g;
      result.best_sep = sep;
    }
  }
  return result;
}

}  // namespace sapsk
