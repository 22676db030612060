#pragma once

// Recipient LR for a reported LR interval [lo, hi].
//
// The interval is reduced to its log10 midpoint m and width w, taken as
// independent under each scenario, so LR = LR(m) * LR(w). The midpoint is
// modelled exactly like a scalar log10 LR. The width is Gamma(alpha, beta)
// with unknown shape and rate under the conjugate prior
//
//   pi(alpha, beta) ∝ p^(alpha-1) exp(-beta q) beta^(alpha s) / Gamma(alpha)^r,
//
// which has no closed-form normalizer, so the predictive density of w is a
// ratio of two 2-D integrals. Multiplying the kernel by Gamma(w | alpha,
// beta) gives the kernel with (p w, q + w, r + 1, s + 1), which is what the
// numerator integrates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "evweight/core.hpp"
#include "evweight/mc.hpp"
#include "evweight/scalar_opinion.hpp"

namespace evweight {

/// Linear-scale LR interval.
struct LrInterval {
  double lo = 1.0;
  double hi = 10.0;
};

struct IntervalSplit {
  double midpoint;  ///< log10 units
  double width;     ///< log10 units, > 0
};

inline IntervalSplit split_log10_interval(double log10_lo, double log10_hi) {
  detail::require_finite("log10_lo", log10_lo);
  detail::require_finite("log10_hi", log10_hi);
  if (!(log10_lo < log10_hi)) throw DomainError("interval needs lo < hi");
  return {0.5 * (log10_lo + log10_hi), log10_hi - log10_lo};
}

inline IntervalSplit split_interval(const LrInterval& iv) {
  detail::require_positive("interval lo", iv.lo);
  detail::require_positive("interval hi", iv.hi);
  if (!(iv.lo < iv.hi)) throw DomainError("interval needs lo < hi");
  return split_log10_interval(std::log10(iv.lo), std::log10(iv.hi));
}

/// Conjugate hyperparameters for a gamma likelihood with unknown shape and
/// rate. p is the running product of observations and is kept as log p.
struct GammaConjParams {
  double log_p = 0.0;
  double q = 1.0;
  double r = 1.0;
  double s = 1.0;

  static GammaConjParams from_p(double p, double q, double r, double s) {
    detail::require_positive("p", p);
    return {std::log(p), q, r, s};
  }

  void validate() const {
    detail::require_finite("log_p", log_p);
    detail::require_positive("q", q);
    detail::require_positive("r", r);
    detail::require_positive("s", s);
  }

  friend bool operator==(const GammaConjParams&, const GammaConjParams&) = default;
};

/// Width prior of the worked example: product 9 and sum 6 over two
/// observations' worth of information.
inline GammaConjParams default_width_prior() { return GammaConjParams::from_p(9.0, 6.0, 2.0, 2.0); }

/// Sufficient statistics of observed widths.
struct WidthSummary {
  std::uint64_t n = 0;
  double sum_log = 0.0;
  double sum = 0.0;

  static WidthSummary from_widths(std::span<const double> widths) {
    if (widths.empty()) throw DomainError("width list must be nonempty");
    WidthSummary s;
    for (double w : widths) {
      detail::require_positive("width", w);
      s.sum_log += std::log(w);
      s.sum += w;
    }
    s.n = widths.size();
    return s;
  }

  /// n widths with geometric mean g and arithmetic mean a.
  static WidthSummary synthetic(std::uint64_t n, double geometric_mean, double arithmetic_mean) {
    detail::require_positive("geometric mean", geometric_mean);
    detail::require_positive("arithmetic mean", arithmetic_mean);
    const double nn = static_cast<double>(n);
    return {n, nn * std::log(geometric_mean), nn * arithmetic_mean};
  }
};

inline GammaConjParams update_gamma_conj(const GammaConjParams& prior, const WidthSummary& data) {
  prior.validate();
  if (data.n == 0) throw DomainError("width summary needs n >= 1");
  detail::require_finite("sum of log widths", data.sum_log);
  detail::require_positive("sum of widths", data.sum);
  const double n = static_cast<double>(data.n);
  return {prior.log_p + data.sum_log, prior.q + data.sum, prior.r + n, prior.s + n};
}

inline GammaConjParams update_gamma_conj(const GammaConjParams& prior,
                                         std::span<const double> widths) {
  return update_gamma_conj(prior, WidthSummary::from_widths(widths));
}

/// Unnormalized log density of (alpha, beta).
inline double log_conj_kernel(const GammaConjParams& g, double alpha, double beta) {
  return (alpha - 1.0) * g.log_p - beta * g.q - g.r * std::lgamma(alpha) +
         alpha * g.s * std::log(beta);
}

/// (shape, rate) in [1e-3, 60]^2 on log-spaced nodes.
inline QuadratureSpec default_width_domain() {
  QuadratureSpec spec;
  spec.a_lo = 1e-3;
  spec.a_hi = 60.0;
  spec.b_lo = 1e-3;
  spec.b_hi = 60.0;
  spec.a_scale = AxisScale::log;
  spec.b_scale = AxisScale::log;
  spec.rel_tol = 1e-9;
  spec.max_refinements = 8;
  spec.initial_panels = 4;
  return spec;
}

namespace detail {

// log of the kernel integrated over beta in (0, inf), per unit log(alpha).
inline double log_alpha_profile(const GammaConjParams& g, double log_alpha) {
  const double a = std::exp(log_alpha);
  return log_alpha + (a - 1.0) * g.log_p + std::lgamma(a * g.s + 1.0) - g.r * std::lgamma(a) -
         (a * g.s + 1.0) * std::log(g.q);
}

}  // namespace detail

/// Narrows `base` to the region holding the posterior mass of `g`, using
/// the analytic beta-marginal of alpha. Returns `base` unchanged when the
/// alpha-marginal peaks on the boundary (e.g. the improper-looking prior).
inline QuadratureSpec fitted_width_domain(const GammaConjParams& g,
                                          QuadratureSpec base = default_width_domain(),
                                          double half_width_sds = 12.0) {
  g.validate();
  base.validate();
  const double u_lo = std::log(base.a_lo), u_hi = std::log(base.a_hi);
  constexpr int kGrid = 4000;
  int best = 0;
  double best_val = -INFINITY;
  for (int i = 0; i <= kGrid; ++i) {
    const double v = detail::log_alpha_profile(g, u_lo + (u_hi - u_lo) * i / kGrid);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (best == 0 || best == kGrid) return base;
  const double h = (u_hi - u_lo) / kGrid;
  const double u_star = u_lo + h * best;
  const double curv = (detail::log_alpha_profile(g, u_star + h) - 2.0 * best_val +
                       detail::log_alpha_profile(g, u_star - h)) /
                      (h * h);
  if (!(curv < 0.0)) return base;
  const double sd_u = std::max(1.0 / std::sqrt(-curv), h);

  QuadratureSpec spec = base;
  spec.a_lo = std::max(base.a_lo, std::exp(u_star - half_width_sds * sd_u));
  spec.a_hi = std::min(base.a_hi, std::exp(u_star + half_width_sds * sd_u));
  // beta | alpha ~ Gamma(alpha s + 1, q) on the log axis.
  const double shape_lo = spec.a_lo * g.s + 1.0;
  const double shape_hi = spec.a_hi * g.s + 1.0;
  spec.b_lo = std::max(base.b_lo, shape_lo / g.q * std::exp(-half_width_sds / std::sqrt(shape_lo)));
  spec.b_hi = std::min(base.b_hi, shape_hi / g.q * std::exp(half_width_sds / std::sqrt(shape_hi)));
  if (!(spec.b_lo < spec.b_hi)) return base;
  return spec;
}

struct LogIntegral {
  double log_value;
  double boundary_mass_fraction;
};

/// log of the kernel integral over the spec's rectangle.
inline LogIntegral log_kernel_integral(const GammaConjParams& g, const QuadratureSpec& spec) {
  g.validate();
  spec.validate();
  // Scale by the kernel's maximum along the conditional beta mode so the
  // integrand stays in floating-point range.
  double offset = -INFINITY;
  constexpr int kProbe = 2000;
  const double u_lo = std::log(spec.a_lo), u_hi = std::log(spec.a_hi);
  for (int i = 0; i <= kProbe; ++i) {
    const double a = std::exp(u_lo + (u_hi - u_lo) * i / kProbe);
    const double b = std::clamp(a * g.s / g.q, spec.b_lo, spec.b_hi);
    offset = std::max(offset, log_conj_kernel(g, a, b));
  }
  auto f = [&](double a, double b) { return std::exp(log_conj_kernel(g, a, b) - offset); };
  const Quadrature2dResult r = integrate_2d_detailed(f, spec);
  if (!(r.value > 0.0)) throw DomainError("conjugate kernel has no mass on the quadrature domain");
  return {offset + std::log(r.value), r.boundary_mass_fraction};
}

/// Predictive density of the width under fixed hyperparameters, with the
/// normalizer computed once at construction. Immutable after construction,
/// so concurrent readers are safe.
class WidthPredictive {
 public:
  WidthPredictive(GammaConjParams params, QuadratureSpec spec, bool strict_boundary = false)
      : params_(params), spec_(spec) {
    const LogIntegral z = log_kernel_integral(params_, spec_);
    log_normalizer_ = z.log_value;
    boundary_mass_fraction_ = z.boundary_mass_fraction;
    if (strict_boundary && boundary_mass_fraction_ >= kBoundaryTolerance)
      throw ConvergenceError("conjugate mass reaches the quadrature boundary",
                             boundary_mass_fraction_, kBoundaryTolerance);
  }

  static constexpr double kBoundaryTolerance = 1e-6;

  const GammaConjParams& params() const { return params_; }
  const QuadratureSpec& spec() const { return spec_; }
  double log_normalizer() const { return log_normalizer_; }
  double boundary_mass_fraction() const { return boundary_mass_fraction_; }

  double log_density(double w) const {
    detail::require_positive("width", w);
    const GammaConjParams shifted{params_.log_p + std::log(w), params_.q + w, params_.r + 1.0,
                                  params_.s + 1.0};
    return log_kernel_integral(shifted, spec_).log_value - log_normalizer_;
  }

  double density(double w) const { return std::exp(log_density(w)); }

 private:
  GammaConjParams params_;
  QuadratureSpec spec_;
  double log_normalizer_ = 0.0;
  double boundary_mass_fraction_ = 0.0;
};

inline double width_predictive_density(const GammaConjParams& params, double w,
                                       const QuadratureSpec& spec) {
  return WidthPredictive(params, spec).density(w);
}

struct IntervalLr {
  LrEstimate total;
  LrEstimate midpoint;  ///< LR(m)
  LrEstimate width;     ///< LR(w)
};

inline IntervalLr lr_for_interval(const IntervalSplit& split, const NormalGammaParams& mid_h1,
                                  const NormalGammaParams& mid_h2, const WidthPredictive& width_h1,
                                  const WidthPredictive& width_h2) {
  IntervalLr out;
  out.midpoint = lr_for_scalar(split.midpoint, mid_h1, mid_h2);
  const double log_w = width_h1.log_density(split.width) - width_h2.log_density(split.width);
  out.width = LrEstimate::closed_form(log_w / detail::kLn10);
  out.total = LrEstimate::closed_form(out.midpoint.log10_lr + out.width.log10_lr);
  return out;
}

inline IntervalLr lr_for_interval(const LrInterval& iv, const NormalGammaParams& mid_h1,
                                  const NormalGammaParams& mid_h2, const GammaConjParams& width_h1,
                                  const GammaConjParams& width_h2, const QuadratureSpec& spec) {
  return lr_for_interval(split_interval(iv), mid_h1, mid_h2, WidthPredictive(width_h1, spec),
                         WidthPredictive(width_h2, spec));
}

struct WidthCurvePoint {
  double w;
  double density_h1;
  double density_h2;
  LrEstimate lr_w;
};

inline std::vector<WidthCurvePoint> width_curve(const WidthPredictive& h1, const WidthPredictive& h2,
                                                std::span<const double> grid) {
  if (grid.empty()) throw DomainError("width grid must be nonempty");
  std::vector<WidthCurvePoint> out;
  out.reserve(grid.size());
  for (double w : grid) {
    const double l1 = h1.log_density(w);
    const double l2 = h2.log_density(w);
    out.push_back({w, std::exp(l1), std::exp(l2), LrEstimate::closed_form((l1 - l2) / detail::kLn10)});
  }
  return out;
}

}  // namespace evweight
