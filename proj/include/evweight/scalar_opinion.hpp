#pragma once

// Recipient LR for a reported weight of evidence r = log10(LR_B).
//
// Under each scenario log10(LR_B) ~ Normal(mu, 1/tau) with a Normal-Gamma
// prior on (mu, tau):
//   tau ~ Gamma(shape = n_tau / 2, rate = n_tau / (2 tau0))   (E[tau] = tau0)
//   mu | tau ~ Normal(mu0, 1 / (n_mu tau))
// The predictive of a new observation is Student-t with n_tau degrees of
// freedom, location mu0 and squared scale (n_mu + 1) / (n_mu tau0).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "evweight/core.hpp"

namespace evweight {

struct NormalGammaParams {
  double mu0 = 0.0;
  double n_mu = 1.0;
  double tau0 = 1.0;
  double n_tau = 1.0;

  void validate() const {
    detail::require_finite("mu0", mu0);
    detail::require_positive("n_mu", n_mu);
    detail::require_positive("tau0", tau0);
    detail::require_positive("n_tau", n_tau);
  }
};

/// Prior used for H1 in the worked example: centered at +5, one
/// observation's worth of information on each of mean and precision.
inline NormalGammaParams default_scalar_prior_h1() { return {5.0, 1.0, 0.01, 1.0}; }
inline NormalGammaParams default_scalar_prior_h2() { return {-5.0, 1.0, 0.01, 1.0}; }

/// Sufficient statistics of validation log10 LRs: n, mean and the
/// n-denominator variance.
struct ScalarValidationSummary {
  std::uint64_t n = 0;
  double mean = 0.0;
  double variance = 0.0;

  void validate() const {
    if (n == 0) throw DomainError("validation summary needs n >= 1");
    detail::require_finite("sample mean", mean);
    if (!std::isfinite(variance) || variance < 0.0)
      throw DomainError("sample variance must be finite and nonnegative");
  }

  static ScalarValidationSummary from_values(std::span<const double> values) {
    if (values.empty()) throw DomainError("no validation values");
    ScalarValidationSummary s;
    s.n = values.size();
    double sum = 0.0;
    for (double v : values) {
      detail::require_finite("validation value", v);
      sum += v;
    }
    s.mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(s.n);
    return s;
  }
};

/// Summary of the union of two samples.
inline ScalarValidationSummary pool(const ScalarValidationSummary& a,
                                    const ScalarValidationSummary& b) {
  a.validate();
  b.validate();
  const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
  const double n = na + nb;
  const double mean = (na * a.mean + nb * b.mean) / n;
  const double d = a.mean - b.mean;
  const double ss = na * a.variance + nb * b.variance + na * nb / n * d * d;
  return {a.n + b.n, mean, ss / n};
}

inline NormalGammaParams update_normal_gamma(const NormalGammaParams& prior,
                                             const ScalarValidationSummary& data) {
  prior.validate();
  data.validate();
  const double n = static_cast<double>(data.n);
  const double d = data.mean - prior.mu0;
  NormalGammaParams post;
  post.mu0 = (prior.n_mu * prior.mu0 + n * data.mean) / (prior.n_mu + n);
  post.n_mu = prior.n_mu + n;
  post.n_tau = prior.n_tau + n;
  const double n_tau_over_tau =
      prior.n_tau / prior.tau0 + n * data.variance + prior.n_mu * n * d * d / (prior.n_mu + n);
  post.tau0 = post.n_tau / n_tau_over_tau;
  return post;
}

struct StudentT {
  double df;
  double location;
  double scale;  ///< not squared

  double log_density(double x) const {
    const double z = (x - location) / scale;
    return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
           0.5 * std::log(df * std::numbers::pi) - std::log(scale) -
           0.5 * (df + 1.0) * std::log1p(z * z / df);
  }
};

inline StudentT predictive_t(const NormalGammaParams& params) {
  params.validate();
  return {params.n_tau, params.mu0,
          std::sqrt((params.n_mu + 1.0) / (params.n_mu * params.tau0))};
}

inline double predictive_log_density(const NormalGammaParams& params, double x) {
  detail::require_finite("x", x);
  return predictive_t(params).log_density(x);
}

inline double predictive_density(const NormalGammaParams& params, double x) {
  return std::exp(predictive_log_density(params, x));
}

/// Ratio of the H1 and H2 predictive densities at r (closed form).
inline LrEstimate lr_for_scalar(double r, const NormalGammaParams& h1,
                                const NormalGammaParams& h2) {
  const double log_ratio = predictive_log_density(h1, r) - predictive_log_density(h2, r);
  return LrEstimate::closed_form(log_ratio / detail::kLn10);
}

struct ScalarCurvePoint {
  double r;
  double density_h1;
  double density_h2;
  LrEstimate lr;
};

inline std::vector<ScalarCurvePoint> lr_curve(const NormalGammaParams& h1,
                                              const NormalGammaParams& h2,
                                              std::span<const double> grid) {
  if (grid.empty()) throw DomainError("curve grid must be nonempty");
  std::vector<ScalarCurvePoint> out;
  out.reserve(grid.size());
  for (double r : grid)
    out.push_back({r, predictive_density(h1, r), predictive_density(h2, r),
                   lr_for_scalar(r, h1, h2)});
  return out;
}

/// Summary with n observations sharing a given mean and variance, as used
/// for the synthetic validation sets in the worked example.
inline ScalarValidationSummary synthetic_summary(std::uint64_t n, double mean, double variance) {
  ScalarValidationSummary s{n, mean, variance};
  s.validate();
  return s;
}

}  // namespace evweight
