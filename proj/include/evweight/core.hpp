#pragma once

// Shared domain types and odds algebra for the recipient-LR models.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evweight {

/// Invalid argument: non-finite, out of range, or violating a type invariant.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A relative-frequency LR was requested with a zero denominator rate.
class DegenerateRateError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Rejection sampling accepted too few proposals to be practical.
class IntractableConstraintError : public std::runtime_error {
 public:
  IntractableConstraintError(const std::string& what, double acceptance_rate)
      : std::runtime_error(what), acceptance_rate_(acceptance_rate) {}
  double acceptance_rate() const noexcept { return acceptance_rate_; }

 private:
  double acceptance_rate_;
};

/// Quadrature did not settle within its refinement budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last, double previous)
      : std::runtime_error(what), last_(last), previous_(previous) {}
  double last_estimate() const noexcept { return last_; }
  double previous_estimate() const noexcept { return previous_; }

 private:
  double last_;
  double previous_;
};

namespace detail {

inline void require_finite(std::string_view name, double value) {
  if (!std::isfinite(value))
    throw DomainError(std::string(name) + " must be finite");
}

inline void require_positive(std::string_view name, double value) {
  if (!std::isfinite(value) || !(value > 0.0))
    throw DomainError(std::string(name) + " must be positive and finite");
}

inline double relative_difference(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline constexpr double kLn10 = 2.302585092994045684;

}  // namespace detail

enum class Scenario { H1, H2 };

inline std::string_view to_string(Scenario s) {
  return s == Scenario::H1 ? "H1" : "H2";
}

inline std::optional<Scenario> parse_scenario(std::string_view text) {
  if (text == "H1" || text == "h1") return Scenario::H1;
  if (text == "H2" || text == "h2") return Scenario::H2;
  return std::nullopt;
}

/// Odds of H1 versus H2.
class Odds {
 public:
  explicit Odds(double value) : value_(value) {
    detail::require_positive("odds", value);
  }
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// A likelihood ratio together with how it was obtained.
///
/// Values are carried in log10 internally; `lr` is the linear view of the
/// same number. Monte Carlo estimates additionally carry a standard error
/// (on the linear scale), the number of accepted samples, the acceptance
/// rate of the underlying rejection sampler and the seed.
struct LrEstimate {
  double lr = 1.0;
  double log10_lr = 0.0;
  std::optional<double> mc_std_err;
  std::uint64_t n_samples = 0;
  std::optional<double> acceptance_rate;
  std::optional<std::uint64_t> seed;

  static LrEstimate closed_form(double log10_lr) {
    detail::require_finite("log10 LR", log10_lr);
    LrEstimate e;
    e.log10_lr = log10_lr;
    e.lr = std::pow(10.0, log10_lr);
    return e;
  }

  static LrEstimate monte_carlo(double lr, double std_err, std::uint64_t n,
                                double acceptance, std::uint64_t seed) {
    detail::require_positive("Monte Carlo LR", lr);
    LrEstimate e;
    e.lr = lr;
    e.log10_lr = std::log10(lr);
    e.mc_std_err = std_err;
    e.n_samples = n;
    e.acceptance_rate = acceptance;
    e.seed = seed;
    return e;
  }

  bool from_monte_carlo() const noexcept { return mc_std_err.has_value(); }
};

/// Bayes' rule in odds form.
inline Odds posterior_odds(Odds prior, double lr) {
  detail::require_positive("lr", lr);
  const double post = prior.value() * lr;
  if (!std::isfinite(post)) throw DomainError("posterior odds overflow");
  if (!(post > 0.0)) throw DomainError("posterior odds underflow");
  return Odds(post);
}

inline double odds_to_probability(Odds o) {
  return o.value() / (1.0 + o.value());
}

/// Ratio of two observed conclusion rates, (k1/n1) / (k2/n2).
inline double lr_from_counts(std::uint64_t k1, std::uint64_t n1,
                             std::uint64_t k2, std::uint64_t n2) {
  if (n1 == 0) throw DomainError("n1 must be positive");
  if (n2 == 0) throw DomainError("n2 must be positive");
  if (k1 > n1) throw DomainError("k1 exceeds n1");
  if (k2 > n2) throw DomainError("k2 exceeds n2");
  if (k2 == 0)
    throw DegenerateRateError(
        "denominator rate k2/n2 is zero; use a model-based LR instead");
  return (static_cast<double>(k1) * static_cast<double>(n2)) /
         (static_cast<double>(n1) * static_cast<double>(k2));
}

}  // namespace evweight
