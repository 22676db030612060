#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "evweight/mc.hpp"
#include "evweight/scalar_opinion.hpp"

using namespace evweight;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

const NormalGammaParams kH1 = default_scalar_prior_h1();
const NormalGammaParams kH2 = default_scalar_prior_h2();

void expect_params_near(const NormalGammaParams& a, const NormalGammaParams& b, double rel) {
  EXPECT_LE(detail::relative_difference(a.mu0, b.mu0), rel);
  EXPECT_LE(detail::relative_difference(a.n_mu, b.n_mu), rel);
  EXPECT_LE(detail::relative_difference(a.tau0, b.tau0), rel);
  EXPECT_LE(detail::relative_difference(a.n_tau, b.n_tau), rel);
}

// Monte Carlo blend of normals: tau from its gamma prior, mu given tau,
// then the normal density at x averaged over draws.
std::pair<double, double> blended_density(const NormalGammaParams& p, double x, std::size_t n,
                                          std::uint64_t seed) {
  RngStream rng(seed);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = sample_gamma(p.n_tau / 2.0, p.n_tau / (2.0 * p.tau0), rng);
    const double mu = p.mu0 + rng.normal() / std::sqrt(p.n_mu * tau);
    const double z = x - mu;
    const double d = std::sqrt(tau / (2.0 * std::numbers::pi)) * std::exp(-0.5 * tau * z * z);
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / n;
  return {mean, std::sqrt((sum2 / n - mean * mean) / n)};
}

// Whole-line integral through x = loc + scale * tan(theta).
double total_mass(const NormalGammaParams& p) {
  const double scale = std::sqrt((p.n_mu + 1.0) / (p.n_mu * p.tau0));
  auto f = [&](double theta) {
    const double c = std::cos(theta);
    return predictive_density(p, p.mu0 + scale * std::tan(theta)) * scale / (c * c);
  };
  const double h = std::numbers::pi / 2.0;
  return GK::integrate(f, -h, h, 20, 1e-13);
}

}  // namespace

TEST(UpdateNormalGamma, SingleDegenerateObservation) {
  const auto post = update_normal_gamma(kH1, synthetic_summary(1, 5.0, 0.0));
  EXPECT_DOUBLE_EQ(post.mu0, 5.0);
  EXPECT_DOUBLE_EQ(post.n_mu, 2.0);
  EXPECT_DOUBLE_EQ(post.n_tau, 2.0);
  EXPECT_NEAR(post.tau0, 0.02, 1e-15);
}

TEST(UpdateNormalGamma, DisplayedEquations) {
  const auto post = update_normal_gamma(kH1, synthetic_summary(100, 8.0, 25.0));
  EXPECT_NEAR(post.mu0, 805.0 / 101.0, 1e-13);
  EXPECT_DOUBLE_EQ(post.n_mu, 101.0);
  EXPECT_DOUBLE_EQ(post.n_tau, 101.0);
  EXPECT_NEAR(post.n_tau / post.tau0, 100.0 + 2500.0 + 100.0 * 9.0 / 101.0, 1e-10);
}

TEST(UpdateNormalGamma, MatchesNumericalPosterior) {
  // Posterior moments from prior x likelihood on a (mu, log tau) grid:
  // E[mu] = mu*, E[tau] = tau*, E[tau (mu - mu*)^2] = 1 / n_mu*,
  // Var[tau] = 2 tau*^2 / n_tau*.
  const NormalGammaParams prior{5.0, 1.0, 0.01, 1.0};
  const std::uint64_t n = 100;
  const double ybar = 8.0, s2 = 25.0;
  auto log_joint = [&](double mu, double tau) {
    const double a = prior.n_tau / 2.0 + 0.5 + n / 2.0 - 1.0;
    return a * std::log(tau) - tau * prior.n_tau / (2.0 * prior.tau0) -
           0.5 * prior.n_mu * tau * (mu - prior.mu0) * (mu - prior.mu0) -
           0.5 * tau * (n * s2 + n * (ybar - mu) * (ybar - mu));
  };
  const double shift = log_joint(ybar, 1.0 / s2);
  auto moment = [&](auto g) {
    auto over_tau = [&](double log_tau) {
      const double tau = std::exp(log_tau);
      auto over_mu = [&](double mu) { return g(mu, tau) * std::exp(log_joint(mu, tau) - shift); };
      return tau * GK::integrate(over_mu, ybar - 15.0, ybar + 15.0, 12, 1e-12);
    };
    return GK::integrate(over_tau, std::log(1e-4), std::log(10.0), 12, 1e-12);
  };
  const double z = moment([](double, double) { return 1.0; });
  const double e_mu = moment([](double mu, double) { return mu; }) / z;
  const double e_tau = moment([](double, double tau) { return tau; }) / z;
  const double e_tau2 = moment([](double, double tau) { return tau * tau; }) / z;
  const double e_spread =
      moment([&](double mu, double tau) { return tau * (mu - e_mu) * (mu - e_mu); }) / z;

  const auto post = update_normal_gamma(prior, synthetic_summary(n, ybar, s2));
  EXPECT_NEAR(e_mu, post.mu0, 1e-8);
  EXPECT_NEAR(e_tau / post.tau0, 1.0, 1e-8);
  EXPECT_NEAR(1.0 / e_spread, post.n_mu, 1e-6);
  EXPECT_NEAR(2.0 * e_tau * e_tau / (e_tau2 - e_tau * e_tau), post.n_tau, 1e-5);
}

TEST(UpdateNormalGamma, SequentialEqualsPooled) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> loc(-20.0, 20.0), pos(0.05, 10.0);
  std::uniform_int_distribution<int> count(1, 200);
  for (int i = 0; i < 100; ++i) {
    const NormalGammaParams prior{loc(gen), pos(gen), pos(gen) / 10.0, pos(gen)};
    std::vector<double> xa(count(gen)), xb(count(gen));
    const double spread = pos(gen);
    for (double& x : xa) x = loc(gen) * spread / 10.0;
    for (double& x : xb) x = loc(gen) * spread / 10.0 + 3.0;
    const auto a = ScalarValidationSummary::from_values(xa);
    const auto b = ScalarValidationSummary::from_values(xb);
    const auto seq = update_normal_gamma(update_normal_gamma(prior, a), b);
    const auto once = update_normal_gamma(prior, pool(a, b));
    expect_params_near(seq, once, 1e-10);
  }
}

TEST(UpdateNormalGamma, InvalidInputs) {
  EXPECT_THROW(update_normal_gamma(kH1, ScalarValidationSummary{0, 0.0, 0.0}), DomainError);
  EXPECT_THROW(update_normal_gamma(kH1, ScalarValidationSummary{3, 0.0, -1.0}), DomainError);
  EXPECT_THROW(update_normal_gamma({0.0, 0.0, 1.0, 1.0}, synthetic_summary(1, 0.0, 0.0)), DomainError);
  EXPECT_THROW(ScalarValidationSummary::from_values(std::vector<double>{}), DomainError);
}

TEST(ValidationSummary, BiasedVariance) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 6.0};
  const auto s = ScalarValidationSummary::from_values(xs);
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.variance, (4.0 + 1.0 + 0.0 + 9.0) / 4.0);
}

TEST(PredictiveDensity, CenterOfPrior) {
  const double expected = 1.0 / (std::numbers::pi * std::sqrt(200.0));
  EXPECT_NEAR(predictive_density(kH1, 5.0), expected, 1e-15);
  const auto [mc, se] = blended_density(kH1, 5.0, 400000, 1);
  EXPECT_NEAR(mc, expected, 3.0 * se);
}

TEST(PredictiveDensity, MatchesMonteCarloBlend) {
  const NormalGammaParams post = update_normal_gamma(kH1, synthetic_summary(20, 7.0, 9.0));
  for (double x : {-3.0, 4.0, 7.5, 15.0}) {
    const auto [mc, se] = blended_density(post, x, 200000, static_cast<std::uint64_t>(x * 10 + 100));
    EXPECT_NEAR(predictive_density(post, x), mc, 3.0 * se) << "x = " << x;
  }
}

TEST(PredictiveDensity, Symmetric) {
  for (double d : {1.0, 5.0, 20.0})
    EXPECT_DOUBLE_EQ(predictive_density(kH1, 5.0 + d), predictive_density(kH1, 5.0 - d));
}

TEST(PredictiveDensity, HeavyTailsOnFiniteWindow) {
  auto f = [](double x) { return predictive_density(kH1, x); };
  const double mass = GK::integrate(f, -200.0, 200.0, 15, 1e-12);
  EXPECT_GE(mass, 0.95);
  EXPECT_LT(mass, 0.99);
}

TEST(PredictiveDensity, IntegratesToOne) {
  EXPECT_NEAR(total_mass(kH1), 1.0, 1e-6);
  EXPECT_NEAR(total_mass(update_normal_gamma(kH2, synthetic_summary(1000, -12.5, 25.0))), 1.0, 1e-6);
  EXPECT_NEAR(total_mass({0.3, 0.2, 4.0, 3.0}), 1.0, 1e-6);
}

TEST(LrForScalar, PriorOnlyAtNine) {
  const auto lr = lr_for_scalar(9.0, kH1, kH2);
  EXPECT_NEAR(lr.lr, (1.0 + 196.0 / 200.0) / (1.0 + 16.0 / 200.0), 1e-12);
  EXPECT_FALSE(lr.from_monte_carlo());
  EXPECT_EQ(lr.n_samples, 0u);
}

TEST(LrForScalar, MirrorSymmetry) {
  EXPECT_DOUBLE_EQ(lr_for_scalar(0.0, kH1, kH2).lr, 1.0);
  for (double r : {-7.0, 0.5, 9.0, 33.0})
    EXPECT_NEAR(lr_for_scalar(r, kH1, kH2).log10_lr + lr_for_scalar(r, kH2, kH1).log10_lr, 0.0, 1e-15);
}

TEST(LrForScalar, AfterLargeValidation) {
  const auto h1 = update_normal_gamma(kH1, synthetic_summary(1000, 8.0, 25.0));
  const auto h2 = update_normal_gamma(kH2, synthetic_summary(1000, -12.5, 25.0));
  const auto lr = lr_for_scalar(8.0, h1, h2);
  EXPECT_GT(lr.lr, 1e3);
  // Reference: scipy.stats.t on the updated parameters.
  EXPECT_NEAR(lr.log10_lr, 3.599038358164269, 1e-9);
}

TEST(LrForScalar, ShrinksToOneInTheTails) {
  double prev = INFINITY;
  for (double r : {1e2, 1e3, 1e4}) {
    const double up = std::abs(lr_for_scalar(r, kH1, kH2).log10_lr);
    const double down = std::abs(lr_for_scalar(-r, kH1, kH2).log10_lr);
    EXPECT_LT(up, prev);
    EXPECT_DOUBLE_EQ(up, down);
    prev = up;
  }
  EXPECT_NEAR(lr_for_scalar(1e4, kH1, kH2).lr, 1.0, 5e-3);
  EXPECT_NEAR(lr_for_scalar(-1e4, kH1, kH2).lr, 1.0, 5e-3);
}

TEST(LrCurve, PriorOnlyIsWeak) {
  std::vector<double> grid;
  for (double r = -30.0; r <= 30.0; r += 0.25) grid.push_back(r);
  const auto curve = lr_curve(kH1, kH2, grid);
  ASSERT_EQ(curve.size(), grid.size());
  for (const auto& pt : curve) {
    EXPECT_LT(pt.lr.lr, 3.0);
    EXPECT_GT(pt.lr.lr, 1.0 / 3.0);
    EXPECT_NEAR(pt.lr.lr, pt.density_h1 / pt.density_h2, 1e-12 * pt.lr.lr);
  }
}

TEST(LrCurve, MonotoneBetweenLocations) {
  std::vector<double> grid;
  for (double r = -5.0; r <= 5.0; r += 0.1) grid.push_back(r);
  const auto curve = lr_curve(kH1, kH2, grid);
  for (std::size_t i = 1; i < curve.size(); ++i) EXPECT_GT(curve[i].lr.lr, curve[i - 1].lr.lr);
  EXPECT_THROW(lr_curve(kH1, kH2, std::vector<double>{}), DomainError);
}

TEST(LrCurve, MoreValidationMoreEffect) {
  auto lr_at_8 = [](std::uint64_t n) {
    const auto h1 = update_normal_gamma(kH1, synthetic_summary(n, 8.0, 25.0));
    const auto h2 = update_normal_gamma(kH2, synthetic_summary(n, -12.5, 25.0));
    return lr_for_scalar(8.0, h1, h2);
  };
  EXPECT_GT(std::abs(lr_at_8(1000).log10_lr), std::abs(lr_at_8(10).log10_lr));
  EXPECT_NEAR(lr_at_8(10).lr, 49.34289674604535, 1e-9 * 49.34);
}
