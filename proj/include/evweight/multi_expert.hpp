#pragma once

// Recipient LR for a pair of reported log10 LRs from two experts.
//
// Under each scenario the pair is bivariate normal with a Normal-Wishart
// prior: Lambda ~ Wishart(lambda0, n0), mu | Lambda ~ Normal(mu0, (k0
// Lambda)^-1). The predictive is a bivariate Student-t with location mu0
// and scale matrix ((k0 (n0 - 1) / (k0 + 1)) lambda0)^-1. Its degrees of
// freedom are selectable: n0 as written for the worked example, or the
// textbook n0 - 1 (= n0 - d + 1 for d = 2).

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "evweight/core.hpp"

namespace evweight {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class DfConvention { n0, n0_minus_1 };

inline std::string_view to_string(DfConvention c) {
  return c == DfConvention::n0 ? "n0" : "n0-1";
}

namespace detail {

inline bool is_symmetric(const Mat2& m, double tol) {
  return std::abs(m(0, 1) - m(1, 0)) <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

inline bool is_positive_definite(const Mat2& m) {
  return m(0, 0) > 0.0 && m.determinant() > 0.0;
}

inline Mat2 symmetrize(const Mat2& m) { return 0.5 * (m + m.transpose()); }

}  // namespace detail

struct NormalWishartParams {
  Vec2 mu0 = Vec2::Zero();
  double k0 = 1.0;
  Mat2 lambda0 = Mat2::Identity();
  double n0 = 2.0;

  void validate() const {
    detail::require_finite("mu0[0]", mu0(0));
    detail::require_finite("mu0[1]", mu0(1));
    detail::require_positive("k0", k0);
    if (!lambda0.allFinite()) throw DomainError("lambda0 must be finite");
    if (!detail::is_symmetric(lambda0, 1e-12)) throw DomainError("lambda0 must be symmetric");
    if (!detail::is_positive_definite(lambda0))
      throw DomainError("lambda0 must be positive definite");
    if (!std::isfinite(n0) || n0 < 2.0) throw DomainError("n0 must be at least 2");
  }
};

/// Sufficient statistics of paired validation log10 LRs.
struct PairedLrSummary {
  std::uint64_t m = 0;
  Vec2 mean = Vec2::Zero();
  Mat2 scatter = Mat2::Zero();  ///< sum of outer products about the mean

  void validate() const {
    if (m == 0) throw DomainError("paired summary needs m >= 1");
    if (!mean.allFinite() || !scatter.allFinite()) throw DomainError("paired summary must be finite");
    if (!detail::is_symmetric(scatter, 1e-10)) throw DomainError("scatter must be symmetric");
    const Eigen::SelfAdjointEigenSolver<Mat2> eig(detail::symmetrize(scatter));
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, scatter.cwiseAbs().maxCoeff()))
      throw DomainError("scatter must be positive semidefinite");
  }

  static PairedLrSummary from_pairs(std::span<const Vec2> xs) {
    if (xs.empty()) throw DomainError("no paired validation values");
    PairedLrSummary s;
    s.m = xs.size();
    for (const Vec2& x : xs) {
      if (!x.allFinite()) throw DomainError("paired validation value must be finite");
      s.mean += x;
    }
    s.mean /= static_cast<double>(s.m);
    for (const Vec2& x : xs) {
      const Vec2 d = x - s.mean;
      s.scatter += d * d.transpose();
    }
    return s;
  }
};

inline PairedLrSummary pool(const PairedLrSummary& a, const PairedLrSummary& b) {
  a.validate();
  b.validate();
  const double na = static_cast<double>(a.m), nb = static_cast<double>(b.m);
  const double n = na + nb;
  const Vec2 d = a.mean - b.mean;
  return {a.m + b.m, (na * a.mean + nb * b.mean) / n,
          a.scatter + b.scatter + (na * nb / n) * d * d.transpose()};
}

inline NormalWishartParams update_normal_wishart(const NormalWishartParams& prior,
                                                 const PairedLrSummary& data) {
  prior.validate();
  data.validate();
  const double m = static_cast<double>(data.m);
  const Vec2 d = data.mean - prior.mu0;
  NormalWishartParams post;
  post.n0 = prior.n0 + m;
  post.k0 = prior.k0 + m;
  post.mu0 = (prior.k0 * prior.mu0 + m * data.mean) / (prior.k0 + m);
  const Mat2 inv_scale = prior.lambda0.inverse() + data.scatter +
                         (prior.k0 * m / (prior.k0 + m)) * d * d.transpose();
  post.lambda0 = detail::symmetrize(inv_scale.inverse());
  return post;
}

struct BivariateT {
  double df;
  Vec2 location;
  Mat2 scale;

  double log_density(const Vec2& x) const {
    const Eigen::LLT<Mat2> llt(scale);
    if (llt.info() != Eigen::Success) throw DomainError("t scale matrix is not positive definite");
    const Mat2 l = llt.matrixL();
    const Vec2 z = llt.matrixL().solve(x - location);
    const double log_det = 2.0 * (std::log(l(0, 0)) + std::log(l(1, 1)));
    return std::lgamma(0.5 * (df + 2.0)) - std::lgamma(0.5 * df) -
           std::log(df * std::numbers::pi) - 0.5 * log_det -
           0.5 * (df + 2.0) * std::log1p(z.squaredNorm() / df);
  }
};

inline BivariateT predictive_t(const NormalWishartParams& p, DfConvention conv = DfConvention::n0) {
  p.validate();
  const double factor = p.k0 * (p.n0 - 1.0) / (p.k0 + 1.0);
  const Mat2 precision = factor * p.lambda0;
  if (!detail::is_positive_definite(precision))
    throw DomainError("predictive scale matrix is not positive definite (needs n0 > 1)");
  const double df = conv == DfConvention::n0 ? p.n0 : p.n0 - 1.0;
  return {df, p.mu0, detail::symmetrize(precision.inverse())};
}

inline double bivariate_t_logdensity(const NormalWishartParams& p, const Vec2& x,
                                     DfConvention conv = DfConvention::n0) {
  if (!x.allFinite()) throw DomainError("x must be finite");
  return predictive_t(p, conv).log_density(x);
}

inline LrEstimate lr_for_pair(const Vec2& x, const NormalWishartParams& h1,
                              const NormalWishartParams& h2, DfConvention conv = DfConvention::n0) {
  const double log_ratio = bivariate_t_logdensity(h1, x, conv) - bivariate_t_logdensity(h2, x, conv);
  return LrEstimate::closed_form(log_ratio / detail::kLn10);
}

/// Built-in priors. `display` and `prose` differ in Lambda0 and the H1 mean.
enum class PriorVariant { display, prose };

inline std::string_view to_string(PriorVariant v) {
  return v == PriorVariant::display ? "display" : "prose";
}

inline std::pair<NormalWishartParams, NormalWishartParams> two_expert_priors(
    PriorVariant v = PriorVariant::display) {
  NormalWishartParams h1, h2;
  if (v == PriorVariant::display) {
    h1.lambda0 << 0.1, -0.08, -0.08, 0.1;
    h1.mu0 << 5.0, 5.0;
  } else {
    h1.lambda0 << 0.2, -0.15, -0.15, 0.2;
    h1.mu0 << 4.0, 2.0;
  }
  h1.k0 = 2.0;
  h1.n0 = 2.0;
  h2 = h1;
  h2.mu0 << -2.0, -4.0;
  return {h1, h2};
}

/// Per-scenario validation summaries for a given number of tests m.
using PairDataGenerator = std::function<std::pair<PairedLrSummary, PairedLrSummary>(std::uint64_t)>;

/// The synthetic validation sets of the worked example: means (3.5, 2.5)
/// and (-2.5, -3.5), scatter m [[5, 4], [4, 5]] in both scenarios.
inline PairDataGenerator worked_example_pair_data() {
  return [](std::uint64_t m) {
    Mat2 unit;
    unit << 5.0, 4.0, 4.0, 5.0;
    const double mm = static_cast<double>(m);
    PairedLrSummary h1{m, Vec2(3.5, 2.5), mm * unit};
    PairedLrSummary h2{m, Vec2(-2.5, -3.5), mm * unit};
    return std::make_pair(h1, h2);
  };
}

struct PairSweepRow {
  std::uint64_t m;
  LrEstimate lr;
};

/// LR at x after m validation tests per scenario, for each m in sizes.
/// m = 0 evaluates the priors.
inline std::vector<PairSweepRow> pair_lr_sweep(const Vec2& x, const NormalWishartParams& h1,
                                               const NormalWishartParams& h2,
                                               const PairDataGenerator& data,
                                               std::span<const std::uint64_t> sizes,
                                               DfConvention conv = DfConvention::n0) {
  if (sizes.empty()) throw DomainError("sweep sizes must be nonempty");
  std::vector<PairSweepRow> out;
  out.reserve(sizes.size());
  for (std::uint64_t m : sizes) {
    if (m == 0) {
      out.push_back({0, lr_for_pair(x, h1, h2, conv)});
      continue;
    }
    const auto [d1, d2] = data(m);
    out.push_back({m, lr_for_pair(x, update_normal_wishart(h1, d1), update_normal_wishart(h2, d2), conv)});
  }
  return out;
}

}  // namespace evweight
