#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "evweight/categorical.hpp"

using namespace evweight;

namespace {

struct ComponentMean {
  double mean;
  double std_err;
};

ComponentMean mean_of(const RatePairSample& s, double (*get)(const RatePair&)) {
  double sum = 0.0, sum2 = 0.0;
  for (const auto& r : s.pairs) {
    const double v = get(r);
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(s.pairs.size());
  const double m = sum / n;
  return {m, std::sqrt((sum2 / n - m * m) / n)};
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

double ks_critical(std::size_t n, std::size_t m, double alpha) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

double log_multinomial_kernel(const ConclusionRates& r, const ScenarioCounts& c) {
  double out = 0.0;
  for (Conclusion k : kAllConclusions)
    if (c[k] > 0) out += static_cast<double>(c[k]) * std::log(r[k]);
  return out;
}

double log_multinomial_max(const ScenarioCounts& c) {
  ConclusionRates mle{static_cast<double>(c.id) / c.total(), static_cast<double>(c.inc) / c.total(),
                      static_cast<double>(c.exc) / c.total()};
  return log_multinomial_kernel(mle, c);
}

}  // namespace

TEST(Admissible, ConstraintSet) {
  EXPECT_TRUE(admissible({{0.6, 0.3, 0.1}, {0.05, 0.25, 0.7}}));
  // p_ID below p_Exc.
  EXPECT_FALSE(admissible({{0.2, 0.3, 0.5}, {0.05, 0.25, 0.7}}));
  // Inc ratio above ID ratio.
  EXPECT_FALSE(admissible({{0.5, 0.45, 0.05}, {0.1, 0.01, 0.89}}));
  // Inc ratio below Exc ratio.
  EXPECT_FALSE(admissible({{0.6, 0.01, 0.39}, {0.05, 0.5, 0.45}}));
  // Ties are rejected.
  EXPECT_FALSE(admissible({{0.4, 0.2, 0.4}, {0.1, 0.2, 0.7}}));
}

TEST(SampleRatePairs, PriorMarginalMeans) {
  const auto s = sample_rate_pairs({}, 1'000'000, RngStream(101));
  ASSERT_EQ(s.pairs.size(), 1'000'000u);
  for (const auto& r : s.pairs) ASSERT_TRUE(admissible(r));
  const auto p_id = mean_of(s, [](const RatePair& r) { return r.mated.id; });
  const auto q_id = mean_of(s, [](const RatePair& r) { return r.nonmated.id; });
  EXPECT_NEAR(p_id.mean, 8.0 / 15.0, 4.0 * p_id.std_err);
  EXPECT_NEAR(q_id.mean, 2.0 / 15.0, 4.0 * q_id.std_err);
  EXPECT_GT(s.acceptance_rate, 0.05);
  EXPECT_LT(s.acceptance_rate, 0.2);

  const auto id = lr_from_rate_pairs(Conclusion::id, s);
  const auto inc = lr_from_rate_pairs(Conclusion::inc, s);
  const auto exc = lr_from_rate_pairs(Conclusion::exc, s);
  EXPECT_GT(id.lr, inc.lr);
  EXPECT_GT(inc.lr, exc.lr);
  EXPECT_GT(id.lr, 1.0);
  EXPECT_LT(exc.lr, 1.0);
  EXPECT_TRUE(id.from_monte_carlo());
  EXPECT_EQ(id.n_samples, 1'000'000u);
  EXPECT_EQ(id.seed, 101u);
}

TEST(SampleRatePairs, ConcentratedCounts) {
  const ConclusionCounts counts{{1'000'000'000, 0, 0}, {0, 0, 1'000'000'000}};
  const auto s = sample_rate_pairs(counts, 1000, RngStream(3));
  const auto p_id = mean_of(s, [](const RatePair& r) { return r.mated.id; });
  const auto q_exc = mean_of(s, [](const RatePair& r) { return r.nonmated.exc; });
  EXPECT_NEAR(p_id.mean, 1.0, 1e-6);
  EXPECT_NEAR(q_exc.mean, 1.0, 1e-6);
}

TEST(SampleRatePairs, BlackBoxCountsAlmostAlwaysAdmissible) {
  const auto s = sample_rate_pairs(black_box_counts(), 100000, RngStream(4));
  EXPECT_GT(s.acceptance_rate, 0.99);
}

TEST(SampleRatePairs, RejectsZeroTarget) {
  EXPECT_THROW(sample_rate_pairs({}, 0, RngStream(0)), DomainError);
}

TEST(SampleRatePairs, DeterministicAcrossThreadCounts) {
  RejectionOptions one, many;
  one.chunk_size = many.chunk_size = 5000;
  one.threads = 1;
  many.threads = 3;
  const auto a = sample_rate_pairs({}, 23456, RngStream(77, 2), {}, one);
  const auto b = sample_rate_pairs({}, 23456, RngStream(77, 2), {}, many);
  ASSERT_EQ(a.pairs.size(), b.pairs.size());
  EXPECT_EQ(a.proposals, b.proposals);
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    ASSERT_EQ(a.pairs[i].mated.id, b.pairs[i].mated.id);
    ASSERT_EQ(a.pairs[i].nonmated.exc, b.pairs[i].nonmated.exc);
  }
}

TEST(LrForConclusion, PosteriorWithBlackBoxCounts) {
  const auto lr = lr_for_conclusion(Conclusion::id, black_box_counts(), 200000, RngStream(5));
  EXPECT_NEAR(lr.lr, 358.0, 0.03 * 358.0);
  ASSERT_TRUE(lr.mc_std_err);
  EXPECT_GT(*lr.mc_std_err, 0.0);
  EXPECT_LT(*lr.mc_std_err, 0.01 * lr.lr);
}

TEST(LrForConclusion, MirroredCountsInvertTheLr) {
  const ConclusionCounts counts{{40, 25, 10}, {5, 20, 60}};
  const auto mirror = counts.mirrored();
  for (auto [c, c_mirror] : {std::pair{Conclusion::inc, Conclusion::inc},
                             std::pair{Conclusion::id, Conclusion::exc}}) {
    const auto a = lr_for_conclusion(c, counts, 400000, RngStream(6));
    const auto b = lr_for_conclusion(c_mirror, mirror, 400000, RngStream(7));
    // Standard error of the product by the delta method.
    const double se = std::hypot(*a.mc_std_err * b.lr, *b.mc_std_err * a.lr);
    EXPECT_NEAR(a.lr * b.lr, 1.0, 3.0 * se) << to_string(c);
  }
}

TEST(LrForConclusion, MoreDataMoreDecisive) {
  const ConclusionCounts base{{6, 3, 1}, {1, 2, 7}};
  double prev_abs = 0.0, prev_se = 0.0;
  for (std::uint64_t factor : {1, 2, 4, 8, 16}) {
    const ConclusionCounts scaled{{base.h1.id * factor, base.h1.inc * factor, base.h1.exc * factor},
                                  {base.h2.id * factor, base.h2.inc * factor, base.h2.exc * factor}};
    const auto lr = lr_for_conclusion(Conclusion::id, scaled, 100000, RngStream(8, factor));
    const double abs_log = std::abs(lr.log10_lr);
    const double se_log = *lr.mc_std_err / (lr.lr * detail::kLn10);
    EXPECT_GE(abs_log + 2.0 * std::hypot(se_log, prev_se), prev_abs) << "factor " << factor;
    prev_abs = abs_log;
    prev_se = se_log;
  }
}

TEST(LrForConclusion, SequentialUpdateMatchesPooledCounts) {
  // Route 1: condition on a + b directly. Route 2: sample the posterior
  // after a, then condition on b by likelihood rejection.
  const ConclusionCounts a{{3, 2, 1}, {1, 1, 3}};
  const ConclusionCounts b{{3, 1, 1}, {0, 1, 3}};
  const std::size_t n = 100000;

  const auto pooled = sample_rate_pairs(a + b, n, RngStream(9));

  const double log_max = log_multinomial_max(b.h1) + log_multinomial_max(b.h2);
  std::vector<double> sequential;
  sequential.reserve(n);
  RngStream thin(10);
  for (std::uint64_t batch = 0; sequential.size() < n; ++batch) {
    const auto after_a = sample_rate_pairs(a, 200000, RngStream(11, batch));
    for (const auto& r : after_a.pairs) {
      const double log_l = log_multinomial_kernel(r.mated, b.h1) + log_multinomial_kernel(r.nonmated, b.h2);
      if (std::log(thin.uniform()) < log_l - log_max) sequential.push_back(r.mated.id);
      if (sequential.size() == n) break;
    }
  }

  std::vector<double> direct;
  direct.reserve(n);
  for (const auto& r : pooled.pairs) direct.push_back(r.mated.id);
  EXPECT_LT(ks_statistic(direct, sequential), ks_critical(n, n, 0.001));
}

TEST(RescaleCounts, PreservesTotalsAndRates) {
  const auto base = black_box_counts();
  const auto same = rescale_counts(base, base.total());
  EXPECT_EQ(same, base);
  for (std::uint64_t size : {20u, 500u, 5000u, 123457u, 1'000'000u}) {
    const auto c = rescale_counts(base, size);
    EXPECT_EQ(c.total(), size);
    const double mated_share = static_cast<double>(c.h1.total()) / size;
    EXPECT_NEAR(mated_share, 5969.0 / 10052.0, 1.0 / size);
  }
  const auto million = rescale_counts(base, 1'000'000);
  EXPECT_NEAR(static_cast<double>(million.h1.id) / million.h1.total(), 3663.0 / 5969.0, 1e-5);
}

TEST(RescaleCounts, TooSmall) {
  EXPECT_THROW(rescale_counts(black_box_counts(), 5), DomainError);
  EXPECT_THROW(rescale_counts({{1, 0, 0}, {0, 0, 0}}, 100), DomainError);
}

TEST(LrSweep, AsymptoteAndShape) {
  const std::vector<std::uint64_t> sizes{50, 500, 5000};
  const auto table = lr_sweep(black_box_counts(), sizes, 50000, RngStream(12));
  ASSERT_EQ(table.rows.size(), 3u);
  ASSERT_TRUE(table.asymptote[0]);
  EXPECT_NEAR(*table.asymptote[0], 417.6, 0.05);
  for (const auto& row : table.rows) EXPECT_EQ(row.counts.total(), row.size);
  // ID LR grows with study size toward the observed-rate ratio.
  EXPECT_LT(table.rows[0].lr[0].lr, table.rows[2].lr[0].lr);
  EXPECT_LT(table.rows[2].lr[0].lr, *table.asymptote[0]);
}

TEST(LrSweep, PointsAreIndependentOfOtherPoints) {
  const std::vector<std::uint64_t> both{500, 5000};
  const std::vector<std::uint64_t> first{500};
  const auto a = lr_sweep(black_box_counts(), both, 10000, RngStream(13));
  const auto b = lr_sweep(black_box_counts(), first, 10000, RngStream(13));
  EXPECT_EQ(a.rows[0].lr[1].lr, b.rows[0].lr[1].lr);
  EXPECT_THROW(lr_sweep(black_box_counts(), std::vector<std::uint64_t>{}, 10, RngStream(0)),
               DomainError);
}

TEST(DensityGrid, NormalizedOnUnitSquare) {
  const auto s = sample_rate_pairs({}, 20000, RngStream(14));
  const auto g = joint_density_grid(s, Conclusion::id);
  ASSERT_EQ(g.bins, 100u);
  ASSERT_EQ(g.density.size(), 10000u);
  double mass = 0.0;
  for (double d : g.density) mass += d / (100.0 * 100.0);
  EXPECT_NEAR(mass, 1.0, 1e-12);
  // p_ID > q_ID on every accepted draw, so the region below the diagonal
  // in (p, q) carries all of the mass.
  double above = 0.0;
  for (std::size_t i = 0; i < 100; ++i)
    for (std::size_t j = i + 1; j < 100; ++j) above += g.at(i, j);
  EXPECT_EQ(above, 0.0);
  EXPECT_DOUBLE_EQ(g.center(0), 0.005);
}

TEST(Conclusion, Parse) {
  EXPECT_EQ(parse_conclusion("id"), Conclusion::id);
  EXPECT_EQ(parse_conclusion("ID"), Conclusion::id);
  EXPECT_EQ(parse_conclusion("Inc"), Conclusion::inc);
  EXPECT_FALSE(parse_conclusion("maybe"));
}
