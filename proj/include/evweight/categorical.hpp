#pragma once

// Recipient LR for a three-level categorical conclusion (identification /
// inconclusive / exclusion).
//
// The recipient's prior over the mated rates p and non-mated rates q is
// uniform on the pair of simplices restricted to the admissible region
// (see `admissible`). Validation counts enter through Dirichlet conjugacy,
// so prior and posterior are both sampled by rejection from a pair of
// Dirichlet proposals.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "evweight/core.hpp"
#include "evweight/mc.hpp"

namespace evweight {

enum class Conclusion { id = 0, inc = 1, exc = 2 };

inline constexpr std::array<Conclusion, 3> kAllConclusions{Conclusion::id, Conclusion::inc,
                                                           Conclusion::exc};

inline std::string_view to_string(Conclusion c) {
  switch (c) {
    case Conclusion::id: return "id";
    case Conclusion::inc: return "inc";
    case Conclusion::exc: return "exc";
  }
  return "?";
}

inline std::optional<Conclusion> parse_conclusion(std::string_view text) {
  if (text == "id" || text == "ID") return Conclusion::id;
  if (text == "inc" || text == "Inc" || text == "INC") return Conclusion::inc;
  if (text == "exc" || text == "Exc" || text == "EXC") return Conclusion::exc;
  return std::nullopt;
}

/// Expected conclusion proportions for one scenario.
struct ConclusionRates {
  double id = 0.0, inc = 0.0, exc = 0.0;

  double operator[](Conclusion c) const {
    return c == Conclusion::id ? id : c == Conclusion::inc ? inc : exc;
  }
};

/// Mated (p) and non-mated (q) rates.
struct RatePair {
  ConclusionRates mated;
  ConclusionRates nonmated;
};

/// The six strict inequalities of the constrained-uniform prior.
inline bool admissible(const RatePair& r) {
  const ConclusionRates& p = r.mated;
  const ConclusionRates& q = r.nonmated;
  return p.id > p.exc && p.id > q.id &&      //
         q.exc > q.id && q.exc > p.exc &&    //
         p.id / q.id > p.inc / q.inc &&      //
         p.inc / q.inc > p.exc / q.exc;
}

struct ScenarioCounts {
  std::uint64_t id = 0, inc = 0, exc = 0;

  std::uint64_t total() const { return id + inc + exc; }
  std::uint64_t operator[](Conclusion c) const {
    return c == Conclusion::id ? id : c == Conclusion::inc ? inc : exc;
  }
  std::uint64_t& operator[](Conclusion c) {
    return c == Conclusion::id ? id : c == Conclusion::inc ? inc : exc;
  }
  friend bool operator==(const ScenarioCounts&, const ScenarioCounts&) = default;
};

/// Validation counts per scenario. All-zero counts mean "no validation data".
struct ConclusionCounts {
  ScenarioCounts h1;
  ScenarioCounts h2;

  std::uint64_t total() const { return h1.total() + h2.total(); }
  /// Scenarios swapped and ID exchanged with Exc. The admissible region is
  /// invariant under this relabeling, so LR(c | mirrored) = 1 / LR(c' | this)
  /// where c' is c with ID and Exc exchanged.
  ConclusionCounts mirrored() const { return {{h2.exc, h2.inc, h2.id}, {h1.exc, h1.inc, h1.id}}; }

  friend ConclusionCounts operator+(const ConclusionCounts& a, const ConclusionCounts& b) {
    return {{a.h1.id + b.h1.id, a.h1.inc + b.h1.inc, a.h1.exc + b.h1.exc},
            {a.h2.id + b.h2.id, a.h2.inc + b.h2.inc, a.h2.exc + b.h2.exc}};
  }
  friend bool operator==(const ConclusionCounts&, const ConclusionCounts&) = default;
};

/// The validation table from the latent-print black-box study.
inline ConclusionCounts black_box_counts() { return {{3663, 1856, 450}, {6, 455, 3622}}; }

/// Base Dirichlet concentration of the proposals before validation counts.
struct CategoricalPrior {
  std::array<double, 3> alpha_h1{1.0, 1.0, 1.0};
  std::array<double, 3> alpha_h2{1.0, 1.0, 1.0};
};

struct RatePairSample {
  std::vector<RatePair> pairs;
  std::uint64_t proposals = 0;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
};

inline RatePairSample sample_rate_pairs(const ConclusionCounts& counts, std::size_t n_accepted,
                                        const RngStream& rng,
                                        const CategoricalPrior& prior = {},
                                        const RejectionOptions& opts = {}) {
  if (n_accepted == 0) throw DomainError("n_accepted must be at least 1");
  const std::array<double, 3> a1{prior.alpha_h1[0] + static_cast<double>(counts.h1.id),
                                 prior.alpha_h1[1] + static_cast<double>(counts.h1.inc),
                                 prior.alpha_h1[2] + static_cast<double>(counts.h1.exc)};
  const std::array<double, 3> a2{prior.alpha_h2[0] + static_cast<double>(counts.h2.id),
                                 prior.alpha_h2[1] + static_cast<double>(counts.h2.inc),
                                 prior.alpha_h2[2] + static_cast<double>(counts.h2.exc)};
  for (double a : a1) detail::require_positive("H1 concentration", a);
  for (double a : a2) detail::require_positive("H2 concentration", a);

  auto proposal = [&](RngStream& s) {
    const auto p = sample_dirichlet3(a1, s);
    const auto q = sample_dirichlet3(a2, s);
    return RatePair{{p[0], p[1], p[2]}, {q[0], q[1], q[2]}};
  };
  auto result = rejection_sample(proposal, admissible, n_accepted, rng, opts);

  RatePairSample out;
  out.proposals = result.proposals;
  out.acceptance_rate = result.acceptance_rate();
  out.pairs = std::move(result.samples);
  out.seed = rng.seed();
  return out;
}

/// LR = mean(p_c) / mean(q_c) with a delta-method standard error.
inline LrEstimate lr_from_rate_pairs(Conclusion c, const RatePairSample& sample) {
  const std::size_t n = sample.pairs.size();
  if (n == 0) throw DomainError("empty rate-pair sample");
  double mp = 0.0, mq = 0.0;
  for (const RatePair& r : sample.pairs) {
    mp += r.mated[c];
    mq += r.nonmated[c];
  }
  mp /= static_cast<double>(n);
  mq /= static_cast<double>(n);
  double vp = 0.0, vq = 0.0, cpq = 0.0;
  for (const RatePair& r : sample.pairs) {
    const double dp = r.mated[c] - mp;
    const double dq = r.nonmated[c] - mq;
    vp += dp * dp;
    vq += dq * dq;
    cpq += dp * dq;
  }
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  vp /= denom;
  vq /= denom;
  cpq /= denom;
  const double ratio = mp / mq;
  // Var(mean p / mean q) to first order, with the means' variances var/n.
  const double rel_var =
      (vp / (mp * mp) + vq / (mq * mq) - 2.0 * cpq / (mp * mq)) / static_cast<double>(n);
  const double se = ratio * std::sqrt(std::max(rel_var, 0.0));
  return LrEstimate::monte_carlo(ratio, se, n, sample.acceptance_rate, sample.seed);
}

inline LrEstimate lr_for_conclusion(Conclusion c, const ConclusionCounts& counts,
                                    std::size_t n_accepted, const RngStream& rng,
                                    const RejectionOptions& opts = {}) {
  return lr_from_rate_pairs(c, sample_rate_pairs(counts, n_accepted, rng, {}, opts));
}

/// Rescales `base` to a study of `size` comparisons, keeping the H1/H2 mix
/// and the within-scenario conclusion rates. Both splits use
/// largest-remainder apportionment so the totals are exact.
inline ConclusionCounts rescale_counts(const ConclusionCounts& base, std::uint64_t size) {
  const std::uint64_t n_h1 = base.h1.total();
  const std::uint64_t n_h2 = base.h2.total();
  if (n_h1 == 0 || n_h2 == 0) throw DomainError("base counts must be nonzero in each scenario");

  auto apportion = [](std::span<const std::uint64_t> weights, std::uint64_t target) {
    long double total = 0;
    for (auto w : weights) total += static_cast<long double>(w);
    std::vector<std::uint64_t> out(weights.size());
    std::vector<long double> rem(weights.size());
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const long double exact = static_cast<long double>(target) * weights[i] / total;
      out[i] = static_cast<std::uint64_t>(std::floor(exact));
      rem[i] = exact - static_cast<long double>(out[i]);
      assigned += out[i];
    }
    for (; assigned < target; ++assigned) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < rem.size(); ++i)
        if (rem[i] > rem[best]) best = i;
      ++out[best];
      rem[best] = -1;
    }
    return out;
  };

  const std::array<std::uint64_t, 2> mix{n_h1, n_h2};
  const auto split = apportion(mix, size);
  if (split[0] < 3 || split[1] < 3)
    throw DomainError("sweep size " + std::to_string(size) +
                      " leaves fewer than 3 comparisons in a scenario");
  const std::array<std::uint64_t, 3> w1{base.h1.id, base.h1.inc, base.h1.exc};
  const std::array<std::uint64_t, 3> w2{base.h2.id, base.h2.inc, base.h2.exc};
  const auto c1 = apportion(w1, split[0]);
  const auto c2 = apportion(w2, split[1]);
  return {{c1[0], c1[1], c1[2]}, {c2[0], c2[1], c2[2]}};
}

struct SweepRow {
  std::uint64_t size = 0;
  ConclusionCounts counts;
  std::array<LrEstimate, 3> lr;  ///< indexed by Conclusion
};

struct SweepTable {
  std::vector<SweepRow> rows;
  /// Observed rate ratio of the base counts per conclusion (the curves'
  /// limit); empty when the non-mated count for that conclusion is zero.
  std::array<std::optional<double>, 3> asymptote;
};

/// LR per conclusion as a function of validation study size.
/// Sweep point i samples from rng.child(i).
inline SweepTable lr_sweep(const ConclusionCounts& base, std::span<const std::uint64_t> sizes,
                           std::size_t n_accepted, const RngStream& rng,
                           const RejectionOptions& opts = {}, const CategoricalPrior& prior = {}) {
  if (sizes.empty()) throw DomainError("sweep sizes must be nonempty");
  SweepTable table;
  for (Conclusion c : kAllConclusions) {
    if (base.h2[c] > 0)
      table.asymptote[static_cast<int>(c)] =
          lr_from_counts(base.h1[c], base.h1.total(), base.h2[c], base.h2.total());
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    SweepRow row;
    row.size = sizes[i];
    row.counts = rescale_counts(base, sizes[i]);
    const RatePairSample sample = sample_rate_pairs(row.counts, n_accepted, rng.child(i), prior, opts);
    for (Conclusion c : kAllConclusions) row.lr[static_cast<int>(c)] = lr_from_rate_pairs(c, sample);
    table.rows.push_back(row);
  }
  return table;
}

/// Normalized 2-D histogram of (p_c, q_c) on [0,1]^2.
struct DensityGrid {
  std::size_t bins = 100;
  std::vector<double> density;  ///< row-major, index p_bin * bins + q_bin

  double at(std::size_t p_bin, std::size_t q_bin) const { return density[p_bin * bins + q_bin]; }
  double center(std::size_t bin) const { return (static_cast<double>(bin) + 0.5) / bins; }
};

inline DensityGrid joint_density_grid(const RatePairSample& sample, Conclusion c,
                                      std::size_t bins = 100) {
  if (bins == 0) throw DomainError("bins must be positive");
  if (sample.pairs.empty()) throw DomainError("empty rate-pair sample");
  DensityGrid g;
  g.bins = bins;
  g.density.assign(bins * bins, 0.0);
  auto bin_of = [bins](double v) {
    return std::min(bins - 1, static_cast<std::size_t>(v * static_cast<double>(bins)));
  };
  for (const RatePair& r : sample.pairs) g.density[bin_of(r.mated[c]) * bins + bin_of(r.nonmated[c])] += 1.0;
  const double scale = static_cast<double>(bins * bins) / static_cast<double>(sample.pairs.size());
  for (double& d : g.density) d *= scale;
  return g;
}

}  // namespace evweight
