#pragma once

// Three coherent observers predicting the next toss of the same coin from
// the same record:
//   A  fixes P(heads) = 1/2 and ignores the data;
//   B  puts a uniform prior on an i.i.d. heads probability;
//   C  models a first-order Markov chain with P(H | prev H) = p and
//      P(H | prev T) = q under independent uniform priors, with the toss
//      preceding the record equally likely H or T.

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "evweight/core.hpp"

namespace evweight {

enum class Toss { heads, tails };

using TossSequence = std::vector<Toss>;

inline TossSequence parse_tosses(std::string_view text) {
  TossSequence seq;
  seq.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == 'H' || c == 'h') {
      seq.push_back(Toss::heads);
    } else if (c == 'T' || c == 't') {
      seq.push_back(Toss::tails);
    } else {
      throw DomainError("toss " + std::to_string(i + 1) + " is '" + std::string(1, c) +
                        "', expected H or T");
    }
  }
  return seq;
}

inline double prob_next_heads_a(const TossSequence&) { return 0.5; }

/// Posterior mean of Beta(1 + heads, 1 + tails).
inline double prob_next_heads_b(const TossSequence& seq) {
  std::size_t heads = 0;
  for (Toss t : seq) heads += t == Toss::heads;
  return (static_cast<double>(heads) + 1.0) / (static_cast<double>(seq.size()) + 2.0);
}

namespace detail {

struct TransitionCounts {
  double hh = 0, ht = 0, th = 0, tt = 0;
};

inline TransitionCounts count_transitions(Toss before_first, const TossSequence& seq) {
  TransitionCounts c;
  Toss prev = before_first;
  for (Toss t : seq) {
    if (prev == Toss::heads)
      (t == Toss::heads ? c.hh : c.ht) += 1;
    else
      (t == Toss::heads ? c.th : c.tt) += 1;
    prev = t;
  }
  return c;
}

// Posterior mean of the transition probability out of `last`.
inline double next_heads_mean(const TransitionCounts& c, Toss last) {
  return last == Toss::heads ? (c.hh + 1.0) / (c.hh + c.ht + 2.0)
                             : (c.th + 1.0) / (c.th + c.tt + 2.0);
}

// log of the marginal likelihood of the record given the unseen toss.
inline double log_branch_evidence(const TransitionCounts& c) {
  auto log_beta = [](double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  };
  return log_beta(c.hh + 1.0, c.ht + 1.0) + log_beta(c.th + 1.0, c.tt + 1.0);
}

}  // namespace detail

/// Observer C with the two unseen-toss branches averaged equally.
inline double prob_next_heads_c(const TossSequence& seq) {
  if (seq.empty()) throw DomainError("observer C needs at least one toss");
  const auto from_h = detail::count_transitions(Toss::heads, seq);
  const auto from_t = detail::count_transitions(Toss::tails, seq);
  return 0.5 * detail::next_heads_mean(from_h, seq.back()) +
         0.5 * detail::next_heads_mean(from_t, seq.back());
}

/// Observer C with the branches weighted by their marginal likelihoods
/// (full Bayes update of the unseen toss). Diagnostic companion to
/// prob_next_heads_c.
inline double prob_next_heads_c_weighted(const TossSequence& seq) {
  if (seq.empty()) throw DomainError("observer C needs at least one toss");
  const auto from_h = detail::count_transitions(Toss::heads, seq);
  const auto from_t = detail::count_transitions(Toss::tails, seq);
  const double lh = detail::log_branch_evidence(from_h);
  const double lt = detail::log_branch_evidence(from_t);
  const double w_h = 1.0 / (1.0 + std::exp(lt - lh));
  return w_h * detail::next_heads_mean(from_h, seq.back()) +
         (1.0 - w_h) * detail::next_heads_mean(from_t, seq.back());
}

struct CoinReport {
  double a;
  double b;
  double c;
  double c_likelihood_weighted;
};

inline CoinReport coin_report(const TossSequence& seq) {
  return {prob_next_heads_a(seq), prob_next_heads_b(seq), prob_next_heads_c(seq),
          prob_next_heads_c_weighted(seq)};
}

}  // namespace evweight
