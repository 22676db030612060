#pragma once

// Seeded sampling, chunked rejection sampling and 2-D quadrature.
//
// Determinism contract: every random quantity is a pure function of
// (seed, stream_id) and, for chunked work, of the chunk index. The chunk
// size is fixed by the caller's options, never by the thread count, so the
// number of worker threads cannot change any result.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "evweight/core.hpp"

namespace evweight {

namespace detail {

// splitmix64 finalizer; used only to derive child stream ids.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// A reproducible random stream identified by (seed, stream_id).
///
/// The engine is std::mt19937_64 seeded through std::seed_seq; both are
/// specified exactly by the standard. The variate transforms below are
/// written out rather than taken from <random> because the standard
/// distributions are implementation-defined.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Independent stream for sub-task `index` (chunk, sweep point, ...).
  RngStream child(std::uint64_t index) const {
    return RngStream(seed_, detail::mix64(stream_id_ ^ detail::mix64(index)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal (Marsaglia polar method).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// Gamma(shape, rate = 1) by Marsaglia and Tsang; shape < 1 is boosted.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline double sample_gamma(double shape, double rate, RngStream& rng) {
  detail::require_positive("gamma shape", shape);
  detail::require_positive("gamma rate", rate);
  return rng.gamma(shape) / rate;
}

/// One draw from Dirichlet(alpha) on the 3-simplex.
inline std::array<double, 3> sample_dirichlet3(const std::array<double, 3>& alpha,
                                               RngStream& rng) {
  for (double a : alpha) detail::require_positive("Dirichlet concentration", a);
  std::array<double, 3> x{rng.gamma(alpha[0]), rng.gamma(alpha[1]),
                          rng.gamma(alpha[2])};
  const double total = x[0] + x[1] + x[2];
  for (double& v : x) v /= total;
  return x;
}

/// Wishart(scale, df) in dimension 2 via the Bartlett decomposition.
/// E[W] = df * scale.
inline Eigen::Matrix2d sample_wishart2(const Eigen::Matrix2d& scale, double df,
                                       RngStream& rng) {
  if (!(df > 1.0)) throw DomainError("Wishart df must exceed dimension - 1");
  Eigen::LLT<Eigen::Matrix2d> llt(scale);
  if (llt.info() != Eigen::Success)
    throw DomainError("Wishart scale must be positive definite");
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  a(0, 0) = std::sqrt(2.0 * rng.gamma(0.5 * df));
  a(1, 1) = std::sqrt(2.0 * rng.gamma(0.5 * (df - 1.0)));
  a(1, 0) = rng.normal();
  const Eigen::Matrix2d la = llt.matrixL() * a;
  return la * la.transpose();
}

/// Worker count: hardware concurrency capped by EVIDENTIAL_WEIGHT_THREADS.
inline unsigned worker_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EVIDENTIAL_WEIGHT_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs body(i) for i in [0, n). Exceptions are rethrown for the lowest
/// failing index so the reported error does not depend on scheduling.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         unsigned threads = 0) {
  if (threads == 0) threads = worker_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::exception_ptr> errors(n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct RejectionOptions {
  /// Accepted samples per chunk; part of the determinism contract.
  std::size_t chunk_size = 1 << 16;
  /// Minimum acceptable acceptance rate once `probe_proposals` is reached.
  double min_acceptance = 1e-6;
  std::uint64_t probe_proposals = 10'000'000;
  /// 0 = worker_threads().
  unsigned threads = 0;
};

template <class T>
struct RejectionResult {
  std::vector<T> samples;
  std::uint64_t proposals = 0;

  double acceptance_rate() const {
    return proposals == 0 ? 0.0
                          : static_cast<double>(samples.size()) /
                                static_cast<double>(proposals);
  }
};

/// Draws from `proposal` until `target_accepted` draws satisfy `accept`.
///
/// Chunk c produces its share of accepted samples from rng.child(c); the
/// chunks are concatenated in index order.
template <class Proposal, class Accept>
auto rejection_sample(Proposal proposal, Accept accept, std::size_t target_accepted,
                      const RngStream& rng, const RejectionOptions& opts = {})
    -> RejectionResult<std::invoke_result_t<Proposal&, RngStream&>> {
  using Sample = std::invoke_result_t<Proposal&, RngStream&>;
  if (target_accepted == 0) throw DomainError("target_accepted must be positive");
  if (opts.chunk_size == 0) throw DomainError("chunk_size must be positive");

  const std::size_t n_chunks = (target_accepted + opts.chunk_size - 1) / opts.chunk_size;
  std::vector<std::vector<Sample>> chunk_samples(n_chunks);
  std::vector<std::uint64_t> chunk_proposals(n_chunks, 0);

  parallel_for(
      n_chunks,
      [&](std::size_t c) {
        const std::size_t want =
            std::min(opts.chunk_size, target_accepted - c * opts.chunk_size);
        RngStream local = rng.child(c);
        auto& out = chunk_samples[c];
        out.reserve(want);
        std::uint64_t tried = 0;
        bool probed = false;
        while (out.size() < want) {
          Sample s = proposal(local);
          ++tried;
          if (accept(s)) out.push_back(std::move(s));
          if (!probed && tried >= opts.probe_proposals) {
            probed = true;
            const double rate = static_cast<double>(out.size()) / static_cast<double>(tried);
            if (rate < opts.min_acceptance)
              throw IntractableConstraintError(
                  "acceptance rate " + std::to_string(rate) + " below floor " +
                      std::to_string(opts.min_acceptance),
                  rate);
          }
        }
        chunk_proposals[c] = tried;
      },
      opts.threads);

  RejectionResult<Sample> result;
  result.samples.reserve(target_accepted);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    result.proposals += chunk_proposals[c];
    for (auto& s : chunk_samples[c]) result.samples.push_back(std::move(s));
  }
  return result;
}

enum class AxisScale { linear, log };

/// Rectangle and tolerances for integrate_2d. Log-scaled axes place the
/// nodes uniformly in log(x) and integrate with the x Jacobian.
struct QuadratureSpec {
  double a_lo = 0.0, a_hi = 1.0;
  double b_lo = 0.0, b_hi = 1.0;
  double rel_tol = 1e-8;
  unsigned max_refinements = 8;
  AxisScale a_scale = AxisScale::linear;
  AxisScale b_scale = AxisScale::linear;
  unsigned initial_panels = 4;

  void validate() const {
    detail::require_finite("a_lo", a_lo);
    detail::require_finite("a_hi", a_hi);
    detail::require_finite("b_lo", b_lo);
    detail::require_finite("b_hi", b_hi);
    if (!(a_lo < a_hi)) throw DomainError("quadrature domain needs a_lo < a_hi");
    if (!(b_lo < b_hi)) throw DomainError("quadrature domain needs b_lo < b_hi");
    detail::require_positive("rel_tol", rel_tol);
    if (a_scale == AxisScale::log && !(a_lo > 0.0))
      throw DomainError("log-scaled axis needs a_lo > 0");
    if (b_scale == AxisScale::log && !(b_lo > 0.0))
      throw DomainError("log-scaled axis needs b_lo > 0");
    if (initial_panels == 0) throw DomainError("initial_panels must be positive");
  }
};

struct Quadrature2dResult {
  double value = 0.0;
  double previous = 0.0;
  unsigned panels = 0;  ///< panels per axis at the accepted level
  /// Share of the integral carried by the outermost ring of panels.
  double boundary_mass_fraction = 0.0;
};

namespace detail {

struct AxisRule {
  std::vector<double> nodes;    // in x
  std::vector<double> weights;  // including Jacobian
  std::vector<unsigned> panel;  // panel index of each node
};

inline AxisRule make_axis_rule(double lo, double hi, AxisScale scale, unsigned panels) {
  using Rule = boost::math::quadrature::gauss<double, 10>;
  // Boost stores the non-negative half of the symmetric rule.
  std::vector<double> t, w;
  for (std::size_t i = 0; i < Rule::abscissa().size(); ++i) {
    const double x = Rule::abscissa()[i];
    const double wt = Rule::weights()[i];
    t.push_back(x);
    w.push_back(wt);
    if (x != 0.0) {
      t.push_back(-x);
      w.push_back(wt);
    }
  }
  const bool logged = scale == AxisScale::log;
  const double u_lo = logged ? std::log(lo) : lo;
  const double u_hi = logged ? std::log(hi) : hi;
  const double h = (u_hi - u_lo) / panels;

  AxisRule rule;
  rule.nodes.reserve(panels * t.size());
  for (unsigned p = 0; p < panels; ++p) {
    const double mid = u_lo + (p + 0.5) * h;
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double u = mid + 0.5 * h * t[k];
      const double x = logged ? std::exp(u) : u;
      rule.nodes.push_back(x);
      rule.weights.push_back(0.5 * h * w[k] * (logged ? x : 1.0));
      rule.panel.push_back(p);
    }
  }
  return rule;
}

template <class F>
Quadrature2dResult tensor_rule(F& f, const QuadratureSpec& spec, unsigned panels) {
  const AxisRule ra = make_axis_rule(spec.a_lo, spec.a_hi, spec.a_scale, panels);
  const AxisRule rb = make_axis_rule(spec.b_lo, spec.b_hi, spec.b_scale, panels);
  std::vector<double> row_total(ra.nodes.size(), 0.0);
  std::vector<double> row_edge(ra.nodes.size(), 0.0);
  parallel_for(ra.nodes.size(), [&](std::size_t i) {
    const bool edge_row = ra.panel[i] == 0 || ra.panel[i] + 1 == panels;
    double total = 0.0, edge = 0.0;
    for (std::size_t j = 0; j < rb.nodes.size(); ++j) {
      const double v = rb.weights[j] * f(ra.nodes[i], rb.nodes[j]);
      total += v;
      if (edge_row || rb.panel[j] == 0 || rb.panel[j] + 1 == panels) edge += v;
    }
    row_total[i] = ra.weights[i] * total;
    row_edge[i] = ra.weights[i] * edge;
  });
  Quadrature2dResult r;
  double edge = 0.0;
  for (std::size_t i = 0; i < row_total.size(); ++i) {
    r.value += row_total[i];
    edge += row_edge[i];
  }
  r.panels = panels;
  r.boundary_mass_fraction = r.value > 0.0 ? edge / r.value : 0.0;
  return r;
}

}  // namespace detail

/// Composite tensor-product Gauss-Legendre integration over a rectangle.
/// The panel count doubles until two successive estimates agree to
/// spec.rel_tol; otherwise ConvergenceError carries the last two values.
template <class F>
Quadrature2dResult integrate_2d_detailed(F&& f, const QuadratureSpec& spec) {
  spec.validate();
  unsigned panels = spec.initial_panels;
  Quadrature2dResult prev = detail::tensor_rule(f, spec, panels);
  for (unsigned level = 0; level < spec.max_refinements; ++level) {
    panels *= 2;
    Quadrature2dResult cur = detail::tensor_rule(f, spec, panels);
    if (!std::isfinite(cur.value))
      throw ConvergenceError("integrand produced a non-finite estimate", cur.value,
                             prev.value);
    cur.previous = prev.value;
    if (std::abs(cur.value - prev.value) <= spec.rel_tol * std::abs(cur.value))
      return cur;
    prev = cur;
  }
  throw ConvergenceError("2-D quadrature did not converge within " +
                             std::to_string(spec.max_refinements) + " refinements",
                         prev.value, prev.previous);
}

template <class F>
double integrate_2d(F&& f, const QuadratureSpec& spec) {
  const Quadrature2dResult r = integrate_2d_detailed(std::forward<F>(f), spec);
  if (!(r.value > 0.0)) throw DomainError("integral of a nonnegative function is zero");
  return r.value;
}

}  // namespace evweight
