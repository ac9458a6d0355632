#ifndef UBP_HINDSIGHT_HPP
#define UBP_HINDSIGHT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ubp/market_data.hpp"
#include "ubp/numerics.hpp"
#include "ubp/strategy.hpp"

namespace ubp {

// Outcome of a hindsight optimization. gap_certificate is the final
// linear-maximization gap: an upper bound on how far log_wealth sits below
// the true optimum, by concavity.
struct HindsightResult {
  MultilinearStrategy strategy;
  double log_wealth;
  std::size_t iterations;
  double gap_certificate;
  bool converged;
};

// Per-plan visit counts of a Kelly (horse-race) sequence: counts[k] is the
// number of periods whose halves paid exactly the extremal plan k.
struct KellyCounts {
  std::size_t dim = 0;
  std::size_t order = 0;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
};

struct NotKellySequence : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// History halves regrouped into periods of `order` halves each; requires an
// exact fit (pad first).
inline void check_regroup(const MarketHistory& h, std::size_t order) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (h.halves().size() % order != 0)
    throw std::invalid_argument(
        "history length not divisible by order; pad the incomplete period first");
}

// T x K table of per-period extremal-plan growths.
inline std::vector<std::vector<double>> growth_table(const MarketHistory& h,
                                                     std::size_t order) {
  check_regroup(h, order);
  std::size_t periods = h.halves().size() / order;
  std::vector<std::vector<double>> rows;
  rows.reserve(periods);
  for (std::size_t t = 0; t < periods; ++t)
    rows.push_back(vertex_products({h.halves().data() + t * order, order}));
  return rows;
}

}  // namespace detail

// Counts extremal-plan hits for a Kelly sequence: every half-period vector
// must pay exactly one asset (a positive multiple of a unit basis vector).
inline KellyCounts kelly_counts(const MarketHistory& h, std::size_t order) {
  detail::check_regroup(h, order);
  std::size_t m = h.num_assets();
  std::size_t K = detail::checked_pow(m, order);
  KellyCounts out{m, order, std::vector<std::int64_t>(K, 0), 0};

  std::vector<std::size_t> winners;
  winners.reserve(h.halves().size());
  for (std::size_t s = 0; s < h.halves().size(); ++s) {
    const ReturnVector& half = h.halves()[s];
    std::size_t winner = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (half[i] > 0.0) {
        if (winner != m)
          throw NotKellySequence("not a Kelly sequence: half " + std::to_string(s) +
                                 " pays more than one asset");
        winner = i;
      }
    }
    winners.push_back(winner);
  }

  std::size_t periods = winners.size() / order;
  for (std::size_t t = 0; t < periods; ++t) {
    std::size_t flat = 0;
    for (std::size_t p = 0; p < order; ++p) flat = flat * m + winners[t * order + p];
    ++out.counts[flat];
  }
  out.total = std::int64_t(periods);
  return out;
}

// Exact hindsight optimum on a Kelly sequence: weights are the relative
// frequencies counts/T, and the optimal final wealth is
// prod_{k: n_k > 0} (n_k / T)^{n_k}, with 0^0 = 1.
inline HindsightResult kelly_hindsight(const KellyCounts& k) {
  if (k.total < 1) throw std::invalid_argument("kelly_hindsight: needs T >= 1");
  std::vector<double> w(k.counts.size());
  double log_wealth = 0.0;
  double T = double(k.total);
  for (std::size_t i = 0; i < k.counts.size(); ++i) {
    w[i] = double(k.counts[i]) / T;
    if (k.counts[i] > 0)
      log_wealth += double(k.counts[i]) * (std::log(double(k.counts[i])) - std::log(T));
  }
  return {MultilinearStrategy(k.order, k.dim, std::move(w)), log_wealth, 0, 0.0, true};
}

// ---------------------------------------------------------------------------
// Best strategy in hindsight, general histories
// ---------------------------------------------------------------------------

// Maximizes sum_t log(row_t . w) over the K-simplex by Frank-Wolfe with
// pairwise (exchange) steps and exact line search. The plain method stalls
// whenever the optimum sits on a face: mass stranded on zero-gradient
// coordinates decays only harmonically, which cannot reach tight tolerances
// in bounded iterations. An exchange step moves mass straight from the worst
// active coordinate to the best one and zeroes coordinates exactly, restoring
// fast convergence, while the reported certificate stays the standard
// linear-maximization gap.
namespace detail {

struct SimplexLogOptimum {
  std::vector<double> weights;
  double log_objective;
  std::size_t iterations;
  double gap;
  bool converged;
};

inline SimplexLogOptimum maximize_log_linear(std::span<const std::vector<double>> rows,
                                             std::size_t K, double tol,
                                             std::size_t max_iter) {
  const std::size_t T = rows.size();
  std::vector<double> w(K, 1.0 / double(K));
  if (T == 0) return {std::move(w), 0.0, 0, 0.0, true};

  // a[t] = rows[t] . w, kept incrementally and refreshed periodically.
  std::vector<double> a(T);
  auto refresh = [&] {
    for (std::size_t t = 0; t < T; ++t) {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += rows[t][k] * w[k];
      a[t] = s;
    }
  };
  refresh();
  for (std::size_t t = 0; t < T; ++t)
    if (!(a[t] > 0.0))
      throw std::domain_error(
          "hindsight: a period pays nothing on any plan; no strategy is feasible");

  auto objective = [&] {
    double f = 0.0;
    for (double g : a) f += std::log(g);
    return f;
  };

  std::vector<double> grad(K);
  std::vector<double> dir(T);
  double f_prev = objective();

  for (std::size_t it = 0; it < max_iter; ++it) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t t = 0; t < T; ++t) {
      double inv = 1.0 / a[t];
      for (std::size_t k = 0; k < K; ++k) grad[k] += rows[t][k] * inv;
    }
    std::size_t best = 0, worst = K;
    double gdotw = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      gdotw += grad[k] * w[k];
      if (grad[k] > grad[best]) best = k;
      if (w[k] > 0.0 && (worst == K || grad[k] < grad[worst])) worst = k;
    }
    double gap = grad[best] - gdotw;
    if (gap <= tol) return {std::move(w), objective(), it, gap, true};
    if (best == worst)  // numerically flat; no exchange can make progress
      return {std::move(w), objective(), it, gap, false};

    // Exchange direction: e_best - e_worst, step capped by the worst mass.
    double gamma_max = w[worst];
    for (std::size_t t = 0; t < T; ++t) dir[t] = rows[t][best] - rows[t][worst];

    auto slope = [&](double g) {
      double s = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        double den = a[t] + g * dir[t];
        if (den <= 0.0) return kNegInf;
        s += dir[t] / den;
      }
      return s;
    };

    double gamma = gamma_max;
    if (slope(gamma_max) < 0.0) {
      double lo = 0.0, hi = gamma_max;
      for (int b = 0; b < 80; ++b) {
        double mid = 0.5 * (lo + hi);
        if (slope(mid) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      gamma = 0.5 * (lo + hi);
    }

    w[best] += gamma;
    w[worst] -= gamma;
    if (gamma == gamma_max) w[worst] = 0.0;  // drop step, exact
    for (std::size_t t = 0; t < T; ++t) a[t] += gamma * dir[t];
    if ((it & 255u) == 255u) refresh();

    double f_now = objective();
    if (f_now < f_prev - 1e-9 * (1.0 + std::abs(f_prev)))
      throw std::logic_error("hindsight line search decreased the objective");
    f_prev = f_now;
  }

  refresh();
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double inv = 1.0 / a[t];
    for (std::size_t k = 0; k < K; ++k) grad[k] += rows[t][k] * inv;
  }
  double gdotw = 0.0, gmax = grad[0];
  for (std::size_t k = 0; k < K; ++k) {
    gdotw += grad[k] * w[k];
    gmax = std::max(gmax, grad[k]);
  }
  return {std::move(w), objective(), max_iter, gmax - gdotw, false};
}

}  // namespace detail

// Best order-H strategy in hindsight for the realized history (halves
// regrouped into periods of `order`). Deterministic: started from the
// uniform tensor, so ties on a flat objective resolve to the same point
// every run. On non-convergence the best iterate is returned with its gap
// and converged = false.
inline HindsightResult best_in_hindsight(const MarketHistory& h, std::size_t order,
                                         double tol = 1e-10,
                                         std::size_t max_iter = 50000) {
  if (tol <= 0.0) throw std::invalid_argument("best_in_hindsight: tol must be > 0");
  std::size_t K = detail::checked_pow(h.num_assets(), order);
  auto rows = detail::growth_table(h, order);
  auto opt = detail::maximize_log_linear(rows, K, tol, max_iter);
  return {MultilinearStrategy(order, h.num_assets(), std::move(opt.weights)),
          opt.log_objective, opt.iterations, opt.gap, opt.converged};
}

}  // namespace ubp

#endif  // UBP_HINDSIGHT_HPP
