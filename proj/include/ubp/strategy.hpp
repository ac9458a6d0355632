#ifndef UBP_STRATEGY_HPP
#define UBP_STRATEGY_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ubp/market_data.hpp"
#include "ubp/numerics.hpp"

namespace ubp {

namespace detail {

inline std::size_t checked_pow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > std::size_t(1) << 40)
      throw std::invalid_argument("strategy tensor too large (m^H overflow)");
    out *= base;
  }
  return out;
}

}  // namespace detail

// Fixed allocation on the unit simplex of m assets.
class PortfolioVector {
 public:
  explicit PortfolioVector(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw std::invalid_argument("PortfolioVector: empty");
    double sum = 0.0;
    for (double x : w_) {
      if (x < 0.0) {
        if (x < -1e-12) throw std::invalid_argument("PortfolioVector: negative weight");
        x = 0.0;
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("PortfolioVector: weights must sum to 1");
    for (double& x : w_) x = std::max(x, 0.0) / sum;
  }

  static PortfolioVector uniform(std::size_t m) {
    return PortfolioVector(std::vector<double>(m, 1.0 / double(m)));
  }

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& weights() const { return w_; }

 private:
  std::vector<double> w_;
};

// Order-H trading strategy: a dense tensor of m^H nonnegative weights
// summing to one, stored flat in row-major order (first sub-period index
// slowest). weight(i_1,...,i_H) is the fraction of the initial dollar run
// through the extremal plan "asset i_1 in sub-period 1, roll into i_2, ...".
//
// Construction renormalizes weight sums within 1e-9 of 1 and rejects
// anything further off, so optimizer drift passes but real bugs do not.
class MultilinearStrategy {
 public:
  MultilinearStrategy(std::size_t order, std::size_t dim, std::vector<double> weights)
      : order_(order), dim_(dim), w_(std::move(weights)) {
    if (order_ < 1 || dim_ < 1)
      throw std::invalid_argument("MultilinearStrategy: order and dim must be >= 1");
    if (w_.size() != detail::checked_pow(dim_, order_))
      throw std::invalid_argument("MultilinearStrategy: weight count != m^H");
    double sum = 0.0;
    for (double& x : w_) {
      if (x < 0.0) {
        if (x < -1e-12)
          throw std::invalid_argument("MultilinearStrategy: negative weight");
        x = 0.0;
      }
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("MultilinearStrategy: weights must sum to 1 (got " +
                                  std::to_string(sum) + ")");
    for (double& x : w_) x /= sum;
  }

  static MultilinearStrategy uniform(std::size_t dim, std::size_t order) {
    std::size_t k = detail::checked_pow(dim, order);
    return MultilinearStrategy(order, dim, std::vector<double>(k, 1.0 / double(k)));
  }

  // All-in on the extremal plan (indices[0], ..., indices[H-1]), 0-based.
  static MultilinearStrategy vertex(std::size_t dim, std::size_t order,
                                    std::span<const std::size_t> indices) {
    std::size_t k = detail::checked_pow(dim, order);
    std::vector<double> w(k, 0.0);
    w[flat_index(dim, indices)] = 1.0;
    return MultilinearStrategy(order, dim, std::move(w));
  }

  std::size_t order() const { return order_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_weights() const { return w_.size(); }
  const std::vector<double>& weights() const { return w_; }
  double operator[](std::size_t flat) const { return w_[flat]; }

  double at(std::initializer_list<std::size_t> indices) const {
    if (indices.size() != order_)
      throw std::invalid_argument("MultilinearStrategy::at: wrong index count");
    return w_[flat_index(dim_, {indices.begin(), indices.size()})];
  }

  static std::size_t flat_index(std::size_t dim, std::span<const std::size_t> indices) {
    std::size_t k = 0;
    for (std::size_t i : indices) {
      if (i >= dim) throw std::out_of_range("strategy index out of range");
      k = k * dim + i;
    }
    return k;
  }

  static std::vector<std::size_t> multi_index(std::size_t dim, std::size_t order,
                                              std::size_t flat) {
    std::vector<std::size_t> out(order);
    for (std::size_t h = order; h-- > 0;) {
      out[h] = flat % dim;
      flat /= dim;
    }
    return out;
  }

 private:
  std::size_t order_;
  std::size_t dim_;
  std::vector<double> w_;
};

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

// Products prod_h x^h[i_h] for every multi-index, flattened row-major — the
// per-period growth of each extremal plan. The growth of any strategy is the
// dot product of its weights with this table row.
inline std::vector<double> vertex_products(std::span<const ReturnVector> halves) {
  if (halves.empty()) throw std::invalid_argument("vertex_products: no halves");
  std::size_t m = halves[0].size();
  std::vector<double> out{1.0};
  for (const ReturnVector& half : halves) {
    if (half.size() != m)
      throw std::invalid_argument("vertex_products: dimension mismatch");
    std::vector<double> next(out.size() * m);
    for (std::size_t k = 0; k < out.size(); ++k)
      for (std::size_t i = 0; i < m; ++i) next[k * m + i] = out[k] * half[i];
    out = std::move(next);
  }
  return out;
}

// Intra-period capital growth factor <x^1,...,x^H>_B. Nonnegative; zero only
// if B has no mass where the period paid.
inline double period_growth(const MultilinearStrategy& B,
                            std::span<const ReturnVector> halves) {
  if (halves.size() != B.order())
    throw std::invalid_argument("period_growth: expected H half-period vectors");
  if (halves[0].size() != B.dim())
    throw std::invalid_argument("period_growth: dimension mismatch");
  std::vector<double> vp = vertex_products(halves);
  double g = 0.0;
  for (std::size_t k = 0; k < vp.size(); ++k) g += B[k] * vp[k];
  return g;
}

// Log-domain final wealth. `ruined` marks a period with growth exactly zero;
// the log is then -inf and downstream code can exclude the strategy rather
// than unwind the stack.
struct LogWealth {
  double log_wealth = 0.0;
  bool ruined = false;
};

// Final wealth of B over all complete periods, as log(prod_t growth_t). The
// empty history gives log(1) = 0. History must be complete; pad first.
inline LogWealth wealth(const MultilinearStrategy& B, const MarketHistory& h) {
  if (h.remainder() != 0)
    throw std::invalid_argument("wealth: history has an incomplete period; pad it first");
  if (h.order() != B.order() || (h.complete_periods() > 0 && h.num_assets() != B.dim()))
    throw std::invalid_argument("wealth: strategy/history shape mismatch");
  LogWealth out;
  for (std::size_t t = 0; t < h.complete_periods(); ++t) {
    double g = period_growth(B, h.period(t));
    if (g <= 0.0) {
      out.ruined = true;
      out.log_wealth = kNegInf;
      return out;
    }
    out.log_wealth += std::log(g);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embeddings of classic strategies
// ---------------------------------------------------------------------------

// Constant-rebalanced portfolio c as an order-H strategy: the H-fold outer
// product, weight(i_1..i_H) = prod_h c[i_h]. Growth factors agree with
// rebalancing to c every half-period.
inline MultilinearStrategy embed_crp(const PortfolioVector& c, std::size_t order) {
  std::size_t m = c.size();
  std::vector<double> w{1.0};
  for (std::size_t h = 0; h < order; ++h) {
    std::vector<double> next(w.size() * m);
    for (std::size_t k = 0; k < w.size(); ++k)
      for (std::size_t i = 0; i < m; ++i) next[k * m + i] = w[k] * c[i];
    w = std::move(next);
  }
  return MultilinearStrategy(order, m, std::move(w));
}

// Buy-and-hold of initial portfolio c over a 2-part period: diagonal matrix
// diag(c). Wealth equals c . (x o y) with o the entrywise product.
inline MultilinearStrategy embed_buy_and_hold(const PortfolioVector& c) {
  std::size_t m = c.size();
  std::vector<double> w(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) w[i * m + i] = c[i];
  return MultilinearStrategy(2, m, std::move(w));
}

// ---------------------------------------------------------------------------
// Replication (order 2)
// ---------------------------------------------------------------------------

struct ReplicationPair {
  PortfolioVector first_half;   // p = B 1
  PortfolioVector second_half;  // q(x) = B'x / x'B1
};

struct RuinError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The unique 2-period active strategy replicating the bilinear payoff x'By:
// invest p = B1 in the first half, then q(x) = B'x / (x'B1), so that
// (p'x)(q'y) = x'By for every y. Higher orders are not implemented: the
// conditional-portfolio sequence is only pinned down for order 2.
inline ReplicationPair replication_portfolios(const MultilinearStrategy& B,
                                              const ReturnVector& x) {
  if (B.order() != 2)
    throw std::invalid_argument(
        "replication_portfolios: implemented for order-2 strategies only");
  std::size_t m = B.dim();
  if (x.size() != m)
    throw std::invalid_argument("replication_portfolios: dimension mismatch");

  std::vector<double> p(m, 0.0), qn(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      p[i] += B[i * m + j];
      qn[j] += B[i * m + j] * x[i];
    }
  double denom = 0.0;  // x'B1 = p'x
  for (std::size_t i = 0; i < m; ++i) denom += p[i] * x[i];
  if (denom <= 0.0)
    throw RuinError("replication_portfolios: first-half growth x'B1 is zero");
  for (double& q : qn) q /= denom;
  return {PortfolioVector(std::move(p)), PortfolioVector(std::move(qn))};
}

// ---------------------------------------------------------------------------
// Extremal decomposition
// ---------------------------------------------------------------------------

struct ExtremalTerm {
  std::vector<std::size_t> indices;  // 0-based multi-index of the extremal plan
  double weight;
};

// B as the convex combination of its m^H extremal plans; zero-weight terms
// are omitted. Reassembling the terms reproduces B exactly.
inline std::vector<ExtremalTerm> extremal_decomposition(const MultilinearStrategy& B) {
  std::vector<ExtremalTerm> out;
  for (std::size_t k = 0; k < B.num_weights(); ++k)
    if (B[k] != 0.0)
      out.push_back({MultilinearStrategy::multi_index(B.dim(), B.order(), k), B[k]});
  return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const MultilinearStrategy& B) {
  return {{"order", B.order()}, {"dim", B.dim()}, {"weights", B.weights()}};
}

inline MultilinearStrategy strategy_from_json(const nlohmann::json& j) {
  return MultilinearStrategy(j.at("order").get<std::size_t>(),
                             j.at("dim").get<std::size_t>(),
                             j.at("weights").get<std::vector<double>>());
}

}  // namespace ubp

#endif  // UBP_STRATEGY_HPP
