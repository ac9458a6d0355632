#ifndef UBP_HOTSTOCK_HPP
#define UBP_HOTSTOCK_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ubp/market_data.hpp"
#include "ubp/numerics.hpp"
#include "ubp/quadrature.hpp"

// Closed-form reference for the two-asset "hot stock vs. cash" market:
// asset 1 doubles in the first half of every period and halves in the
// second, asset 2 is cash. Every quantity of interest has an exact formula
// here, which makes the market the golden fixture for the universal and
// hindsight machinery.

namespace ubp {

// t periods of x = (2, 1), y = (1/2, 1).
inline MarketHistory hotstock_history(std::size_t t) {
  MarketHistory h(2, std::vector<std::string>{"stock", "cash"});
  ReturnVector up(std::vector<double>{2.0, 1.0});
  ReturnVector down(std::vector<double>{0.5, 1.0});
  for (std::size_t s = 0; s < t; ++s) {
    h.append(up);
    h.append(down);
  }
  return h;
}

struct HotStockReport {
  std::size_t t = 0;
  double log_universal_wealth = 0.0;  // universal bilinear, uniform prior
  double log_hindsight_wealth = 0.0;  // perfect trader, t log 2
  double log_crp_wealth = 0.0;        // best rebalanced portfolio, t log(9/8)
  double log_ratio = 0.0;             // log universal - log hindsight
  std::array<double, 4> weights{};    // averaged strategy b11, b12, b21, b22
};

namespace detail {

// 2^-e without calling pow; underflows cleanly to 0 for huge exponents.
inline double exp2_neg(double e) { return std::exp2(-e); }

}  // namespace detail

// Exact values after t complete periods. All formulas are evaluated with the
// dominant power of two factored out, so a huge t costs no precision: the
// subtracted terms just underflow to zero and the log picks up the exact
// (t+5) log 2 asymptote.
//
// The averaged-strategy diagonal is recovered from the sum constraint,
// b11 = b22 = (1 - b12 - b21) / 2; the two diagonal weights are equal
// because buying and holding either asset returns exactly 1 over any
// complete period.
inline HotStockReport hotstock_closed_forms(std::size_t t) {
  if (t < 1) throw std::invalid_argument("hotstock_closed_forms: needs t >= 1");
  const double td = double(t);
  const double log2 = std::log(2.0);

  HotStockReport rep;
  rep.t = t;
  rep.log_hindsight_wealth = td * log2;
  rep.log_crp_wealth = td * std::log(9.0 / 8.0);

  double log_den = std::log(td + 1.0) + std::log(td + 2.0) + std::log(td + 3.0);

  // W = (2^{t+5} - 12(t+2) - 2^{1-t}) / ((t+1)(t+2)(t+3))
  double small_w =
      12.0 * (td + 2.0) * detail::exp2_neg(td + 5.0) + detail::exp2_neg(2.0 * td + 4.0);
  rep.log_universal_wealth = (td + 5.0) * log2 + std::log1p(-small_w) - log_den;

  // R = (32 - 12(t+2) 2^{-t} - 2^{1-2t}) / ((t+1)(t+2)(t+3))
  double r_num = 32.0 - 12.0 * (td + 2.0) * detail::exp2_neg(td) -
                 2.0 * detail::exp2_neg(2.0 * td);
  rep.log_ratio = std::log(r_num) - log_den;

  // On-line averaged weights, scaled by 2^{-(t+4)}:
  //   b12 = [2^{t+4}(3t-4) + 18(t+4) + 2^{-t}] / (3 (t+4) q)
  //   b21 = [2^{t+6} - 36(t+1) - (3t+19) 2^{-t}] / (3 (t+4) q)
  // with q = 2^{t+4} - 6(t+2) - 2^{-t}.
  double q = 1.0 - 6.0 * (td + 2.0) * detail::exp2_neg(td + 4.0) -
             detail::exp2_neg(2.0 * td + 4.0);
  double num12 = (3.0 * td - 4.0) + 18.0 * (td + 4.0) * detail::exp2_neg(td + 4.0) +
                 detail::exp2_neg(2.0 * td + 4.0);
  double num21 = 4.0 - 36.0 * (td + 1.0) * detail::exp2_neg(td + 4.0) -
                 (3.0 * td + 19.0) * detail::exp2_neg(2.0 * td + 4.0);
  double b12 = num12 / (3.0 * (td + 4.0) * q);
  double b21 = num21 / (3.0 * (td + 4.0) * q);
  double diag = 0.5 * (1.0 - b12 - b21);
  rep.weights = {diag, b12, b21, diag};
  return rep;
}

// Wealth of the universal 1-linear (rebalanced) portfolio on this market,
// log int_0^1 (1+c)^t (1-c/2)^t dc, by Gauss-Legendre exact for the
// polynomial degree, accumulated in log domain.
inline double hotstock_universal_crp_log_wealth(std::size_t t) {
  if (t == 0) return 0.0;
  int n = int(t) + 2;  // degree 2t needs 2n-1 >= 2t
  const GaussRule& r = gauss_legendre_01(n);
  std::vector<double> terms(r.nodes.size());
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    double c = r.nodes[i];
    terms[i] = std::log(r.weights[i]) +
               double(t) * (std::log1p(c) + std::log1p(-0.5 * c));
  }
  return log_sum_exp(terms);
}

// The same wealth by the multinomial expansion
//   sum_{k1,k2} t! / (k1! k2! (t-k1-k2)!) (-1)^{k2} / (2^{k1+k2} (k1+2k2+1)).
// Alternating series; extended-precision accumulation keeps ~1e-12 relative
// accuracy through t = 20. Independent of the quadrature route.
inline double hotstock_universal_crp_log_wealth_series(std::size_t t) {
  if (t > 25)
    throw std::invalid_argument("series route loses precision past t = 25");
  const long double log2l = std::log(2.0L);
  long double total = 0.0L;
  for (std::size_t k1 = 0; k1 <= t; ++k1) {
    for (std::size_t k2 = 0; k2 + k1 <= t; ++k2) {
      long double log_mult =
          std::lgamma((long double)(t) + 1.0L) - std::lgamma((long double)(k1) + 1.0L) -
          std::lgamma((long double)(k2) + 1.0L) -
          std::lgamma((long double)(t - k1 - k2) + 1.0L);
      long double term = std::exp(log_mult - (long double)(k1 + k2) * log2l) /
                         (long double)(k1 + 2 * k2 + 1);
      total += (k2 % 2 == 0) ? term : -term;
    }
  }
  return double(std::log(total));
}

// Trajectory CSV for plotting: wealth of the universal bilinear portfolio,
// the universal rebalanced portfolio, and the perfect trader, plus the
// averaged bilinear weights, one row per period. The bilinear curve and
// weights come from the closed forms; the rebalanced curve from quadrature.
inline void write_hotstock_figure_csv(std::ostream& os, std::size_t t_max) {
  os << "t,log_universal_bilinear,log_universal_crp,log_perfect_trader,"
        "universal_bilinear,universal_crp,perfect_trader,b11,b12,b21,b22\n";
  char buf[32];
  auto put = [&](double v, bool lead_comma = true) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    if (lead_comma) os << ',';
    os << buf;
  };
  os << "0,0,0,0,1,1,1,0.25,0.25,0.25,0.25\n";
  for (std::size_t t = 1; t <= t_max; ++t) {
    HotStockReport rep = hotstock_closed_forms(t);
    double log_crp = hotstock_universal_crp_log_wealth(t);
    os << t;
    put(rep.log_universal_wealth);
    put(log_crp);
    put(rep.log_hindsight_wealth);
    put(std::exp(rep.log_universal_wealth));
    put(std::exp(log_crp));
    put(std::exp(rep.log_hindsight_wealth));
    for (double w : rep.weights) put(w);
    os << "\n";
  }
}

}  // namespace ubp

#endif  // UBP_HOTSTOCK_HPP
