#ifndef UBP_QUADRATURE_HPP
#define UBP_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ubp/market_data.hpp"
#include "ubp/numerics.hpp"

namespace ubp {

struct QuadratureResult {
  double log_wealth = 0.0;
  bool converged = true;
  int points_per_axis = 0;
};

struct QuadratureTrajectoryPoint {
  std::size_t t = 0;
  double log_wealth = 0.0;
  std::array<double, 4> strategy{};  // b11, b12, b21, b22
};

namespace detail {

// Streaming log-sum-exp accumulator; order-dependent but used with a fixed
// deterministic node order.
struct LogAccumulator {
  double m = kNegInf;
  double s = 0.0;
  void add(double x) {
    if (x == kNegInf) return;
    if (x <= m) {
      s += std::exp(x - m);
    } else {
      s = s * std::exp(m - x) + 1.0;
      m = x;
    }
  }
  double value() const { return m == kNegInf ? kNegInf : m + std::log(s); }
};

// Per-period growth of B = [[b11,b12],[b21,b22]] against (x,y), written as
// an affine function of the three free coordinates: g = c0 + c1 b11 +
// c2 b12 + c3 b21 with b22 eliminated.
struct AffineGrowth2x2 {
  double c0, c1, c2, c3;
  double eval(double b11, double b12, double b21) const {
    return c0 + c1 * b11 + c2 * b12 + c3 * b21;
  }
};

inline std::vector<AffineGrowth2x2> growth_coefficients_2x2(const MarketHistory& h) {
  if (h.num_assets() != 2 || h.order() != 2)
    throw std::invalid_argument("quadrature engine requires m = 2, order = 2");
  if (h.remainder() != 0)
    throw std::invalid_argument("quadrature engine: pad the incomplete period first");
  std::vector<AffineGrowth2x2> out;
  out.reserve(h.complete_periods());
  for (std::size_t t = 0; t < h.complete_periods(); ++t) {
    auto p = h.period(t);
    double x1 = p[0][0], x2 = p[0][1], y1 = p[1][0], y2 = p[1][1];
    out.push_back({x2 * y2, x1 * y1 - x2 * y2, x1 * y2 - x2 * y2, x2 * y1 - x2 * y2});
  }
  return out;
}

// The strategy set for m = 2, order 2 is the solid tetrahedron
// {b >= 0, b11 + b12 + b21 <= 1} with b22 bound. Tensorized Gauss-Legendre
// under the collapsing map b11 = u, b12 = (1-u) v, b21 = (1-u)(1-v) s turns
// period growths into per-axis polynomials of degree about T, so successive
// doublings of n converge to machine precision once 2n-1 clears the degree.
//
// visit(log_base, b11, b12, b21) is called once per node, where log_base
// already contains the node weight, the volume Jacobian, and the uniform
// prior density 6.
template <typename Visit>
void for_each_tetrahedron_node(int n, Visit&& visit) {
  const GaussRule& r = gauss_legendre_01(n);
  for (int iu = 0; iu < n; ++iu) {
    double u = r.nodes[iu];
    double fu = (1.0 - u) * (1.0 - u);
    for (int iv = 0; iv < n; ++iv) {
      double v = r.nodes[iv];
      double fv = 1.0 - v;
      double b11 = u;
      double b12 = (1.0 - u) * v;
      double wj = 6.0 * fu * fv * r.weights[iu] * r.weights[iv];
      for (int is = 0; is < n; ++is) {
        double s = r.nodes[is];
        double b21 = (1.0 - u) * (1.0 - v) * s;
        visit(std::log(wj * r.weights[is]), b11, b12, b21);
      }
    }
  }
}

inline double log_universal_wealth_2x2_at(const std::vector<AffineGrowth2x2>& periods,
                                          int n) {
  LogAccumulator acc;
  for_each_tetrahedron_node(n, [&](double log_base, double b11, double b12, double b21) {
    double lw = log_base;
    for (const auto& g : periods) {
      double gv = g.eval(b11, b12, b21);
      if (gv <= 0.0) {
        lw = kNegInf;
        break;
      }
      lw += std::log(gv);
    }
    acc.add(lw);
  });
  return acc.value();
}

inline constexpr int kQuadMinPoints = 8;
inline constexpr int kQuadMaxPoints = 256;
inline constexpr double kQuadRelTol = 1e-8;

}  // namespace detail

// Wealth of the universal bilinear portfolio under the uniform prior,
// log E_f[W_B], for an m = 2 history of complete 2-part periods. Doubles the
// per-axis point count until successive values agree to 1e-8 relative; a
// result that never stabilizes is flagged converged = false.
inline QuadratureResult universal_wealth_quadrature_2x2(const MarketHistory& h) {
  auto periods = detail::growth_coefficients_2x2(h);
  double prev = detail::log_universal_wealth_2x2_at(periods, detail::kQuadMinPoints);
  for (int n = detail::kQuadMinPoints * 2; n <= detail::kQuadMaxPoints; n *= 2) {
    double cur = detail::log_universal_wealth_2x2_at(periods, n);
    if (std::abs(cur - prev) <= detail::kQuadRelTol * std::max(1.0, std::abs(cur)))
      return {cur, true, n};
    prev = cur;
  }
  return {prev, false, detail::kQuadMaxPoints};
}

// Universal bilinear trajectory (m = 2, uniform prior): for every prefix of
// t complete periods, the log universal wealth and the posterior
// performance-weighted strategy E_f[B W] / E_f[W]. Index 0 is the prior
// center of mass. The grid is chosen by doubling until the full-horizon
// integral stabilizes, then the whole trajectory runs one doubling finer;
// every prefix integrand has lower degree than the full product, so the
// finer grid is exact for all of them.
inline std::vector<QuadratureTrajectoryPoint> universal_trajectory_quadrature_2x2(
    const MarketHistory& h) {
  auto periods = detail::growth_coefficients_2x2(h);
  const std::size_t T = periods.size();

  auto run = [&](int n) {
    std::vector<QuadratureTrajectoryPoint> traj(T + 1);
    std::vector<double> logF(std::size_t(n) * n * n, 0.0);
    for (std::size_t t = 0; t <= T; ++t) {
      if (t > 0) {
        std::size_t idx = 0;
        detail::for_each_tetrahedron_node(
            n, [&](double, double b11, double b12, double b21) {
              double gv = periods[t - 1].eval(b11, b12, b21);
              logF[idx++] += gv > 0.0 ? std::log(gv) : kNegInf;
            });
      }
      detail::LogAccumulator total;
      std::array<detail::LogAccumulator, 4> entry;
      std::size_t idx = 0;
      detail::for_each_tetrahedron_node(
          n, [&](double log_base, double b11, double b12, double b21) {
            double lw = log_base + logF[idx++];
            total.add(lw);
            if (lw == kNegInf) return;
            double b22 = 1.0 - b11 - b12 - b21;
            entry[0].add(lw + std::log(b11));
            entry[1].add(lw + std::log(b12));
            entry[2].add(lw + std::log(b21));
            entry[3].add(lw + (b22 > 0.0 ? std::log(b22) : kNegInf));
          });
      traj[t].t = t;
      traj[t].log_wealth = total.value();
      for (int e = 0; e < 4; ++e)
        traj[t].strategy[e] = std::exp(entry[e].value() - total.value());
    }
    return traj;
  };

  int n = detail::kQuadMinPoints;
  double prev = detail::log_universal_wealth_2x2_at(periods, n);
  while (n < 128) {
    double cur = detail::log_universal_wealth_2x2_at(periods, n * 2);
    if (std::abs(cur - prev) <= detail::kQuadRelTol * std::max(1.0, std::abs(cur))) break;
    prev = cur;
    n *= 2;
  }
  return run(2 * n);
}

// Wealth of the universal constant-rebalanced portfolio for m = 2 under the
// uniform prior, log int_0^1 prod_s (c x_s1 + (1-c) x_s2) dc, treating every
// half-period vector as its own 1-part period.
inline QuadratureResult universal_wealth_quadrature_crp_m2(const MarketHistory& h) {
  if (h.num_assets() != 2)
    throw std::invalid_argument("universal CRP quadrature requires m = 2");
  const auto& halves = h.halves();

  auto eval = [&](int n) {
    const GaussRule& r = gauss_legendre_01(n);
    detail::LogAccumulator acc;
    for (int i = 0; i < n; ++i) {
      double c = r.nodes[i];
      double lw = std::log(r.weights[i]);
      for (const ReturnVector& half : halves) {
        double g = c * half[0] + (1.0 - c) * half[1];
        if (g <= 0.0) {
          lw = kNegInf;
          break;
        }
        lw += std::log(g);
      }
      acc.add(lw);
    }
    return acc.value();
  };

  // integrand is a polynomial of degree = number of halves
  int n = std::max<int>(detail::kQuadMinPoints, int(halves.size() / 2) + 2);
  double prev = eval(n);
  for (n *= 2; n <= 16384; n *= 2) {
    double cur = eval(n);
    if (std::abs(cur - prev) <= detail::kQuadRelTol * std::max(1.0, std::abs(cur)))
      return {cur, true, n};
    prev = cur;
  }
  return {prev, false, 16384};
}

}  // namespace ubp

#endif  // UBP_QUADRATURE_HPP
