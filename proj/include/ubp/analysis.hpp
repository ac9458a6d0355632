#ifndef UBP_ANALYSIS_HPP
#define UBP_ANALYSIS_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "ubp/numerics.hpp"
#include "ubp/strategy.hpp"

namespace ubp {

// Competitive-ratio summary for one history: how much of the
// hindsight-optimal wealth the universal portfolio achieved, against the
// uniform prior-dependent lower bound.
struct RatioReport {
  double log_ratio = 0.0;               // log(W_universal / W_hindsight), <= 0
  double log_bound = kNegInf;           // uniform lower bound for log_ratio
  double excess_growth_per_period = 0;  // -log_ratio / T
  bool bound_satisfied = true;
  bool ratio_anomaly = false;  // ratio exceeded 1 beyond numerical slack
};

// log(universal / hindsight), clipped into (-inf, 0]. A ratio above 1 by
// more than `slack` cannot happen for exact values (an average never beats
// the maximum), so it is flagged as an estimator or optimizer defect.
struct CompetitiveRatio {
  double log_ratio;
  bool anomaly;
};

inline CompetitiveRatio competitive_ratio(double log_universal, double log_hindsight,
                                          double slack = 1e-9) {
  if (std::isnan(log_universal) || std::isnan(log_hindsight))
    throw std::domain_error("competitive_ratio: NaN input");
  if (log_hindsight == kNegInf)
    throw std::domain_error(
        "competitive_ratio: hindsight wealth is zero; ratio undefined");
  double raw = log_universal - log_hindsight;
  return {std::min(raw, 0.0), raw > slack};
}

// Uniform lower bound on the log competitive ratio after T complete
// periods: log f_min - sum_{j=1}^{m^H - 1} log(T + j), evaluated through
// log-gamma so horizons up to 1e6+ stay exact. A zero density floor gives
// -inf (the bound is vacuous).
inline double log_ratio_lower_bound(std::size_t m, std::size_t order, std::size_t T,
                                    double log_density_floor) {
  if (log_density_floor == kNegInf) return kNegInf;
  std::size_t K = detail::checked_pow(m, order);
  double log_product = std::lgamma(double(T + K)) - std::lgamma(double(T + 1));
  return log_density_floor - log_product;
}

// Excess continuously-compounded per-period growth rate of the hindsight
// optimum over the universal portfolio.
inline double excess_growth(double log_ratio, std::size_t T) {
  if (T < 1) throw std::invalid_argument("excess_growth: needs T >= 1");
  return -log_ratio / double(T);
}

// Worst-case cap on the excess growth rate implied by the ratio bound;
// decays like (m^H - 1) log(T) / T.
inline double excess_growth_bound(std::size_t m, std::size_t order, std::size_t T,
                                  double log_density_floor) {
  if (T < 1) throw std::invalid_argument("excess_growth_bound: needs T >= 1");
  return -log_ratio_lower_bound(m, order, T, log_density_floor) / double(T);
}

// Assembles the full report. `noise_band` widens the bound check for
// Monte Carlo estimates of the universal wealth (pass e.g. 3 standard
// errors of log W); a violation is only declared when even the optimistic
// edge of the band falls below the bound.
inline RatioReport make_ratio_report(double log_universal, double log_hindsight,
                                     std::size_t m, std::size_t order, std::size_t T,
                                     double log_density_floor, double noise_band = 0.0,
                                     double slack = 1e-9) {
  auto cr = competitive_ratio(log_universal, log_hindsight, slack);
  RatioReport rep;
  rep.log_ratio = cr.log_ratio;
  rep.ratio_anomaly = cr.anomaly;
  rep.log_bound = log_ratio_lower_bound(m, order, T, log_density_floor);
  rep.excess_growth_per_period = T > 0 ? excess_growth(cr.log_ratio, T) : 0.0;
  rep.bound_satisfied = cr.log_ratio + noise_band + slack >= rep.log_bound;
  return rep;
}

}  // namespace ubp

#endif  // UBP_ANALYSIS_HPP
