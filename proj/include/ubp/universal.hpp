#ifndef UBP_UNIVERSAL_HPP
#define UBP_UNIVERSAL_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ubp/analysis.hpp"
#include "ubp/hindsight.hpp"
#include "ubp/market_data.hpp"
#include "ubp/numerics.hpp"
#include "ubp/strategy.hpp"

namespace ubp {

// Symmetric Dirichlet prior over the strategy simplex. alpha = 1 is the
// uniform density (constant (m^H - 1)!), the default everywhere.
struct PriorSpec {
  double alpha = 1.0;

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("PriorSpec: alpha must be > 0");
  }

  // Log of the minimum density over the simplex, the constant that scales
  // the competitive-ratio lower bound. alpha = 1: log (K-1)!. alpha < 1:
  // the density blows up at the boundary and bottoms out at the barycenter,
  // log Gamma(K a) - K log Gamma(a) + K (1-a) log K. alpha > 1: the density
  // vanishes at the boundary, so the floor is zero and the bound vacuous.
  double log_density_floor(std::size_t m, std::size_t order) const {
    validate();
    double K = double(detail::checked_pow(m, order));
    if (alpha == 1.0) return std::lgamma(K);
    if (alpha > 1.0) return kNegInf;
    return std::lgamma(K * alpha) - K * std::lgamma(alpha) +
           K * (1.0 - alpha) * std::log(K);
  }
};

namespace detail {

inline constexpr std::size_t kParticleChunk = 16384;

// Chunked log-sum-exp: partials may be computed on worker threads but are
// combined in chunk order, so the result does not depend on the thread count.
inline double chunked_log_sum_exp(std::span<const double> v) {
  if (v.size() <= kParticleChunk) return log_sum_exp(v);
  std::size_t n_chunks = (v.size() + kParticleChunk - 1) / kParticleChunk;
  std::vector<double> partial(n_chunks);
  for_each_chunk(v.size(), kParticleChunk, [&](std::size_t c, std::size_t lo, std::size_t hi) {
    partial[c] = log_sum_exp(v.subspan(lo, hi - lo));
  });
  double acc = kNegInf;
  for (double p : partial) acc = log_add_exp(acc, p);
  return acc;
}

}  // namespace detail

// Draws n independent strategies from Dirichlet(alpha, ..., alpha) over the
// m^H-simplex, flattened row-major (particle i occupies [i K, (i+1) K)).
// For extreme alpha the gamma draws can all underflow to zero; the limiting
// law concentrates on the vertices, so such a row becomes a random vertex.
inline std::vector<double> sample_strategy_cloud(std::size_t m, std::size_t order,
                                                 double alpha, std::size_t n,
                                                 std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_strategy_cloud: n must be >= 1");
  PriorSpec{alpha}.validate();
  std::size_t K = detail::checked_pow(m, order);
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> cloud(n * K);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = cloud.data() + i * K;
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      row[k] = gamma(rng);
      sum += row[k];
    }
    if (sum <= 0.0) {
      std::uniform_int_distribution<std::size_t> pick(0, K - 1);
      row[pick(rng)] = 1.0;
      sum = 1.0;
    }
    for (std::size_t k = 0; k < K; ++k) row[k] /= sum;
  }
  return cloud;
}

// Performance-weighted average of all strategies under the prior,
// represented by a fixed particle cloud with multiplicative importance
// weights. Drawn once at t = 0 and reweighted by realized growth each
// period, so the telescoping product of per-period returns equals the mean
// particle wealth identically over the sampled measure.
class UniversalState {
 public:
  UniversalState(std::size_t m, std::size_t order, PriorSpec prior,
                 std::size_t n_samples, std::uint64_t seed)
      : m_(m),
        order_(order),
        K_(detail::checked_pow(m, order)),
        prior_(prior),
        particles_(sample_strategy_cloud(m, order, prior.alpha, n_samples, seed)),
        log_weights_(n_samples, 0.0),
        lse_weights_(std::log(double(n_samples))) {}

  std::size_t num_assets() const { return m_; }
  std::size_t order() const { return order_; }
  std::size_t num_particles() const { return log_weights_.size(); }
  std::size_t periods() const { return t_; }
  double log_wealth() const { return log_wealth_; }
  bool ruined() const { return ruined_; }
  const PriorSpec& prior() const { return prior_; }

  // Advances one complete period. The realized growth of the averaged
  // strategy is the weight-averaged particle growth (growth is linear in
  // the tensor), booked in log domain.
  void step(std::span<const ReturnVector> halves) {
    if (ruined_) throw std::domain_error("UniversalState::step: state is ruined");
    if (halves.size() != order_)
      throw std::invalid_argument("UniversalState::step: expected H halves");
    if (halves[0].size() != m_)
      throw std::invalid_argument("UniversalState::step: dimension mismatch");
    std::vector<double> vp = vertex_products(halves);

    const std::size_t n = num_particles();
    for_each_chunk(n, detail::kParticleChunk,
                   [&](std::size_t, std::size_t lo, std::size_t hi) {
                     for (std::size_t i = lo; i < hi; ++i) {
                       const double* row = particles_.data() + i * K_;
                       double g = 0.0;
                       for (std::size_t k = 0; k < K_; ++k) g += row[k] * vp[k];
                       log_weights_[i] += g > 0.0 ? std::log(g) : kNegInf;
                     }
                   });

    double lse_after = detail::chunked_log_sum_exp(log_weights_);
    if (lse_after == kNegInf) {
      ruined_ = true;
      log_wealth_ = kNegInf;
      ++t_;
      return;
    }
    log_wealth_ += lse_after - lse_weights_;
    lse_weights_ = lse_after;
    ++t_;
  }

  // Self-normalized weighted average of the particle tensors: the strategy
  // the averaged portfolio actually plays next period. Always a valid
  // strategy (a convex combination of valid ones).
  MultilinearStrategy current_strategy() const {
    std::vector<double> mean = weighted_tensor_mean();
    return MultilinearStrategy(order_, m_, std::move(mean));
  }

  // Delta-method standard error of each averaged tensor entry.
  std::vector<double> entry_standard_errors() const {
    std::vector<double> mean = weighted_tensor_mean();
    std::vector<double> var(K_, 0.0);
    const std::size_t n = num_particles();
    for (std::size_t i = 0; i < n; ++i) {
      double wb = std::exp(2.0 * (log_weights_[i] - lse_weights_));
      const double* row = particles_.data() + i * K_;
      for (std::size_t k = 0; k < K_; ++k) {
        double d = row[k] - mean[k];
        var[k] += wb * d * d;
      }
    }
    for (double& v : var) v = std::sqrt(v);
    return var;
  }

  // Standard error of a linear functional sum_k coeffs[k] * mean[k] of the
  // averaged tensor (e.g. an entry difference).
  double contrast_se(std::span<const double> coeffs) const {
    if (coeffs.size() != K_)
      throw std::invalid_argument("contrast_se: coefficient count != m^H");
    const std::size_t n = num_particles();
    double mean = 0.0;
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = particles_.data() + i * K_;
      double d = 0.0;
      for (std::size_t k = 0; k < K_; ++k) d += coeffs[k] * row[k];
      vals[i] = d;
      mean += std::exp(log_weights_[i] - lse_weights_) * d;
    }
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double wb = std::exp(2.0 * (log_weights_[i] - lse_weights_));
      var += wb * (vals[i] - mean) * (vals[i] - mean);
    }
    return std::sqrt(var);
  }

  // Effective sample size of the importance weights, 1 / sum w_bar^2;
  // degenerates toward 1 as one strategy dominates.
  double effective_sample_size() const {
    return 1.0 / sum_squared_normalized_weights();
  }

  // log of the plain average of particle wealths — by telescoping, equal to
  // log_wealth() up to floating-point error.
  double log_mean_particle_wealth() const {
    return lse_weights_ - std::log(double(num_particles()));
  }

  // Standard error of log mean particle wealth (delta method).
  double log_mean_wealth_se() const {
    double s = sum_squared_normalized_weights() - 1.0 / double(num_particles());
    return std::sqrt(std::max(s, 0.0));
  }

 private:
  double sum_squared_normalized_weights() const {
    double s = 0.0;
    for (double lw : log_weights_) s += std::exp(2.0 * (lw - lse_weights_));
    return s;
  }

  std::vector<double> weighted_tensor_mean() const {
    const std::size_t n = num_particles();
    std::size_t n_chunks = (n + detail::kParticleChunk - 1) / detail::kParticleChunk;
    std::vector<double> partial(n_chunks * K_, 0.0);
    for_each_chunk(n, detail::kParticleChunk,
                   [&](std::size_t c, std::size_t lo, std::size_t hi) {
                     double* acc = partial.data() + c * K_;
                     for (std::size_t i = lo; i < hi; ++i) {
                       double wb = std::exp(log_weights_[i] - lse_weights_);
                       const double* row = particles_.data() + i * K_;
                       for (std::size_t k = 0; k < K_; ++k) acc[k] += wb * row[k];
                     }
                   });
    std::vector<double> mean(K_, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c)
      for (std::size_t k = 0; k < K_; ++k) mean[k] += partial[c * K_ + k];
    return mean;
  }

  std::size_t m_;
  std::size_t order_;
  std::size_t K_;
  PriorSpec prior_;
  std::vector<double> particles_;
  std::vector<double> log_weights_;
  double lse_weights_;
  double log_wealth_ = 0.0;
  std::size_t t_ = 0;
  bool ruined_ = false;
};

inline void universal_step(UniversalState& state, std::span<const ReturnVector> halves) {
  state.step(halves);
}

// Exact universal wealth on a Kelly sequence under the uniform prior:
// log[(K-1)! prod_k n_k! / (T + K - 1)!], in log-gamma form. This is an
// equality, not a bound, because the uniform density is constant.
inline double universal_wealth_exact_kelly(const KellyCounts& k,
                                           const PriorSpec& prior = {}) {
  prior.validate();
  if (prior.alpha != 1.0)
    throw std::invalid_argument(
        "universal_wealth_exact_kelly: closed form requires the uniform prior");
  double K = double(k.counts.size());
  double out = std::lgamma(K);
  for (std::int64_t n : k.counts) out += std::lgamma(double(n) + 1.0);
  out -= std::lgamma(double(k.total) + K);
  return out;
}

// ---------------------------------------------------------------------------
// Backtest driver
// ---------------------------------------------------------------------------

struct BacktestPeriod {
  std::size_t t = 0;
  double universal_log_wealth = 0.0;
  double hindsight_log_wealth = 0.0;
  double competitive_ratio_log = 0.0;
  double bound_log = 0.0;
  std::vector<double> strategy_tensor;  // averaged strategy after period t
  double ess = 0.0;
  // diagnostics, not serialized
  double universal_log_wealth_se = 0.0;
  double telescoping_residual = 0.0;
};

struct BacktestRecord {
  std::size_t m = 0;
  std::size_t order = 0;
  double prior_alpha = 1.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  std::vector<BacktestPeriod> periods;  // index 0 = prior state
  bool ruined = false;
  std::size_t ruin_period = 0;
  bool all_hindsight_converged = true;
};

// Runs the universal portfolio through the history (padding any trailing
// half-period), solving the hindsight benchmark on every prefix. The
// telescoping identity — accumulated log wealth vs. log mean particle
// wealth — is rechecked every period; a material residual means the
// estimator is broken, so it throws rather than record nonsense.
inline BacktestRecord run_universal_backtest(const MarketHistory& history,
                                             std::size_t order, PriorSpec prior = {},
                                             std::size_t n_samples = 100000,
                                             std::uint64_t seed = 42,
                                             double hindsight_tol = 1e-10,
                                             std::size_t hindsight_max_iter = 50000) {
  prior.validate();
  MarketHistory h = history;
  if (h.halves().size() % order != 0) {
    if (order == h.order()) {
      h = pad_incomplete(std::move(h));
    } else {
      throw std::invalid_argument(
          "run_universal_backtest: halves not divisible by order");
    }
  }
  const std::size_t m = h.num_assets();
  const std::size_t T = h.halves().size() / order;
  const double log_floor = prior.log_density_floor(m, order);

  auto rows = detail::growth_table(h, order);
  UniversalState state(m, order, prior, n_samples, seed);

  BacktestRecord rec;
  rec.m = m;
  rec.order = order;
  rec.prior_alpha = prior.alpha;
  rec.n_samples = n_samples;
  rec.seed = seed;

  auto snapshot = [&](std::size_t t, double hindsight_log) {
    BacktestPeriod row;
    row.t = t;
    row.universal_log_wealth = state.log_wealth();
    row.hindsight_log_wealth = hindsight_log;
    row.competitive_ratio_log =
        competitive_ratio(row.universal_log_wealth, hindsight_log).log_ratio;
    row.bound_log = log_ratio_lower_bound(m, order, t, log_floor);
    row.strategy_tensor = state.current_strategy().weights();
    row.ess = state.effective_sample_size();
    row.universal_log_wealth_se = state.log_mean_wealth_se();
    row.telescoping_residual =
        std::abs(state.log_wealth() - state.log_mean_particle_wealth());
    if (row.telescoping_residual > 1e-6)
      throw std::logic_error("universal backtest: telescoping identity violated");
    rec.periods.push_back(std::move(row));
  };

  snapshot(0, 0.0);
  for (std::size_t t = 1; t <= T; ++t) {
    state.step({h.halves().data() + (t - 1) * order, order});
    if (state.ruined()) {
      rec.ruined = true;
      rec.ruin_period = t;
      break;
    }
    auto opt = detail::maximize_log_linear({rows.data(), t},
                                           detail::checked_pow(m, order),
                                           hindsight_tol, hindsight_max_iter);
    rec.all_hindsight_converged = rec.all_hindsight_converged && opt.converged;
    snapshot(t, opt.log_objective);
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const BacktestRecord& rec) {
  nlohmann::json periods = nlohmann::json::array();
  for (const BacktestPeriod& p : rec.periods) {
    periods.push_back({{"t", p.t},
                       {"universal_log_wealth", p.universal_log_wealth},
                       {"hindsight_log_wealth", p.hindsight_log_wealth},
                       {"competitive_ratio_log", p.competitive_ratio_log},
                       {"bound_log", p.bound_log},
                       {"strategy_tensor", p.strategy_tensor},
                       {"ess", p.ess}});
  }
  return {{"meta",
           {{"m", rec.m},
            {"H", rec.order},
            {"prior_alpha", rec.prior_alpha},
            {"n_samples", rec.n_samples},
            {"seed", rec.seed}}},
          {"periods", periods}};
}

// Flat plot-ready mirror of the JSON record, one row per period.
inline void write_csv(const BacktestRecord& rec, std::ostream& os) {
  std::size_t K = rec.periods.empty() ? 0 : rec.periods.front().strategy_tensor.size();
  os << "t,universal_log_wealth,hindsight_log_wealth,competitive_ratio_log,bound_log,ess";
  for (std::size_t k = 0; k < K; ++k) os << ",w_" << k;
  os << "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << ',' << buf;
  };
  for (const BacktestPeriod& p : rec.periods) {
    os << p.t;
    put(p.universal_log_wealth);
    put(p.hindsight_log_wealth);
    put(p.competitive_ratio_log);
    put(p.bound_log);
    put(p.ess);
    for (double w : p.strategy_tensor) put(w);
    os << "\n";
  }
}

}  // namespace ubp

#endif  // UBP_UNIVERSAL_HPP
