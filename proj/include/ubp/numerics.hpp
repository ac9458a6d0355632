#ifndef UBP_NUMERICS_HPP
#define UBP_NUMERICS_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ubp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; handles -inf operands.
inline double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// log(sum_i exp(v_i)); returns -inf on an empty or all-(-inf) input.
inline double log_sum_exp(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  double m = *std::max_element(v.begin(), v.end());
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre rules on [0,1]
// ---------------------------------------------------------------------------

struct GaussRule {
  std::vector<double> nodes;    // in (0,1)
  std::vector<double> weights;  // sum to 1
};

namespace detail {

// Legendre P_n and P_n' at x via the three-term recurrence.
inline std::pair<double, double> legendre_pd(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double d = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, d};
}

inline GaussRule make_gauss_rule(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, d] = legendre_pd(n, x);
      double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, d] = legendre_pd(n, x);
    (void)p;
    double w = 2.0 / ((1.0 - x * x) * d * d);
    // map [-1,1] -> [0,1]
    r.nodes[n - 1 - k] = 0.5 * (x + 1.0);
    r.weights[n - 1 - k] = 0.5 * w;
  }
  return r;
}

}  // namespace detail

// Cached n-point Gauss-Legendre rule on [0,1]. Exact for polynomials of
// degree <= 2n-1.
inline const GaussRule& gauss_legendre_01(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01: n must be >= 1");
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::make_gauss_rule(n)).first;
  return it->second;
}

// ---------------------------------------------------------------------------
// Worker-thread control
// ---------------------------------------------------------------------------

// Worker cap: UBP_THREADS env var if set, else hardware concurrency.
inline unsigned max_worker_threads() {
  if (const char* env = std::getenv("UBP_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

// Runs fn(chunk_index, begin, end) over fixed-size chunks of [0, count).
// Chunk boundaries depend only on chunk_size, never on the thread count, so
// per-chunk partial results combined in chunk order are bit-reproducible.
template <typename Fn>
void for_each_chunk(std::size_t count, std::size_t chunk_size, Fn&& fn) {
  if (count == 0) return;
  std::size_t n_chunks = (count + chunk_size - 1) / chunk_size;
  unsigned n_threads = std::min<std::size_t>(max_worker_threads(), n_chunks);
  if (n_threads <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c)
      fn(c, c * chunk_size, std::min(count, (c + 1) * chunk_size));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c, c * chunk_size, std::min(count, (c + 1) * chunk_size));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads - 1);
  for (unsigned i = 0; i + 1 < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace ubp

#endif  // UBP_NUMERICS_HPP
