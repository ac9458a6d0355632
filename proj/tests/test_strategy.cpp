#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "ubp/hotstock.hpp"
#include "ubp/market_data.hpp"
#include "ubp/strategy.hpp"

using namespace ubp;

namespace {

// random point on the K-simplex
std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t K) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> w(K);
  double sum = 0.0;
  for (auto& x : w) {
    x = ex(rng);
    sum += x;
  }
  for (auto& x : w) x /= sum;
  return w;
}

ReturnVector random_returns(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> unif(0.0, 3.0);
  std::vector<double> v(m);
  for (auto& x : v) x = unif(rng);
  v[rng() % m] += 0.1;
  return ReturnVector(v);
}

}  // namespace

TEST_CASE("strategy construction renormalizes small drift and rejects junk") {
  MultilinearStrategy b(2, 2, {0.25, 0.25, 0.25, 0.25 + 3e-10});
  double sum = 0.0;
  for (double w : b.weights()) sum += w;
  CHECK(sum == Catch::Approx(1.0).margin(1e-15));
  CHECK_THROWS_AS(MultilinearStrategy(2, 2, {0.5, 0.5, 0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(MultilinearStrategy(2, 2, {1.5, -0.5, 0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(MultilinearStrategy(2, 2, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("period_growth on the hot-stock period") {
  ReturnVector x({2.0, 1.0}), y({0.5, 1.0});
  std::vector<ReturnVector> halves{x, y};

  MultilinearStrategy ranch(2, 2, {0.0, 1.0, 0.0, 0.0});  // all-in stock, cash out
  CHECK(period_growth(ranch, halves) == Catch::Approx(2.0));

  MultilinearStrategy uniform = MultilinearStrategy::uniform(2, 2);
  CHECK(period_growth(uniform, halves) == Catch::Approx(1.125));

  ReturnVector ones({1.0, 1.0});
  std::vector<ReturnVector> flat{ones, ones};
  CHECK(period_growth(uniform, flat) == Catch::Approx(1.0));
  CHECK(period_growth(ranch, flat) == Catch::Approx(1.0));

  std::vector<ReturnVector> wrong{x};
  CHECK_THROWS_AS(period_growth(ranch, wrong), std::invalid_argument);
}

TEST_CASE("wealth accumulates logs and flags ruin") {
  MarketHistory h3 = hotstock_history(3);
  MultilinearStrategy ranch(2, 2, {0.0, 1.0, 0.0, 0.0});
  LogWealth lw = wealth(ranch, h3);
  CHECK_FALSE(lw.ruined);
  CHECK(lw.log_wealth == Catch::Approx(std::log(8.0)).epsilon(1e-14));

  // all-ones history: every growth factor is exactly 1
  MarketHistory ones(2, 2);
  for (int i = 0; i < 4; ++i) ones.append(ReturnVector({1.0, 1.0}));
  CHECK(wealth(MultilinearStrategy::uniform(2, 2), ones).log_wealth == 0.0);

  // best CRP on the hot stock: (1/2,1/2) gives (9/8)^t
  PortfolioVector half(std::vector<double>{0.5, 0.5});
  LogWealth crp = wealth(embed_crp(half, 2), hotstock_history(2));
  CHECK(crp.log_wealth == Catch::Approx(2.0 * std::log(9.0 / 8.0)).epsilon(1e-14));

  // ruin: all-in on an asset that dies
  MarketHistory dead(2, 2);
  dead.append(ReturnVector({0.0, 1.0}));
  dead.append(ReturnVector({1.0, 1.0}));
  MultilinearStrategy allin = MultilinearStrategy::vertex(
      2, 2, std::vector<std::size_t>{0, 0});
  LogWealth r = wealth(allin, dead);
  CHECK(r.ruined);
  CHECK(r.log_wealth == kNegInf);

  // incomplete histories must be padded first
  MarketHistory partial(2, 2);
  partial.append(ReturnVector({2.0, 1.0}));
  CHECK_THROWS_AS(wealth(allin, partial), std::invalid_argument);

  // empty history: initial deposit, log 1 = 0
  CHECK(wealth(allin, MarketHistory(2, 2)).log_wealth == 0.0);
}

TEST_CASE("embed_crp builds outer-product tensors") {
  PortfolioVector half(std::vector<double>{0.5, 0.5});
  MultilinearStrategy b = embed_crp(half, 2);
  for (double w : b.weights()) CHECK(w == Catch::Approx(0.25));

  PortfolioVector corner(std::vector<double>{1.0, 0.0});
  MultilinearStrategy v = embed_crp(corner, 3);
  CHECK(v[0] == 1.0);
  for (std::size_t k = 1; k < v.num_weights(); ++k) CHECK(v[k] == 0.0);

  PortfolioVector c(std::vector<double>{1.0 / 3.0, 2.0 / 3.0});
  MultilinearStrategy cc = embed_crp(c, 2);
  CHECK(cc.at({0, 0}) == Catch::Approx(1.0 / 9.0));
  CHECK(cc.at({0, 1}) == Catch::Approx(2.0 / 9.0));
  CHECK(cc.at({1, 0}) == Catch::Approx(2.0 / 9.0));
  CHECK(cc.at({1, 1}) == Catch::Approx(4.0 / 9.0));
}

TEST_CASE("embed_crp growth equals the rebalanced product") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t m = 2 + rng() % 3;
    std::size_t H = 1 + rng() % 3;
    PortfolioVector c(random_simplex(rng, m));
    MultilinearStrategy b = embed_crp(c, H);
    std::vector<ReturnVector> halves;
    double expected = 1.0;
    for (std::size_t h = 0; h < H; ++h) {
      halves.push_back(random_returns(rng, m));
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) dot += c[i] * halves.back()[i];
      expected *= dot;
    }
    CHECK(period_growth(b, halves) == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("embed_buy_and_hold is the diagonal embedding") {
  PortfolioVector half(std::vector<double>{0.5, 0.5});
  MultilinearStrategy d = embed_buy_and_hold(half);
  CHECK(d.at({0, 0}) == 0.5);
  CHECK(d.at({1, 1}) == 0.5);
  CHECK(d.at({0, 1}) == 0.0);

  PortfolioVector e2(std::vector<double>{0.0, 1.0});
  MultilinearStrategy corner = embed_buy_and_hold(e2);
  CHECK(corner.at({1, 1}) == 1.0);

  // both assets round-trip to 1 over a hot-stock period
  std::vector<ReturnVector> halves{ReturnVector({2.0, 1.0}), ReturnVector({0.5, 1.0})};
  CHECK(period_growth(d, halves) == Catch::Approx(1.0));

  // growth = c . (x o y) for random inputs
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t m = 2 + rng() % 3;
    PortfolioVector c(random_simplex(rng, m));
    ReturnVector x = random_returns(rng, m), y = random_returns(rng, m);
    double expected = 0.0;
    for (std::size_t i = 0; i < m; ++i) expected += c[i] * x[i] * y[i];
    std::vector<ReturnVector> hs{x, y};
    CHECK(period_growth(embed_buy_and_hold(c), hs) ==
          Catch::Approx(expected).margin(1e-14));
  }
}

TEST_CASE("replication portfolios satisfy the split-product identity") {
  MultilinearStrategy ranch(2, 2, {0.0, 1.0, 0.0, 0.0});
  ReplicationPair rp = replication_portfolios(ranch, ReturnVector({2.0, 1.0}));
  CHECK(rp.first_half[0] == Catch::Approx(1.0));
  CHECK(rp.first_half[1] == Catch::Approx(0.0));
  CHECK(rp.second_half[0] == Catch::Approx(0.0));
  CHECK(rp.second_half[1] == Catch::Approx(1.0));

  MultilinearStrategy uniform = MultilinearStrategy::uniform(2, 2);
  ReplicationPair ru = replication_portfolios(uniform, ReturnVector({1.0, 1.0}));
  CHECK(ru.first_half[0] == Catch::Approx(0.5));
  CHECK(ru.second_half[0] == Catch::Approx(0.5));

  // a rebalanced portfolio rebalances: q == c regardless of x
  PortfolioVector c(std::vector<double>{1.0 / 3.0, 2.0 / 3.0});
  MultilinearStrategy cc = embed_crp(c, 2);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    ReturnVector x = random_returns(rng, 2);
    ReplicationPair r = replication_portfolios(cc, x);
    CHECK(r.second_half[0] == Catch::Approx(c[0]).margin(1e-12));
    CHECK(r.second_half[1] == Catch::Approx(c[1]).margin(1e-12));
  }

  // first-half ruin is signaled
  MultilinearStrategy top(2, 2, {1.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(replication_portfolios(top, ReturnVector({0.0, 1.0})), RuinError);

  // only order 2 has a pinned-down replication
  CHECK_THROWS_AS(
      replication_portfolios(MultilinearStrategy::uniform(2, 3), ReturnVector({1.0, 1.0})),
      std::invalid_argument);
}

TEST_CASE("functional equation (p'x)(q'y) = x'By on random inputs") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t m = 2 + rng() % 4;
    MultilinearStrategy b(2, m, random_simplex(rng, m * m));
    ReturnVector x = random_returns(rng, m), y = random_returns(rng, m);
    double direct = period_growth(b, std::vector<ReturnVector>{x, y});
    ReplicationPair r = replication_portfolios(b, x);
    double px = 0.0, qy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      px += r.first_half[i] * x[i];
      qy += r.second_half[i] * y[i];
    }
    CHECK(px * qy == Catch::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("single-period growth is multilinear in each half") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> coef(0.1, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t m = 2 + rng() % 3;
    std::size_t H = 1 + rng() % 3;
    MultilinearStrategy b(H, m, random_simplex(rng, detail::checked_pow(m, H)));
    std::vector<ReturnVector> halves;
    for (std::size_t h = 0; h < H; ++h) halves.push_back(random_returns(rng, m));
    std::size_t slot = rng() % H;
    ReturnVector xa = random_returns(rng, m), xb = random_returns(rng, m);
    double alpha = coef(rng), beta = coef(rng);

    std::vector<double> mix(m);
    for (std::size_t i = 0; i < m; ++i) mix[i] = alpha * xa[i] + beta * xb[i];

    auto with = [&](const ReturnVector& v) {
      std::vector<ReturnVector> hs = halves;
      hs[slot] = v;
      return period_growth(b, hs);
    };
    CHECK(with(ReturnVector(mix)) ==
          Catch::Approx(alpha * with(xa) + beta * with(xb)).epsilon(1e-12));
  }
}

TEST_CASE("growth is linear in the strategy weights") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> mixw(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t m = 2 + rng() % 3;
    MultilinearStrategy b1(2, m, random_simplex(rng, m * m));
    MultilinearStrategy b2(2, m, random_simplex(rng, m * m));
    double lam = mixw(rng);
    std::vector<double> mixed(m * m);
    for (std::size_t k = 0; k < mixed.size(); ++k)
      mixed[k] = lam * b1[k] + (1.0 - lam) * b2[k];
    MultilinearStrategy bm(2, m, mixed);
    std::vector<ReturnVector> halves{random_returns(rng, m), random_returns(rng, m)};
    CHECK(period_growth(bm, halves) ==
          Catch::Approx(lam * period_growth(b1, halves) +
                        (1.0 - lam) * period_growth(b2, halves))
              .epsilon(1e-12));
  }
}

TEST_CASE("extremal decomposition lists nonzero plans and reassembles exactly") {
  MultilinearStrategy ranch(2, 2, {0.0, 1.0, 0.0, 0.0});
  auto terms = extremal_decomposition(ranch);
  REQUIRE(terms.size() == 1);
  CHECK(terms[0].indices == std::vector<std::size_t>{0, 1});
  CHECK(terms[0].weight == 1.0);

  auto uterms = extremal_decomposition(MultilinearStrategy::uniform(2, 2));
  REQUIRE(uterms.size() == 4);
  for (const auto& t : uterms) CHECK(t.weight == 0.25);

  PortfolioVector half(std::vector<double>{0.5, 0.5});
  auto dterms = extremal_decomposition(embed_buy_and_hold(half));
  REQUIRE(dterms.size() == 2);
  CHECK(dterms[0].indices == std::vector<std::size_t>{0, 0});
  CHECK(dterms[1].indices == std::vector<std::size_t>{1, 1});

  // exact reconstruction
  std::mt19937_64 rng(31);
  MultilinearStrategy b(2, 3, random_simplex(rng, 9));
  std::vector<double> rebuilt(9, 0.0);
  for (const auto& term : extremal_decomposition(b))
    rebuilt[MultilinearStrategy::flat_index(3, term.indices)] += term.weight;
  for (std::size_t k = 0; k < 9; ++k) CHECK(rebuilt[k] == b[k]);
}

TEST_CASE("strategy JSON round trip") {
  std::mt19937_64 rng(37);
  MultilinearStrategy b(3, 2, random_simplex(rng, 8));
  MultilinearStrategy back = strategy_from_json(to_json(b));
  CHECK(back.order() == b.order());
  CHECK(back.dim() == b.dim());
  for (std::size_t k = 0; k < b.num_weights(); ++k)
    CHECK(back[k] == Catch::Approx(b[k]).margin(1e-15));
}
