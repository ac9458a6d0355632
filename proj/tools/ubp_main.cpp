// Command-line front end: CSV ingestion, universal-portfolio backtests,
// hindsight solves, competitive-ratio bound tables, and the hot-stock
// worked example.
//
// Exit codes: 0 ok, 2 input error, 3 ruin, 4 non-convergence.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ubp/ubp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitRuin = 3;
constexpr int kExitNonConvergence = 4;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ubp::MarketHistory load_history(const std::string& path, std::size_t order) {
  try {
    return ubp::parse_history(read_file(path), order);
  } catch (const ubp::ParseError& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + path);
  out << body;
}

struct BacktestOptions {
  std::string input;
  std::size_t order = 2;
  double prior_alpha = 1.0;
  std::size_t samples = 100000;
  std::uint64_t seed = 42;
  double tol = 1e-10;
  std::size_t max_iter = 50000;
  std::string output = "backtest.json";
  std::string format = "json";
};

int run_backtest(const BacktestOptions& opt) {
  ubp::MarketHistory h = load_history(opt.input, opt.order);
  ubp::BacktestRecord rec =
      ubp::run_universal_backtest(h, opt.order, ubp::PriorSpec{opt.prior_alpha},
                                  opt.samples, opt.seed, opt.tol, opt.max_iter);

  std::printf("%6s %16s %16s %14s %14s %12s\n", "t", "log_universal", "log_hindsight",
              "log_ratio", "log_bound", "ess");
  for (const auto& p : rec.periods) {
    std::printf("%6zu %16.8f %16.8f %14.8f %14.8f %12.1f\n", p.t,
                p.universal_log_wealth, p.hindsight_log_wealth,
                p.competitive_ratio_log, p.bound_log, p.ess);
  }

  if (!opt.output.empty()) {
    if (opt.format == "json") {
      write_text_file(opt.output, ubp::to_json(rec).dump(2) + "\n");
    } else {
      std::ostringstream ss;
      ubp::write_csv(rec, ss);
      write_text_file(opt.output, ss.str());
    }
    std::printf("wrote %s\n", opt.output.c_str());
  }

  if (rec.ruined) {
    std::cerr << "error: universal portfolio ruined in period " << rec.ruin_period
              << "\n";
    return kExitRuin;
  }
  if (!rec.all_hindsight_converged) {
    std::cerr << "error: a hindsight solve did not reach the gap tolerance\n";
    return kExitNonConvergence;
  }
  return kExitOk;
}

struct HindsightOptions {
  std::string input;
  std::size_t order = 2;
  double tol = 1e-10;
  std::size_t max_iter = 50000;
  std::string output;
};

int run_hindsight(const HindsightOptions& opt) {
  ubp::MarketHistory h = load_history(opt.input, opt.order);
  if (h.remainder() != 0) h = ubp::pad_incomplete(std::move(h));
  ubp::HindsightResult res = ubp::best_in_hindsight(h, opt.order, opt.tol, opt.max_iter);

  std::printf("periods:        %zu\n", h.halves().size() / opt.order);
  std::printf("log wealth:     %.12f\n", res.log_wealth);
  std::printf("wealth:         %.6g\n", std::exp(res.log_wealth));
  std::printf("iterations:     %zu\n", res.iterations);
  std::printf("gap:            %.3e\n", res.gap_certificate);
  std::printf("weights (plan -> fraction, 1-based assets):\n");
  for (const auto& term : ubp::extremal_decomposition(res.strategy)) {
    std::string plan;
    for (std::size_t i : term.indices) plan += std::to_string(i + 1) + ">";
    plan.pop_back();
    if (term.weight >= 1e-12)
      std::printf("  %-12s %.10f\n", plan.c_str(), term.weight);
  }

  if (!opt.output.empty())
    write_text_file(opt.output, ubp::to_json(res.strategy).dump(2) + "\n");
  return res.converged ? kExitOk : kExitNonConvergence;
}

struct BoundsOptions {
  std::size_t assets = 2;
  std::size_t order = 2;
  double prior_alpha = 1.0;
  std::vector<std::size_t> periods;
  std::size_t t_max = 0;
  std::string output;
};

int run_bounds(const BoundsOptions& opt) {
  std::vector<std::size_t> ts = opt.periods;
  if (ts.empty())
    for (std::size_t t = 0; t <= opt.t_max; ++t) ts.push_back(t);

  ubp::PriorSpec prior{opt.prior_alpha};
  double log_floor = prior.log_density_floor(opt.assets, opt.order);
  if (log_floor == ubp::kNegInf)
    std::printf("note: density floor is 0 for alpha > 1; bounds are vacuous\n");

  std::ostringstream csv;
  csv << "t,ratio_bound,ratio_bound_log,excess_growth_bound\n";
  std::printf("%8s %16s %16s %18s\n", "t", "ratio_bound", "log_bound",
              "excess_bound");
  for (std::size_t t : ts) {
    double lb = ubp::log_ratio_lower_bound(opt.assets, opt.order, t, log_floor);
    double eb = t > 0 ? ubp::excess_growth_bound(opt.assets, opt.order, t, log_floor)
                      : 0.0;
    std::printf("%8zu %16.8g %16.8f %18.8g\n", t, std::exp(lb), lb, eb);
    char line[128];
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g\n", t, std::exp(lb), lb, eb);
    csv << line;
  }
  if (!opt.output.empty()) write_text_file(opt.output, csv.str());
  return kExitOk;
}

struct ExampleOptions {
  std::string name;
  std::size_t periods = 12;
  std::string output = "hot_stock_figure.csv";
};

int run_example(const ExampleOptions& opt) {
  if (opt.name != "hot-stock") throw InputError("unknown example: " + opt.name);
  if (opt.periods < 1) throw InputError("example hot-stock: --periods must be >= 1");

  ubp::HotStockReport rep = ubp::hotstock_closed_forms(opt.periods);
  double log_crp_universal = ubp::hotstock_universal_crp_log_wealth(opt.periods);
  std::printf("hot stock vs. cash, %zu complete periods\n", opt.periods);
  std::printf("  universal bilinear wealth:   %.10g  (log %.10f)\n",
              std::exp(rep.log_universal_wealth), rep.log_universal_wealth);
  std::printf("  universal rebalanced wealth: %.10g  (log %.10f)\n",
              std::exp(log_crp_universal), log_crp_universal);
  std::printf("  perfect trader wealth:       %.10g  (log %.10f)\n",
              std::exp(rep.log_hindsight_wealth), rep.log_hindsight_wealth);
  std::printf("  best rebalanced in hindsight:%.10g  (log %.10f)\n",
              std::exp(rep.log_crp_wealth), rep.log_crp_wealth);
  std::printf("  competitive ratio:           %.10g  (log %.10f)\n",
              std::exp(rep.log_ratio), rep.log_ratio);
  std::printf("  averaged strategy:           [[%.6f, %.6f], [%.6f, %.6f]]\n",
              rep.weights[0], rep.weights[1], rep.weights[2], rep.weights[3]);

  std::ostringstream ss;
  ubp::write_hotstock_figure_csv(ss, opt.periods);
  write_text_file(opt.output, ss.str());
  std::printf("wrote %s\n", opt.output.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"universal multilinear portfolio toolkit"};
  app.require_subcommand(1);

  BacktestOptions bt;
  auto* cmd_bt = app.add_subcommand(
      "backtest", "run the universal portfolio over a gross-return CSV");
  cmd_bt->add_option("--input", bt.input, "CSV of gross returns")->required();
  cmd_bt->add_option("--order", bt.order, "half-periods per investment period")
      ->check(CLI::Range(std::size_t(1), std::size_t(8)));
  cmd_bt->add_option("--prior-alpha", bt.prior_alpha, "Dirichlet concentration");
  cmd_bt->add_option("--samples", bt.samples, "particle count")
      ->check(CLI::PositiveNumber);
  cmd_bt->add_option("--seed", bt.seed, "RNG seed");
  cmd_bt->add_option("--tol", bt.tol, "hindsight gap tolerance");
  cmd_bt->add_option("--max-iter", bt.max_iter, "hindsight iteration cap");
  cmd_bt->add_option("--output", bt.output, "record file (default backtest.json)");
  cmd_bt->add_option("--format", bt.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  HindsightOptions hs;
  auto* cmd_hs =
      app.add_subcommand("hindsight", "best strategy in hindsight for a CSV history");
  cmd_hs->add_option("--input", hs.input, "CSV of gross returns")->required();
  cmd_hs->add_option("--order", hs.order, "half-periods per investment period")
      ->check(CLI::Range(std::size_t(1), std::size_t(8)));
  cmd_hs->add_option("--tol", hs.tol, "gap tolerance");
  cmd_hs->add_option("--max-iter", hs.max_iter, "iteration cap");
  cmd_hs->add_option("--output", hs.output, "write the strategy as JSON");

  BoundsOptions bd;
  auto* cmd_bd =
      app.add_subcommand("bounds", "competitive-ratio lower-bound table");
  cmd_bd->add_option("--assets", bd.assets, "number of assets m")->required();
  cmd_bd->add_option("--order", bd.order, "half-periods per investment period");
  cmd_bd->add_option("--prior-alpha", bd.prior_alpha, "Dirichlet concentration");
  cmd_bd->add_option("--periods", bd.periods, "period counts T (repeatable)");
  cmd_bd->add_option("--t-max", bd.t_max, "tabulate T = 0..t-max");
  cmd_bd->add_option("--output", bd.output, "CSV output path");

  ExampleOptions ex;
  auto* cmd_ex = app.add_subcommand("example", "worked examples with exact answers");
  cmd_ex->add_option("name", ex.name, "example name (hot-stock)")->required();
  cmd_ex->add_option("--periods", ex.periods, "number of complete periods");
  cmd_ex->add_option("--output", ex.output, "trajectory CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help/usage
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (cmd_bt->parsed()) return run_backtest(bt);
    if (cmd_hs->parsed()) return run_hindsight(hs);
    if (cmd_bd->parsed()) return run_bounds(bd);
    if (cmd_ex->parsed()) return run_example(ex);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ubp::RuinError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuin;
  } catch (const std::domain_error& e) {
    // ruin conditions surface as domain errors from the library
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuin;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
