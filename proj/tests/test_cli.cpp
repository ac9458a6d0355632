#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ubp/hotstock.hpp"
#include "ubp/market_data.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

CmdResult run_cli(const std::string& args) {
  std::string cmd = std::string(UBP_CLI_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, out};
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("ubp_cli_test_" + name);
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path hotstock_csv(std::size_t t) {
  fs::path p = temp_file("hotstock_" + std::to_string(t) + ".csv");
  write_file(p, ubp::serialize_csv(ubp::hotstock_history(t)));
  return p;
}

}  // namespace

TEST_CASE("backtest summary ends near the known universal wealth") {
  fs::path csv = hotstock_csv(10);
  fs::path out = temp_file("bt10.json");
  CmdResult r = run_cli("backtest --input " + csv.string() + " --order 2 --samples 100000 --seed 42 --output " + out.string());
  REQUIRE(r.exit_code == 0);

  // final summary row: t = 10, log universal close to log 19.0117
  std::istringstream lines(r.output);
  std::string line, last_row;
  while (std::getline(lines, line))
    if (!line.empty() && line.substr(0, 6) == "    10") last_row = line;
  REQUIRE_FALSE(last_row.empty());
  std::istringstream row(last_row);
  double t, log_u;
  row >> t >> log_u;
  CHECK(t == 10.0);
  CHECK(log_u == Catch::Approx(std::log(19.011653873470)).margin(0.05));

  // record file: canonical JSON with the documented schema
  nlohmann::json j = nlohmann::json::parse(read_file(out));
  CHECK(j["meta"]["m"] == 2);
  CHECK(j["meta"]["H"] == 2);
  CHECK(j["meta"]["n_samples"] == 100000);
  CHECK(j["meta"]["seed"] == 42);
  CHECK(j["periods"].size() == 11);
}

TEST_CASE("backtest outputs are byte-identical across reruns") {
  fs::path csv = hotstock_csv(4);
  fs::path out1 = temp_file("bt_rep1.json");
  fs::path out2 = temp_file("bt_rep2.json");
  std::string base = "backtest --input " + csv.string() + " --samples 5000 --seed 7 --output ";
  REQUIRE(run_cli(base + out1.string()).exit_code == 0);
  REQUIRE(run_cli(base + out2.string()).exit_code == 0);
  CHECK(read_file(out1) == read_file(out2));
  CHECK_FALSE(read_file(out1).empty());
}

TEST_CASE("worker-thread cap does not change the output bytes") {
  fs::path csv = hotstock_csv(5);
  fs::path out1 = temp_file("bt_thr1.json");
  fs::path out4 = temp_file("bt_thr4.json");
  std::string tail = " --samples 40000 --seed 13 --output ";
  REQUIRE(run_cli("backtest --input " + csv.string() + tail + out1.string()).exit_code ==
          0);
  // rerun under a different thread cap
  std::string cmd4 = "UBP_THREADS=4 " + std::string(UBP_CLI_BIN) + " backtest --input " +
                     csv.string() + tail + out4.string() + " 2>&1";
  FILE* pipe = popen(cmd4.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::fread(buf, 1, sizeof buf, pipe) > 0) {
  }
  REQUIRE(WEXITSTATUS(pclose(pipe)) == 0);
  CHECK(read_file(out1) == read_file(out4));

  std::string cmd1 = "UBP_THREADS=1 " + std::string(UBP_CLI_BIN) + " backtest --input " +
                     csv.string() + tail + out4.string() + " 2>&1";
  pipe = popen(cmd1.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::fread(buf, 1, sizeof buf, pipe) > 0) {
  }
  REQUIRE(WEXITSTATUS(pclose(pipe)) == 0);
  CHECK(read_file(out1) == read_file(out4));
}

TEST_CASE("order-1 backtest tracks the universal rebalanced wealth") {
  fs::path csv = hotstock_csv(10);
  fs::path out = temp_file("bt_crp.csv");
  CmdResult r = run_cli("backtest --input " + csv.string() +
                        " --order 1 --samples 30000 --seed 42 --format csv --output " +
                        out.string());
  REQUIRE(r.exit_code == 0);

  // row for period 20 (= 10 complete hot-stock periods at order 1)
  std::istringstream lines(read_file(out));
  std::string line;
  std::getline(lines, line);  // header
  double log_u_final = 0.0;
  while (std::getline(lines, line)) {
    if (line.rfind("20,", 0) == 0) {
      std::istringstream row(line);
      std::string cell;
      std::getline(row, cell, ',');
      std::getline(row, cell, ',');
      log_u_final = std::strtod(cell.c_str(), nullptr);
    }
  }
  CHECK(log_u_final ==
        Catch::Approx(ubp::hotstock_universal_crp_log_wealth(10)).margin(0.05));
}

TEST_CASE("input errors exit with code 2") {
  fs::path empty = temp_file("empty.csv");
  write_file(empty, "");
  CHECK(run_cli("backtest --input " + empty.string()).exit_code == 2);

  fs::path headeronly = temp_file("headeronly.csv");
  write_file(headeronly, "a,b\n");
  CHECK(run_cli("backtest --input " + headeronly.string()).exit_code == 2);

  fs::path negative = temp_file("negative.csv");
  write_file(negative, "a,b\n1,1\n-2,1\n");
  CmdResult r = run_cli("backtest --input " + negative.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("row 3") != std::string::npos);

  CHECK(run_cli("backtest --input " + temp_file("missing.csv").string()).exit_code == 2);
}

TEST_CASE("non-convergence exits with code 4") {
  fs::path csv = hotstock_csv(3);
  CmdResult r = run_cli("hindsight --input " + csv.string() + " --max-iter 1");
  CHECK(r.exit_code == 4);
}

TEST_CASE("universal ruin exits with code 3") {
  // degenerate prior collapses both particles onto vertices; on a horse-race
  // period some seed kills them all
  fs::path csv = temp_file("horserace.csv");
  write_file(csv, "a,b\n1,0\n0,1\n");
  bool saw_ruin = false;
  for (int seed = 0; seed < 30 && !saw_ruin; ++seed) {
    CmdResult r = run_cli("backtest --input " + csv.string() +
                          " --samples 2 --prior-alpha 1e-9 --seed " +
                          std::to_string(seed) + " --output " +
                          temp_file("ruin.json").string());
    if (r.exit_code == 3) {
      saw_ruin = true;
      CHECK(r.output.find("ruin") != std::string::npos);
    } else {
      CHECK(r.exit_code == 0);
    }
  }
  CHECK(saw_ruin);
}

TEST_CASE("hindsight subcommand reports the winning plan") {
  fs::path csv = hotstock_csv(3);
  fs::path out = temp_file("strategy.json");
  CmdResult r = run_cli("hindsight --input " + csv.string() + " --output " + out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("1>2") != std::string::npos);
  CHECK(r.output.find("wealth:         8") != std::string::npos);

  nlohmann::json j = nlohmann::json::parse(read_file(out));
  CHECK(j["order"] == 2);
  CHECK(j["dim"] == 2);
  REQUIRE(j["weights"].size() == 4);
  CHECK(double(j["weights"][1]) == Catch::Approx(1.0).margin(1e-6));

  // a half-finished final period is padded, not rejected
  fs::path odd = temp_file("odd.csv");
  write_file(odd, "a,b\n2,1\n0.5,1\n2,1\n");
  CHECK(run_cli("hindsight --input " + odd.string()).exit_code == 0);
}

TEST_CASE("bounds subcommand tabulates the minorant") {
  CmdResult r = run_cli("bounds --assets 2 --order 2 --t-max 1");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("0.25") != std::string::npos);

  CmdResult r1 = run_cli("bounds --assets 2 --order 1 --periods 1");
  CHECK(r1.output.find("0.5") != std::string::npos);

  CmdResult vac = run_cli("bounds --assets 2 --order 2 --prior-alpha 2 --t-max 1");
  CHECK(vac.output.find("vacuous") != std::string::npos);

  fs::path out = temp_file("bounds.csv");
  REQUIRE(run_cli("bounds --assets 2 --order 2 --t-max 2 --output " + out.string())
              .exit_code == 0);
  std::string body = read_file(out);
  CHECK(body.rfind("t,ratio_bound,ratio_bound_log,excess_growth_bound\n", 0) == 0);
  CHECK(std::count(body.begin(), body.end(), '\n') == 4);
}

TEST_CASE("example subcommand writes the trajectory file") {
  fs::path out = temp_file("figure.csv");
  CmdResult r = run_cli("example hot-stock --periods 5 --output " + out.string());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("competitive ratio") != std::string::npos);
  std::string body = read_file(out);
  CHECK(std::count(body.begin(), body.end(), '\n') == 7);  // header + t=0..5
  CHECK(run_cli("example no-such-thing").exit_code == 2);
  CHECK(run_cli("example hot-stock --periods 0").exit_code == 2);
}
