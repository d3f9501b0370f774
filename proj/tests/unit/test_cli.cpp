#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / fmt::format("fbcomm_cli_{}", ::getpid());
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::string& args) {
  const fs::path out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string cmd =
      fmt::format("{} {} > {} 2> {}", FBCOMM_CLI_PATH, args, out.string(), err.string());
  const int status = std::system(cmd.c_str());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string write_config(const std::string& name, const std::string& text) {
  const fs::path p = workdir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const char* kSchedule = R"(
[schedule]
T = 8
a = 0.9
b = 1
P = 1
N = 1
N_f = 0.1
V_xx0 = 1
)";

}  // namespace

TEST_CASE("predict: example manifest reaches the closed-form fixed point") {
  const Result r = run(fmt::format("run {}", FBCOMM_EXAMPLE_CONFIG));
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 51);
  CHECK(rows[0][0] == "t");
  CHECK(rows[50][0] == "50");
  CHECK(std::abs(std::stod(rows[50][1]) - 8.0 / 7.0) < 1e-6);
  CHECK(rows[50][4] == "nan");
}

TEST_CASE("stationarity: equality case is unbounded with exit 3") {
  const Result r = run(fmt::format(
      "run {} --mode stationarity --set schedule.a=2 --set schedule.P=3", FBCOMM_EXAMPLE_CONFIG));
  CHECK(r.code == 3);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["bounded"] == false);
  CHECK(j["capacity"].get<double>() == 1.0);
  CHECK(j["fixed_point"].is_null());

  const Result ok = run(fmt::format("run {} --mode stationarity", FBCOMM_EXAMPLE_CONFIG));
  CHECK(ok.code == 0);
  CHECK(nlohmann::json::parse(ok.out)["fixed_point"]["sigma2"].get<double>() ==
        doctest::Approx(8.0 / 7.0));
}

TEST_CASE("invalid input exits 2 and names the problem") {
  const std::string cfg = write_config("missing_n.ini", "[schedule]\nT = 3\na = 1\nb = 1\nP = 1\n"
                                                        "N_f = 0\nV_xx0 = 1\n");
  const Result r = run("run " + cfg);
  CHECK(r.code == 2);
  CHECK(r.err.find("schedule.N") != std::string::npos);

  CHECK(run(fmt::format("run {} --mode sketch", FBCOMM_EXAMPLE_CONFIG)).code == 2);
  CHECK(run(fmt::format("run {} --set schedule.colour=1", FBCOMM_EXAMPLE_CONFIG)).code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run(fmt::format("run {} --mode oracle", FBCOMM_EXAMPLE_CONFIG)).code == 2);  // T = 50
}

TEST_CASE("I/O failures exit 1") {
  CHECK(run("run /nonexistent/config.ini").code == 1);
  CHECK(run(fmt::format("run {} -o /nonexistent/dir/out.csv", FBCOMM_EXAMPLE_CONFIG)).code == 1);
}

TEST_CASE("emitted numbers round-trip at full precision") {
  const std::string out = (workdir() / "sim.csv").string();
  const std::string cfg = write_config("sim.ini", kSchedule);
  REQUIRE(run(fmt::format("run {} --mode simulate --trials 2000 --seed 5 -o {}", cfg, out)).code == 0);
  const auto rows = csv_rows(slurp(out));
  REQUIRE(rows.size() == 9);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    for (std::size_t c = 1; c < rows[i].size(); ++c) {
      const double v = std::strtod(rows[i][c].c_str(), nullptr);
      CHECK(fmt::format("{:.17g}", v) == rows[i][c]);
    }
  }
}

TEST_CASE("identical seeds give identical artifacts") {
  const std::string cfg = write_config("det.ini", kSchedule);
  const std::string a = (workdir() / "a.csv").string(), b = (workdir() / "b.csv").string();
  REQUIRE(run(fmt::format("run {} --mode simulate --trials 3000 --seed 9 -o {}", cfg, a)).code == 0);
  REQUIRE(run(fmt::format("run {} --mode simulate --trials 3000 --seed 9 -o {}", cfg, b)).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK_FALSE(slurp(a).empty());
}

TEST_CASE("oracle mode") {
  const std::string cfg = write_config("oracle.ini", kSchedule);
  const Result r = run(fmt::format("run {} --mode oracle", cfg));
  REQUIRE(r.code == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == std::vector<std::string>{"t", "pred_mse", "oracle_scheme_mse",
                                            "oracle_conditional_mse"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::abs(std::stod(rows[i][1]) - std::stod(rows[i][2])) < 1e-9);
  }
}

TEST_CASE("compare joins every column and sweeps feedback noise") {
  const std::string cfg =
      write_config("cmp.ini", std::string(kSchedule) + "[sweep]\nN_f = 1, 0, inf, 0.1\n");
  const std::string out = (workdir() / "cmp.csv").string();
  const Result r = run(fmt::format("compare {} --trials 20000 --seed 2 -o {}", cfg, out));
  REQUIRE(r.code == 0);
  CHECK(r.err.find("max_mse_z=") != std::string::npos);
  const auto rows = csv_rows(slurp(out));
  REQUIRE(rows.size() == 9);
  CHECK(rows[0].size() == 9);
  CHECK(rows[0][7] == "oracle_scheme_mse");
  const auto j = nlohmann::json::parse(slurp(out + ".summary.json"));
  CHECK(j["sweep_monotone_nondecreasing"] == true);
  CHECK(j["sweep"].size() == 4);
  CHECK(j["max_zpow_z"].get<double>() < 4.0);
  CHECK(j["max_oracle_scheme_deviation"].get<double>() < 1e-9);

  const std::string empty = write_config("empty.ini", std::string(kSchedule) + "[sweep]\nN_f =\n");
  CHECK(run("compare " + empty).code == 2);
  CHECK(run(fmt::format("compare {} --mode predict", cfg)).code == 2);
}

TEST_CASE("golden compare runs") {
  struct Golden {
    const char* regime;
    const char* N_f;
    const char* emp_mse_T;
  };
  const Golden cases[] = {
      {"output-feedback", "0.1", "1.7474660396081849"},
      {"noiseless-feedback", "0", "1.6620196114484287"},
      {"state-estimate-feedback", "0.5", "2.0088484759161469"},
  };
  const std::string cfg = write_config("golden.ini", kSchedule);
  for (const Golden& g : cases) {
    const std::string out = (workdir() / "golden.csv").string();
    REQUIRE(run(fmt::format("compare {} --regime {} --set schedule.N_f={} --trials 4000 "
                            "--seed 2024 -o {}",
                            cfg, g.regime, g.N_f, out))
                .code == 0);
    const auto rows = csv_rows(slurp(out));
    CHECK(rows.back()[4] == g.emp_mse_T);
  }
}
