#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bcsgap/commands.hpp"
#include "bcsgap/io.hpp"
#include "support.hpp"

using namespace bcsgap;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bcsgap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bcsgap_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config(const char* name) { return (bcsgap::testing::config_dir() / name).string(); }

}  // namespace

TEST_CASE("help and parse errors") {
  const Run help = cli({"--help"});
  CHECK(help.code == exit_ok);
  CHECK(help.out.find("Exit codes") != std::string::npos);
  CHECK(help.out.find("grid.t_nodes") != std::string::npos);
  CHECK(cli({}).code == exit_parse);
  CHECK(cli({"frobnicate"}).code == exit_parse);
  CHECK(cli({"tc", "--format", "xml"}).code == exit_parse);
  CHECK(cli({"tc", "--config", "/nonexistent.toml"}).code == exit_parse);

  const fs::path dir = scratch("bad_toml");
  std::ofstream(dir / "bad.toml") << "[model\nepsilon = 1\n";
  const Run bad = cli({"check", "--config", (dir / "bad.toml").string()});
  CHECK(bad.code == exit_parse);
  CHECK(bad.err.find("error") != std::string::npos);
}

TEST_CASE("check and tc report on the example configuration") {
  const Run c = cli({"check", "--config", config("constant_u03.toml")});
  CHECK(c.code == exit_ok);
  CHECK(c.out.find("T0") != std::string::npos);
  const Run t = cli({"tc", "--config", config("constant_u03.toml"), "--format", "json"});
  REQUIRE(t.code == exit_ok);
  const auto j = nlohmann::json::parse(t.out);
  CHECK(j["tc"].get<double>() == doctest::Approx(0.0399463917135).epsilon(1e-10));
}

TEST_CASE("exit codes for hypothesis failure, missing transition and non-convergence") {
  const fs::path dir = scratch("codes");
  CHECK(cli({"check", "--set", "potential.value=-0.1"}).code == exit_hypothesis);
  CHECK(cli({"tc", "--set", "potential.value=0.1"}).code == exit_no_transition);
  const Run nc = cli({"solve", "--config", config("separable.toml"), "--out", dir.string(), "--set",
                      "solver.max_iterations=3"});
  CHECK(nc.code == exit_non_convergence);
  CHECK(fs::exists(dir / "field.partial.csv"));
  const auto report = nlohmann::json::parse(slurp(dir / "solve_report.json"));
  CHECK(report["partial"].get<bool>());
  CHECK_FALSE(report["converged"].get<bool>());
}

TEST_CASE("solve output is byte-identical across reruns and thread counts") {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  REQUIRE(cli({"solve", "--config", config("separable.toml"), "--out", a.string(), "--threads", "1"}).code == exit_ok);
  REQUIRE(cli({"solve", "--config", config("separable.toml"), "--out", b.string(), "--threads", "3"}).code == exit_ok);
  CHECK(slurp(a / "field.csv") == slurp(b / "field.csv"));
  CHECK(slurp(a / "solve_report.json") == slurp(b / "solve_report.json"));
  const auto report = nlohmann::json::parse(slurp(a / "solve_report.json"));
  CHECK(report["converged"].get<bool>());
  CHECK(report["w_audit"]["pass"].get<bool>());
  CHECK(report["slope_at_tc"]["minus_f_T"].size() == 64);
  CHECK(report["slope_at_tc"]["minus_f_T"][0].get<double>() > 0);
}

TEST_CASE("doubling the quadrature order barely moves the constant-potential field") {
  const fs::path a = scratch("order64"), b = scratch("order128");
  REQUIRE(cli({"solve", "--config", config("constant_u03.toml"), "--out", a.string()}).code == exit_ok);
  REQUIRE(cli({"solve", "--config", config("constant_u03.toml"), "--out", b.string(), "--set",
               "grid.quadrature_order=128"})
              .code == exit_ok);
  const ModelParams m{1e-3, 1.0};
  std::ifstream fa(a / "field.csv"), fb(b / "field.csv");
  const GapField f64 = read_field_csv(fa, energy_rule(m, 64));
  const GapField f128 = read_field_csv(fb, energy_rule(m, 128));
  const double d20 = std::sqrt(f64.values.maxCoeff());
  // the field is x-independent, so compare the first column row by row
  const double diff = (f64.values.col(0) - f128.values.col(0)).cwiseAbs().maxCoeff();
  CHECK(diff <= 1e-8 * d20 * d20);
}

TEST_CASE("thermo on a stored field, and the verdict exit codes") {
  const fs::path dir = scratch("thermo");
  REQUIRE(cli({"solve", "--config", config("constant_weak.toml"), "--out", dir.string()}).code == exit_ok);
  const std::string field = (dir / "field.csv").string();
  const Run t = cli({"thermo", "--config", config("constant_weak.toml"), "--out", dir.string(), "--field", field});
  CHECK(t.code == exit_ok);
  const auto verdict = nlohmann::json::parse(slurp(dir / "verdict.json"));
  CHECK(verdict["classification"] == "second_order");
  CHECK(slurp(dir / "thermo.csv").rfind("T,omega_diff,entropy_diff,specific_heat_diff\n", 0) == 0);

  const Run above = cli({"thermo", "--config", config("constant_weak.toml"), "--out", dir.string(), "--field", field,
                         "--set", "thermo.center=1.5"});
  CHECK(above.code == exit_inconclusive);
  CHECK(nlohmann::json::parse(slurp(dir / "verdict.json"))["classification"] == "inconclusive");

  // a field from another configuration is refused
  const Run other = cli({"thermo", "--config", config("constant_u03.toml"), "--out", dir.string(), "--field", field});
  CHECK(other.code == exit_parse);
}

TEST_CASE("sweep records every row and isolates failures") {
  const fs::path dir = scratch("sweep");
  const Run s = cli({"sweep", "--config", config("constant_weak.toml"), "--out", dir.string(), "--parameter",
                     "coupling", "--values", "0.9,1.0,1.1,-1"});
  CHECK(s.code == exit_ok);
  std::istringstream csv(slurp(dir / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "coupling,status,tc,delta2_at_zero,jump,jump_over_c_normal,classification,message");
  std::vector<double> tcs;
  std::vector<std::string> status;
  while (std::getline(csv, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    status.push_back(cells.at(1));
    if (cells[1] == "ok") {
      tcs.push_back(parse_double(cells[2]));
      const double ratio = 2 * parse_double(cells[3]) / tcs.back();
      CHECK(ratio > 3.4);
      CHECK(ratio < 3.7);
      CHECK(cells[6] == "second_order");
    }
  }
  CHECK(status == std::vector<std::string>{"ok", "ok", "ok", "failed"});
  REQUIRE(tcs.size() == 3);
  CHECK(tcs[0] < tcs[1]);
  CHECK(tcs[1] < tcs[2]);
  CHECK(cli({"sweep", "--parameter", "colour", "--values", "1"}).code == exit_parse);
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ConfigError("x")) == exit_parse);
  CHECK(exit_code_for(PreconditionError("x")) == exit_parse);
  CHECK(exit_code_for(HypothesisError("x")) == exit_hypothesis);
  CHECK(exit_code_for(NoTransitionError("x")) == exit_no_transition);
  CHECK(exit_code_for(NoSolutionError("x")) == exit_no_transition);
  CHECK(exit_code_for(ConvergenceError("x", 0, 0)) == exit_non_convergence);
}
