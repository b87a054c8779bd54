#include <doctest.h>

#include <sstream>

#include "bcsgap/config.hpp"
#include "bcsgap/io.hpp"
#include "support.hpp"

using namespace bcsgap;
using bcsgap::testing::Gen;

TEST_CASE("decimal formatting round-trips every double bit for bit") {
  Gen gen(99);
  for (int i = 0; i < 20000; ++i) {
    const double v = gen.any_finite();
    CHECK(parse_double(format_double(v)) == v);
    CHECK(parse_double(format_short(v)) == v);
  }
  for (double v : {0.0, -0.0, 5e-324, 1.7976931348623157e308, 0.1, 1.0 / 3.0}) {
    CHECK(parse_double(format_double(v)) == v);
    CHECK(std::signbit(parse_double(format_double(v))) == std::signbit(v));
  }
  CHECK(format_short(0.1) == "0.1");
  CHECK(parse_double(" +2.5\r") == 2.5);
  CHECK_THROWS_AS(parse_double("1.0x"), ConfigError);
  CHECK_THROWS_AS(parse_double(""), ConfigError);
}

TEST_CASE("field CSV round trip is exact") {
  const ModelParams m{1e-3, 1.0};
  const Rule r = energy_rule(m, 16);
  GapField f = GapField::zeros(make_grid(0.02, 0.04, 16, r));
  Gen gen(7);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values.data()[i] = gen.log_uniform(1e-12, 1e-2);
  std::stringstream ss;
  write_field_csv(ss, f);
  const GapField back = read_field_csv(ss, r);
  CHECK(back.values == f.values);
  CHECK(back.grid.t_nodes == f.grid.t_nodes);
  CHECK_FALSE(back.converged);

  std::stringstream again;
  write_field_csv(again, f);
  CHECK_THROWS_AS(read_field_csv(again, energy_rule(m, 17)), ConfigError);
}

TEST_CASE("malformed CSV input") {
  const Rule r = energy_rule(ModelParams{}, 16);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_table_csv(empty), ConfigError);
  std::istringstream ragged("c,1,2\n0.5,1\n");
  CHECK_THROWS_AS(read_table_csv(ragged), ConfigError);
  std::istringstream text("c,1,2\n0.5,1,oops\n");
  CHECK_THROWS_AS(read_table_csv(text), ConfigError);

  std::ostringstream head;
  head << "T/x";
  for (Eigen::Index j = 0; j < r.size(); ++j) head << ',' << format_double(r.nodes[j]);
  std::ostringstream row;
  row << head.str() << '\n';
  for (int i = 0; i < 16; ++i) {
    row << format_double(0.01 * (i + 1));
    for (Eigen::Index j = 0; j < r.size(); ++j) row << ',' << (i == 3 && j == 2 ? "-1" : "0.5");
    row << '\n';
  }
  std::istringstream neg(row.str());
  CHECK_THROWS_AS(read_field_csv(neg, r), ConfigError);
}

TEST_CASE("potential table CSV orientation") {
  std::istringstream in("x/xi,0,1\n0,1,2\n1,3,4\n");
  const PotentialTable t = read_potential_table_csv(in);
  CHECK(t.x == std::vector<double>{0, 1});
  CHECK(t.xi == std::vector<double>{0, 1});
  CHECK(t.values(1, 0) == 3);
  CHECK(Potential::table(t)(1.0, 0.0) == 3);
}

TEST_CASE("configuration defaults and parsing") {
  const RunConfig d = parse_config("");
  CHECK(d.model.epsilon == 1e-3);
  CHECK(d.model.debye == 1.0);
  CHECK(d.potential.kind == "constant");
  CHECK(d.grid.t_nodes == 64);
  CHECK(d.grid.quadrature_order == 64);
  CHECK(d.solver.relative_tolerance == 1e-10);
  CHECK(d.thermo.samples == 16);
  CHECK(d.format == OutputFormat::csv);

  const RunConfig c = parse_config(R"(
threads = 2
[model]
epsilon = 1e-4
[potential]
kind = "separable"
left = { poly = [0.5, 0.1], sin = 0.2, frequency = 3.0 }
coupling = 2.0
[grid]
t_nodes = 32
[output]
format = "json"
)");
  CHECK(c.threads == 2);
  CHECK(c.model.epsilon == 1e-4);
  CHECK(c.potential.left.poly == std::vector<double>{0.5, 0.1});
  CHECK(c.potential.right.poly == c.potential.left.poly);
  CHECK(c.grid.t_nodes == 32);
  CHECK(c.format == OutputFormat::json);
  const Potential p = c.potential.build();
  const double gx = 0.5 + 0.1 * 0.3 + 0.2 * std::sin(0.9);
  const double gy = 0.5 + 0.1 * 0.6 + 0.2 * std::sin(1.8);
  CHECK(p(0.3, 0.6) == doctest::Approx(2.0 * gx * gy));

  const RunConfig k = parse_config("[potential]\nkind = \"polynomial-kernel\"\ncoefficients = [[0.3, 0.01], [0.02, 0.0]]\n");
  CHECK(k.potential.build()(0.5, 0.5) == doctest::Approx(0.3 + 0.005 + 0.01));
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(parse_config("[model]\nepsilon = "), ConfigError);
  CHECK_THROWS_AS(parse_config("[model]\nepsilonn = 1e-3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nonsense]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grid]\nt_nodes = \"many\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grid]\nt_nodes = 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[model]\nepsilon = 2.0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[potential]\nkind = \"mystery\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[output]\nformat = \"xml\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[thermo]\nsamples = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[potential]\nkind = \"table\"\nfile = \"missing.csv\"\n").potential.build(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), ConfigError);
}

TEST_CASE("overrides use TOML value syntax") {
  RunConfig c = parse_config("");
  apply_overrides(c, {"potential.value=0.25", "grid.t_nodes=32", "output.format=\"json\""});
  CHECK(c.potential.value == 0.25);
  CHECK(c.grid.t_nodes == 32);
  CHECK(c.format == OutputFormat::json);
  CHECK_THROWS_AS(apply_overrides(c, {"nonsense"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(c, {"grid.nodes=3"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(c, {"grid.t_nodes=2"}), ConfigError);
}

TEST_CASE("shipped configs load, with table paths relative to the config file") {
  const auto files = bcsgap::testing::shipped_configs();
  CHECK(files.size() >= 5);
  for (const auto& f : files) {
    CAPTURE(f.string());
    const RunConfig c = load_config(f);
    CHECK_NOTHROW(c.potential.build());
  }
  const RunConfig t = load_config(bcsgap::testing::config_dir() / "table.toml");
  CHECK(t.potential.build()(0.5, 0.5) == doctest::Approx(0.28 + 0.04 * 0.25).epsilon(1e-12));
}

TEST_CASE("defaults description lists every section") {
  const std::string d = describe_defaults();
  for (const char* key : {"model.epsilon", "grid.t_nodes", "solver.relative_tolerance", "thermo.samples",
                          "hypotheses.t0_safety", "output.directory"})
    CHECK(d.find(key) != std::string::npos);
}
