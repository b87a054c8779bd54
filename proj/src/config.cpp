#include "bcsgap/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "bcsgap/io.hpp"

namespace bcsgap {

namespace fs = std::filesystem;

Potential PotentialSpec::build() const {
  if (kind == "constant") return Potential::constant(coupling * value);
  if (kind == "separable") return Potential::separable(left, right, coupling * offset, coupling * scale);
  if (kind == "polynomial-kernel") {
    if (coefficients.size() == 0) throw ConfigError("potential: polynomial-kernel needs coefficients");
    return Potential::polynomial_kernel(coupling * coefficients);
  }
  if (kind == "table") {
    std::ifstream in(table);
    if (!in) throw ConfigError("potential: cannot open table " + table.string());
    return Potential::table(read_potential_table_csv(in)).scaled(coupling);
  }
  throw ConfigError("potential: unknown kind '" + kind + "'");
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (!(model.epsilon > 0) || !(model.debye > model.epsilon)) fail("need 0 < model.epsilon < model.debye");
  if (grid.t_nodes < 16) fail("grid.t_nodes must be at least 16");
  if (grid.quadrature_order < 16) fail("grid.quadrature_order must be at least 16");
  if (grid.panels < 1) fail("grid.panels must be positive");
  if (!(grid.t_lower > 0 && grid.t_lower < 1)) fail("grid.t_lower must lie in (0, 1)");
  if (solver.tolerance < 0) fail("solver.tolerance must be non-negative");
  if (!(solver.tolerance > 0) && !(solver.relative_tolerance > 0)) fail("solver tolerance must be positive");
  if (solver.max_iterations < 1) fail("solver.max_iterations must be positive");
  if (!(solver.damping_floor > 0 && solver.damping_floor <= 1)) fail("solver.damping_floor must lie in (0, 1]");
  if (!(solver.initial_scale > 0)) fail("solver.initial_scale must be positive");
  if (!(t0_safety >= 1)) fail("hypotheses.t0_safety must be at least 1");
  if (!(thermo.half_width > 0 && thermo.half_width < 1)) fail("thermo.half_width must lie in (0, 1)");
  if (thermo.samples < 8) fail("thermo.samples must be at least 8");
  if (!(thermo.center - thermo.half_width > 0)) fail("thermo window must stay above T = 0");
  if (threads < 0) fail("threads must be non-negative");
  static const std::set<std::string> kinds{"constant", "separable", "polynomial-kernel", "table"};
  if (!kinds.count(potential.kind)) fail("unknown potential.kind '" + potential.kind + "'");
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError("config: " + key + ": " + what);
}

void check_keys(const toml::table& t, const std::string& section, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : t) {
    (void)v;
    if (!allowed.count(std::string(k.str())))
      bad(section.empty() ? std::string(k.str()) : section + "." + std::string(k.str()), "unknown key");
  }
}

void read(const toml::table& t, const char* key, const std::string& sec, double& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (auto v = n->value<double>(); v && (n->is_floating_point() || n->is_integer()))
    out = *v;
  else
    bad(sec + "." + key, "expected a number");
}

void read(const toml::table& t, const char* key, const std::string& sec, int& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_integer()) bad(sec + "." + key, "expected an integer");
  out = int(*n->value<std::int64_t>());
}

void read(const toml::table& t, const char* key, const std::string& sec, std::string& out) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (!n->is_string()) bad(sec + "." + key, "expected a string");
  out = *n->value<std::string>();
}

std::vector<double> numbers(const toml::node& n, const std::string& key) {
  const toml::array* a = n.as_array();
  if (!a) bad(key, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *a) {
    auto v = e.value<double>();
    if (!v || !(e.is_integer() || e.is_floating_point())) bad(key, "expected an array of numbers");
    out.push_back(*v);
  }
  return out;
}

Factor read_factor(const toml::node& n, const std::string& key) {
  const toml::table* t = n.as_table();
  if (!t) bad(key, "expected a table {poly, sin, cos, frequency}");
  check_keys(*t, key, {"poly", "sin", "cos", "frequency"});
  Factor f;
  if (const toml::node* p = t->get("poly")) f.poly = numbers(*p, key + ".poly");
  read(*t, "sin", key, f.sin_amplitude);
  read(*t, "cos", key, f.cos_amplitude);
  read(*t, "frequency", key, f.frequency);
  return f;
}

const toml::table* section(const toml::table& root, const char* name) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) bad(name, "expected a table");
  return n->as_table();
}

void apply_table(RunConfig& cfg, const toml::table& root, const fs::path& base) {
  check_keys(root, "", {"model", "potential", "grid", "solver", "hypotheses", "thermo", "output", "threads"});
  if (const toml::node* n = root.get("threads")) {
    if (!n->is_integer()) bad("threads", "expected an integer");
    cfg.threads = int(*n->value<std::int64_t>());
  }
  if (auto* t = section(root, "model")) {
    check_keys(*t, "model", {"epsilon", "debye"});
    read(*t, "epsilon", "model", cfg.model.epsilon);
    read(*t, "debye", "model", cfg.model.debye);
  }
  if (auto* t = section(root, "potential")) {
    check_keys(*t, "potential",
               {"kind", "value", "left", "right", "offset", "scale", "coefficients", "file", "coupling"});
    auto& p = cfg.potential;
    read(*t, "kind", "potential", p.kind);
    read(*t, "value", "potential", p.value);
    read(*t, "offset", "potential", p.offset);
    read(*t, "scale", "potential", p.scale);
    read(*t, "coupling", "potential", p.coupling);
    if (const toml::node* n = t->get("left")) {
      p.left = read_factor(*n, "potential.left");
      if (!t->get("right")) p.right = p.left;
    }
    if (const toml::node* n = t->get("right")) p.right = read_factor(*n, "potential.right");
    if (const toml::node* n = t->get("coefficients")) {
      const toml::array* rows = n->as_array();
      if (!rows || rows->empty()) bad("potential.coefficients", "expected an array of rows");
      std::vector<std::vector<double>> m;
      for (const auto& r : *rows) m.push_back(numbers(r, "potential.coefficients"));
      const std::size_t cols = m.front().size();
      Eigen::MatrixXd c = Eigen::MatrixXd::Zero(Eigen::Index(m.size()), Eigen::Index(cols));
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i].size() != cols) bad("potential.coefficients", "rows differ in length");
        for (std::size_t j = 0; j < cols; ++j) c(Eigen::Index(i), Eigen::Index(j)) = m[i][j];
      }
      p.coefficients = c;
    }
    if (const toml::node* n = t->get("file")) {
      if (!n->is_string()) bad("potential.file", "expected a string");
      const fs::path f = *n->value<std::string>();
      p.table = f.is_absolute() ? f : base / f;
    }
  }
  if (auto* t = section(root, "grid")) {
    check_keys(*t, "grid", {"t_nodes", "quadrature_order", "panels", "t_lower"});
    read(*t, "t_nodes", "grid", cfg.grid.t_nodes);
    read(*t, "quadrature_order", "grid", cfg.grid.quadrature_order);
    read(*t, "panels", "grid", cfg.grid.panels);
    read(*t, "t_lower", "grid", cfg.grid.t_lower);
  }
  if (auto* t = section(root, "solver")) {
    check_keys(*t, "solver", {"tolerance", "relative_tolerance", "max_iterations", "damping_floor", "initial_scale"});
    read(*t, "tolerance", "solver", cfg.solver.tolerance);
    read(*t, "relative_tolerance", "solver", cfg.solver.relative_tolerance);
    read(*t, "max_iterations", "solver", cfg.solver.max_iterations);
    read(*t, "damping_floor", "solver", cfg.solver.damping_floor);
    read(*t, "initial_scale", "solver", cfg.solver.initial_scale);
  }
  if (auto* t = section(root, "hypotheses")) {
    check_keys(*t, "hypotheses", {"t0_safety"});
    read(*t, "t0_safety", "hypotheses", cfg.t0_safety);
  }
  if (auto* t = section(root, "thermo")) {
    check_keys(*t, "thermo", {"half_width", "samples", "center"});
    read(*t, "half_width", "thermo", cfg.thermo.half_width);
    read(*t, "samples", "thermo", cfg.thermo.samples);
    read(*t, "center", "thermo", cfg.thermo.center);
  }
  if (auto* t = section(root, "output")) {
    check_keys(*t, "output", {"directory", "format"});
    std::string dir, format;
    read(*t, "directory", "output", dir);
    read(*t, "format", "output", format);
    if (!dir.empty()) cfg.output_dir = dir;
    if (format == "csv")
      cfg.format = OutputFormat::csv;
    else if (format == "json")
      cfg.format = OutputFormat::json;
    else if (!format.empty())
      bad("output.format", "expected \"csv\" or \"json\"");
  }
}

toml::table parse_toml(const std::string& text, const std::string& origin) {
  try {
    return toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: " << origin << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
}

}  // namespace

RunConfig parse_config(const std::string& toml_text, const fs::path& base) {
  RunConfig cfg;
  apply_table(cfg, parse_toml(toml_text, "config"), base);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg;
  apply_table(cfg, parse_toml(ss.str(), path.string()), path.parent_path());
  cfg.validate();
  return cfg;
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& overrides, const fs::path& base) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "': expected section.key=value");
    apply_table(cfg, parse_toml(o.substr(0, eq) + " = " + o.substr(eq + 1), "override"), base);
  }
  cfg.validate();
}

std::string describe_defaults() {
  const RunConfig d;
  std::ostringstream os;
  os << "model.epsilon = " << format_short(d.model.epsilon) << "\n"
     << "model.debye = " << format_short(d.model.debye) << "\n"
     << "potential.kind = \"" << d.potential.kind << "\"  (constant | separable | polynomial-kernel | table)\n"
     << "potential.value = " << format_short(d.potential.value) << "\n"
     << "potential.offset = 0, potential.scale = 1, potential.coupling = 1\n"
     << "potential.left = potential.right = {poly = [1], sin = 0, cos = 0, frequency = 1}\n"
     << "grid.t_nodes = " << d.grid.t_nodes << "\n"
     << "grid.quadrature_order = " << d.grid.quadrature_order << "\n"
     << "grid.panels = " << d.grid.panels << "\n"
     << "grid.t_lower = " << format_short(d.grid.t_lower) << "  (fraction of T_c)\n"
     << "solver.tolerance = 0  (0: relative_tolerance * Delta2(0)^2)\n"
     << "solver.relative_tolerance = " << format_short(d.solver.relative_tolerance) << "\n"
     << "solver.max_iterations = " << d.solver.max_iterations << "\n"
     << "solver.damping_floor = " << format_short(d.solver.damping_floor) << "\n"
     << "solver.initial_scale = " << format_short(d.solver.initial_scale) << "\n"
     << "hypotheses.t0_safety = " << format_short(d.t0_safety) << "\n"
     << "thermo.half_width = " << format_short(d.thermo.half_width) << "  (fraction of T_c)\n"
     << "thermo.samples = " << d.thermo.samples << "  (per side)\n"
     << "thermo.center = " << format_short(d.thermo.center) << "  (fraction of T_c)\n"
     << "output.directory = \"" << d.output_dir.string() << "\"\n"
     << "output.format = \"csv\"\n"
     << "threads = " << d.threads << "  (0: hardware concurrency)\n";
  return os.str();
}

}  // namespace bcsgap
