#include "bcsgap/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "bcsgap/constant_gap.hpp"
#include "bcsgap/io.hpp"

namespace bcsgap {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const PreconditionError*>(&e)) return exit_parse;
  if (dynamic_cast<const HypothesisError*>(&e)) return exit_hypothesis;
  if (dynamic_cast<const NoTransitionError*>(&e) || dynamic_cast<const NoSolutionError*>(&e))
    return exit_no_transition;
  return exit_non_convergence;
}

Prepared prepare(const RunConfig& cfg) {
  Prepared p;
  p.potential = cfg.potential.build();
  p.bounds = bounds(p.potential, cfg.model);
  const double t0 = compute_T0(p.potential, cfg.model, cfg.t0_safety);
  p.hypotheses = check_condition_2_4(p.potential, t0, cfg.model);
  p.hypotheses.smoothness = p.potential.smooth_guaranteed() ? Smoothness::guaranteed : Smoothness::unchecked;
  if (!p.hypotheses.pass) throw HypothesisError("hypotheses fail: margin " + format_double(p.hypotheses.condition_margin));
  p.rule = energy_rule(cfg.model, cfg.grid.quadrature_order, cfg.grid.panels);
  p.tc = critical_temperature(p.potential, cfg.model, p.rule);
  p.delta2_at_zero = delta_const(p.bounds.u2, 0.0, cfg.model, p.rule);
  return p;
}

GridSpec grid_for(const RunConfig& cfg, const Prepared& p) {
  return make_grid(cfg.grid.t_lower * p.tc.tc, p.tc.tc, cfg.grid.t_nodes, p.rule);
}

SolverOptions solver_options(const RunConfig& cfg, const Prepared& p) {
  SolverOptions o;
  o.tolerance = cfg.solver.tolerance;
  o.relative_tolerance = cfg.solver.relative_tolerance;
  o.max_iterations = cfg.solver.max_iterations;
  o.damping_floor = cfg.solver.damping_floor;
  o.initial_scale = cfg.solver.initial_scale;
  o.threads = cfg.threads;
  o.hypotheses = p.hypotheses;
  return o;
}

namespace {

fs::path output_path(const RunConfig& cfg, const std::string& name) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());
  return cfg.output_dir / name;
}

template <typename Writer>
fs::path write_file(const RunConfig& cfg, const std::string& name, Writer&& w) {
  const fs::path path = output_path(cfg, name);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  w(os);
  if (!os) throw ConfigError("write failed: " + path.string());
  return path;
}

std::string ext(const RunConfig& cfg) { return cfg.format == OutputFormat::json ? ".json" : ".csv"; }

fs::path write_field(const RunConfig& cfg, const std::string& stem, const GapField& f) {
  return write_file(cfg, stem + ext(cfg), [&](std::ostream& os) {
    if (cfg.format == OutputFormat::json)
      os << to_json(f).dump(1) << '\n';
    else
      write_field_csv(os, f);
  });
}

void line(std::ostream& out, const char* key, double v) {
  out << std::left << std::setw(10) << key << format_short(v) << '\n';
}

json solve_json(const Prepared& p, const SolveReport& r) {
  json j = to_json(r);
  j["tc"] = p.tc.tc;
  j["hypotheses"] = to_json(p.hypotheses);
  return j;
}

std::pair<GapField, SolveReport> solve(const RunConfig& cfg, const Prepared& p) {
  return solve_fixed_point(p.potential, cfg.model, grid_for(cfg, p), solver_options(cfg, p));
}

ThermoCurve thermo(const RunConfig& cfg, const Prepared& p, const GapField& f) {
  ThermoOptions o;
  o.half_width = cfg.thermo.half_width * p.tc.tc;
  o.n_samples = cfg.thermo.samples;
  o.center = cfg.thermo.center * p.tc.tc;
  o.threads = cfg.threads;
  return thermo_curves(f, p.potential, cfg.model, o);
}

}  // namespace

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const Potential potential = cfg.potential.build();
  const PotentialBounds b = bounds(potential, cfg.model);
  const double t0 = compute_T0(potential, cfg.model, cfg.t0_safety);
  HypothesisReport r = check_condition_2_4(potential, t0, cfg.model);
  r.smoothness = potential.smooth_guaranteed() ? Smoothness::guaranteed : Smoothness::unchecked;
  json j = to_json(r);
  double mt = -1;
  try {
    const Rule rule = energy_rule(cfg.model, cfg.grid.quadrature_order, cfg.grid.panels);
    const double tc = critical_temperature(potential, cfg.model, rule).tc;
    mt = compute_M_T(b, cfg.model, tc, delta_const(b.u2, 0.0, cfg.model, rule), energy_rule(cfg.model, 128));
    j["tc"] = tc;
    j["M_T"] = mt;
  } catch (const NoTransitionError&) {
    j["M_T"] = nullptr;
  }
  if (cfg.format == OutputFormat::json) {
    out << j.dump(2) << '\n';
  } else {
    line(out, "U1", r.u1);
    line(out, "U2", r.u2);
    line(out, "a", r.a);
    line(out, "T0", r.t0);
    line(out, "margin", r.condition_margin);
    if (mt >= 0)
      line(out, "M_T", mt);
    else
      out << "M_T       n/a (no transition)\n";
    out << "smooth    " << (r.smoothness == Smoothness::guaranteed ? "guaranteed" : "unchecked") << '\n';
    out << "pass      " << (r.pass ? "yes" : "no") << '\n';
  }
  return r.pass ? exit_ok : exit_hypothesis;
}

int cmd_tc(const RunConfig& cfg, std::ostream& out) {
  const Prepared p = prepare(cfg);
  if (cfg.format == OutputFormat::json) {
    out << to_json(p.tc).dump(2) << '\n';
  } else {
    line(out, "T_c", p.tc.tc);
    line(out, "rho-1", p.tc.rho_minus_one);
  }
  return exit_ok;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const Prepared p = prepare(cfg);
  try {
    auto [field, report] = solve(cfg, p);
    const fs::path fp = write_field(cfg, "field", field);
    json j = solve_json(p, report);
    const SlopeResult slope = slope_at_tc(p.potential, p.tc.tc, cfg.model, p.rule);
    j["slope_at_tc"] = {{"minus_f_T", std::vector<double>(slope.g.begin(), slope.g.end())},
                        {"residual", slope.residual}};
    write_file(cfg, "solve_report.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    out << "converged in " << report.iterations << " iterations, residual " << format_short(report.residual_sup)
        << " (tolerance " << format_short(report.tolerance) << "), W audit "
        << (report.w_audit.pass ? "pass" : "FAIL") << '\n'
        << "wrote " << fp.string() << '\n';
    return exit_ok;
  } catch (const NonConvergenceError& e) {
    write_field(cfg, "field.partial", e.best_iterate());
    write_file(cfg, "solve_report.json", [&](std::ostream& os) {
      json j = solve_json(p, e.report());
      j["partial"] = true;
      os << j.dump(2) << '\n';
    });
    throw;
  }
}

int cmd_thermo(const RunConfig& cfg, std::ostream& out, const std::optional<std::string>& field_csv) {
  const Prepared p = prepare(cfg);
  GapField field;
  if (field_csv) {
    std::ifstream in(*field_csv);
    if (!in) throw ConfigError("cannot open field " + *field_csv);
    field = read_field_csv(in, p.rule);
    if (std::abs(field.grid.tc() - p.tc.tc) > 1e-12 * p.tc.tc)
      throw ConfigError("field " + *field_csv + " does not end at this configuration's T_c");
    const double tol = cfg.solver.tolerance > 0 ? cfg.solver.tolerance
                                                : cfg.solver.relative_tolerance * p.delta2_at_zero * p.delta2_at_zero;
    const double r = (apply_A(field, p.potential, cfg.model).values - field.values).cwiseAbs().maxCoeff();
    if (!(r <= tol)) throw ConfigError("field " + *field_csv + " is not a fixed point (residual " + format_double(r) + ")");
    field.converged = true;
  } else {
    field = solve(cfg, p).first;
  }
  const ThermoCurve c = thermo(cfg, p, field);
  write_file(cfg, "thermo" + ext(cfg), [&](std::ostream& os) {
    if (cfg.format == OutputFormat::json)
      os << json{{"T", c.t_samples},
                 {"omega_diff", c.omega_diff},
                 {"entropy_diff", c.entropy_diff},
                 {"specific_heat_diff", c.specific_heat_diff}}
                .dump(1)
         << '\n';
    else
      write_thermo_csv(os, c);
  });
  write_file(cfg, "verdict.json", [&](std::ostream& os) { os << verdict_json(c).dump(2) << '\n'; });
  out << "classification " << to_string(c.classification) << '\n';
  line(out, "T_c", c.tc);
  line(out, "jump", c.jump_at_tc);
  line(out, "jump/C_N", c.jump_at_tc / c.c_normal_tc);
  out << "|Omega(Tc-)| = " << format_short(std::abs(c.omega_left)) << " (tol " << format_short(c.tol_omega)
      << "), |S(Tc-)| = " << format_short(std::abs(c.entropy_left)) << " (tol " << format_short(c.tol_entropy)
      << "), jump floor " << format_short(c.jump_floor) << '\n';
  if (c.classification != Classification::second_order) out << c.reason << '\n';
  return c.classification == Classification::second_order ? exit_ok : exit_inconclusive;
}

int cmd_sweep(const RunConfig& base, std::ostream& out, const std::string& parameter,
              const std::vector<double>& values) {
  if (parameter != "coupling" && parameter != "epsilon" && parameter != "debye")
    throw ConfigError("sweep: parameter must be coupling, epsilon or debye");
  if (values.empty()) throw ConfigError("sweep: no values given");
  json rows = json::array();
  for (double v : values) {
    RunConfig cfg = base;
    if (parameter == "coupling") cfg.potential.coupling = v;
    if (parameter == "epsilon") cfg.model.epsilon = v;
    if (parameter == "debye") cfg.model.debye = v;
    json row{{"value", v}};
    try {
      cfg.validate();
      const Prepared p = prepare(cfg);
      row["tc"] = p.tc.tc;
      row["delta2_at_zero"] = p.delta2_at_zero;
      const GapField f = solve(cfg, p).first;
      const ThermoCurve c = thermo(cfg, p, f);
      row["jump"] = c.jump_at_tc;
      row["jump_over_c_normal"] = c.jump_at_tc / c.c_normal_tc;
      row["classification"] = to_string(c.classification);
      row["status"] = "ok";
    } catch (const std::exception& e) {
      row["status"] = "failed";
      row["exit_code"] = exit_code_for(e);
      row["message"] = e.what();
    }
    rows.push_back(row);
  }
  auto num = [](const json& row, const char* key) {
    return row.contains(key) ? format_double(row[key].get<double>()) : std::string();
  };
  write_file(base, "sweep" + ext(base), [&](std::ostream& os) {
    if (base.format == OutputFormat::json) {
      os << json{{"parameter", parameter}, {"rows", rows}}.dump(2) << '\n';
      return;
    }
    os << parameter << ",status,tc,delta2_at_zero,jump,jump_over_c_normal,classification,message\n";
    for (const auto& row : rows) {
      std::string msg = row.value("message", "");
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      os << num(row, "value") << ',' << row["status"].get<std::string>() << ',' << num(row, "tc") << ','
         << num(row, "delta2_at_zero") << ',' << num(row, "jump") << ',' << num(row, "jump_over_c_normal") << ','
         << row.value("classification", "") << ',' << msg << '\n';
    }
  });
  auto brief = [](const json& row, const char* key) {
    return row.contains(key) ? format_short(row[key].get<double>()) : std::string();
  };
  for (const auto& row : rows) {
    out << parameter << " = " << brief(row, "value") << ": " << row["status"].get<std::string>();
    if (row["status"] == "ok")
      out << ", T_c = " << brief(row, "tc") << ", jump = " << brief(row, "jump") << ", "
          << row["classification"].get<std::string>();
    else
      out << " (" << row["message"].get<std::string>() << ")";
    out << '\n';
  }
  return exit_ok;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Squared BCS gap equation solver"};
  app.require_subcommand(1);
  app.footer("Configuration defaults (TOML keys):\n" + describe_defaults() +
             "\nExit codes: 0 ok, 1 parse/input error, 2 hypothesis failure, 3 no transition,\n"
             "4 non-convergence, 5 inconclusive or not second order.");

  std::string config_path, out_dir, format;
  int threads = -1;
  std::vector<std::string> overrides;
  std::optional<std::string> field_csv;
  std::string parameter;
  std::vector<double> values;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (TOML)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", threads, "Worker threads, 0 = auto")->check(CLI::NonNegativeNumber);
    sub->add_option("--set", overrides, "Override a key, e.g. --set grid.t_nodes=32");
  };
  CLI::App* check = app.add_subcommand("check", "Audit the hypotheses on the potential");
  CLI::App* tc = app.add_subcommand("tc", "Critical temperature");
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve the gap equation, write the field and report");
  CLI::App* thermo_cmd = app.add_subcommand("thermo", "Thermodynamic curves and transition verdict");
  CLI::App* sweep = app.add_subcommand("sweep", "Run tc/solve/thermo over a parameter list");
  for (auto* s : {check, tc, solve_cmd, thermo_cmd, sweep}) common(s);
  thermo_cmd->add_option("--field", field_csv, "Use a field CSV written by solve instead of solving inline");
  sweep->add_option("--parameter", parameter, "coupling, epsilon or debye")
      ->required()
      ->check(CLI::IsMember({"coupling", "epsilon", "debye"}));
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_parse;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    apply_overrides(cfg, overrides);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!format.empty()) cfg.format = format == "json" ? OutputFormat::json : OutputFormat::csv;
    if (threads >= 0) cfg.threads = threads;
    cfg.validate();

    if (*check) return cmd_check(cfg, out);
    if (*tc) return cmd_tc(cfg, out);
    if (*solve_cmd) return cmd_solve(cfg, out);
    if (*thermo_cmd) return cmd_thermo(cfg, out, field_csv);
    return cmd_sweep(cfg, out, parameter, values);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace bcsgap
