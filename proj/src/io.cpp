#include "bcsgap/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace bcsgap {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_short(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("not a number: '" + std::string(text) + "'");
  return v;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void write_table_csv(std::ostream& os, const CsvTable& t) {
  os << t.corner;
  for (double c : t.cols) os << ',' << format_double(c);
  os << '\n';
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    os << format_double(t.rows[i]);
    for (Eigen::Index j = 0; j < t.values.cols(); ++j) os << ',' << format_double(t.values(Eigen::Index(i), j));
    os << '\n';
  }
}

CsvTable read_table_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("csv: empty input");
  auto head = split(line);
  if (head.size() < 2) throw ConfigError("csv: header needs at least one column");
  t.corner = std::string(head[0]);
  for (std::size_t j = 1; j < head.size(); ++j) t.cols.push_back(parse_double(head[j]));
  std::vector<std::vector<double>> body;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (cells.size() != head.size())
      throw ConfigError("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(head.size()));
    t.rows.push_back(parse_double(cells[0]));
    std::vector<double> row;
    for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(parse_double(cells[j]));
    body.push_back(std::move(row));
  }
  t.values.resize(Eigen::Index(body.size()), Eigen::Index(t.cols.size()));
  for (std::size_t i = 0; i < body.size(); ++i)
    for (std::size_t j = 0; j < t.cols.size(); ++j) t.values(Eigen::Index(i), Eigen::Index(j)) = body[i][j];
  return t;
}

void write_field_csv(std::ostream& os, const GapField& field) {
  CsvTable t;
  t.corner = "T/x";
  t.rows.assign(field.grid.t_nodes.data(), field.grid.t_nodes.data() + field.grid.t_nodes.size());
  t.cols.assign(field.grid.x_rule.nodes.data(), field.grid.x_rule.nodes.data() + field.grid.x_rule.nodes.size());
  t.values = field.values;
  write_table_csv(os, t);
}

GapField read_field_csv(std::istream& is, const Rule& rule) {
  CsvTable t = read_table_csv(is);
  if (Eigen::Index(t.cols.size()) != rule.size()) throw ConfigError("field csv: node count does not match the rule");
  for (Eigen::Index j = 0; j < rule.size(); ++j)
    if (t.cols[std::size_t(j)] != rule.nodes[j]) throw ConfigError("field csv: x-nodes differ from the rule");
  GridSpec g;
  g.t_nodes = Eigen::Map<const Eigen::VectorXd>(t.rows.data(), Eigen::Index(t.rows.size()));
  g.x_rule = rule;
  try {
    g.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("field csv: ") + e.what());
  }
  for (Eigen::Index i = 0; i < t.values.size(); ++i)
    if (!(t.values.data()[i] >= 0)) throw ConfigError("field csv: negative or non-finite value");
  return GapField(std::move(g), std::move(t.values));
}

PotentialTable read_potential_table_csv(std::istream& is) {
  CsvTable t = read_table_csv(is);
  PotentialTable p;
  p.x = std::move(t.rows);
  p.xi = std::move(t.cols);
  p.values = std::move(t.values);
  return p;
}

void write_thermo_csv(std::ostream& os, const ThermoCurve& c) {
  os << "T,omega_diff,entropy_diff,specific_heat_diff\n";
  for (std::size_t i = 0; i < c.t_samples.size(); ++i)
    os << format_double(c.t_samples[i]) << ',' << format_double(c.omega_diff[i]) << ','
       << format_double(c.entropy_diff[i]) << ',' << format_double(c.specific_heat_diff[i]) << '\n';
}

using nlohmann::json;

json to_json(const PotentialBounds& b) { return {{"U1", b.u1}, {"U2", b.u2}, {"a", b.a}}; }

json to_json(const HypothesisReport& r) {
  return {{"U1", r.u1},
          {"U2", r.u2},
          {"a", r.a},
          {"T0", r.t0},
          {"margin", r.condition_margin},
          {"max_row_integral", r.max_row_integral},
          {"argmax_x", r.argmax_x},
          {"lower_coupling_integral", r.lower_coupling_integral},
          {"smoothness", r.smoothness == Smoothness::guaranteed ? "guaranteed" : "unchecked"},
          {"pass", r.pass}};
}

json to_json(const WAudit& a) {
  json clauses = json::array();
  for (const auto& c : a.clauses)
    clauses.push_back({{"name", c.name},
                       {"pass", c.pass},
                       {"worst_violation", c.worst_violation},
                       {"skipped_rows", c.skipped_rows},
                       {"note", c.note}});
  return {{"pass", a.pass}, {"clauses", clauses}};
}

json to_json(const SolveReport& r) {
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"residual_sup", r.residual_sup},
          {"tolerance", r.tolerance},
          {"damping_used", r.damping_used},
          {"delta2_at_zero", r.delta2_at_zero},
          {"M_T", r.M_T},
          {"residual_history_length", r.residual_history.size()},
          {"residual_history_tail",
           std::vector<double>(r.residual_history.end() - long(std::min<std::size_t>(r.residual_history.size(), 10)),
                               r.residual_history.end())},
          {"w_audit", to_json(r.w_audit)}};
}

json to_json(const CriticalTemperature& t) {
  return {{"tc", t.tc}, {"rho_minus_one", t.rho_minus_one}, {"evaluations", t.evaluations}};
}

json verdict_json(const ThermoCurve& c) {
  return {{"tc", c.tc},
          {"h", c.h},
          {"jump", c.jump_at_tc},
          {"c_normal_tc", c.c_normal_tc},
          {"jump_over_c_normal", c.c_normal_tc > 0 ? c.jump_at_tc / c.c_normal_tc : 0.0},
          {"omega_left", c.omega_left},
          {"entropy_left", c.entropy_left},
          {"c_left_h", c.c_left_h},
          {"c_left_2h", c.c_left_2h},
          {"classification", to_string(c.classification)},
          {"reason", c.reason},
          {"tolerances", {{"omega", c.tol_omega}, {"entropy", c.tol_entropy}, {"jump_floor", c.jump_floor}}}};
}

json to_json(const GapField& f) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < f.values.rows(); ++i) {
    std::vector<double> r(std::size_t(f.values.cols()));
    for (Eigen::Index j = 0; j < f.values.cols(); ++j) r[std::size_t(j)] = f.values(i, j);
    rows.push_back(r);
  }
  return {{"T", std::vector<double>(f.grid.t_nodes.data(), f.grid.t_nodes.data() + f.grid.t_nodes.size())},
          {"x", std::vector<double>(f.grid.x_rule.nodes.data(), f.grid.x_rule.nodes.data() + f.grid.x_rule.size())},
          {"values", rows},
          {"converged", f.converged}};
}

}  // namespace bcsgap
