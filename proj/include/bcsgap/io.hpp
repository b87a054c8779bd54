#pragma once

// CSV and JSON encodings of fields, curves and reports.
//
// Numbers are written with 17 significant digits via std::to_chars and parsed
// with std::from_chars, so a write/read cycle restores every double bit for
// bit and does not depend on the locale.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bcsgap/thermodynamics.hpp"

namespace bcsgap {

std::string format_double(double v);
/// Shortest decimal that reads back to the same double, for console text.
std::string format_short(double v);
double parse_double(std::string_view text);

/// A labelled matrix: header row of column coordinates, first column of row coordinates.
struct CsvTable {
  std::string corner;
  std::vector<double> rows;
  std::vector<double> cols;
  Eigen::MatrixXd values;
};

void write_table_csv(std::ostream& os, const CsvTable& table);
CsvTable read_table_csv(std::istream& is);

/// Gap field: corner "T/x", x-nodes across, T-nodes down.
void write_field_csv(std::ostream& os, const GapField& field);
/// Rebuilds a field on the given rule; the stored x-nodes must equal the rule's nodes exactly.
GapField read_field_csv(std::istream& is, const Rule& rule);

/// Potential table: corner "x/xi", xi values across, x values down.
PotentialTable read_potential_table_csv(std::istream& is);

void write_thermo_csv(std::ostream& os, const ThermoCurve& curve);

nlohmann::json to_json(const PotentialBounds& b);
nlohmann::json to_json(const HypothesisReport& r);
nlohmann::json to_json(const WAudit& a);
nlohmann::json to_json(const SolveReport& r);
nlohmann::json to_json(const CriticalTemperature& t);
nlohmann::json verdict_json(const ThermoCurve& c);
nlohmann::json to_json(const GapField& f);

}  // namespace bcsgap
