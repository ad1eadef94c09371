#include "app/tables.hpp"

#include <cmath>
#include <sstream>

#include "detloop/errors.hpp"
#include "detloop/serialize.hpp"

namespace detloop::app {
namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw DomainError("csv: '" + s + "' is not a number");
  }
  if (used != s.size()) throw DomainError("csv: '" + s + "' is not a number");
  return v;
}

std::string cell(double v) { return std::isnan(v) ? "nan" : format_double(v); }

}  // namespace

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::string table_to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_field(t.columns[i]);
  out += '\n';
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw DimensionError("table: row width differs from header");
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + cell(r[i]);
    out += '\n';
  }
  return out;
}

Table table_from_csv(const std::string& text) {
  auto lines = lines_of(text);
  if (lines.empty()) throw DomainError("csv: empty table");
  Table t;
  t.columns = split_csv_line(lines[0]);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    auto f = split_csv_line(lines[k]);
    if (f.size() != t.columns.size()) throw DomainError("csv: row " + std::to_string(k) + " has the wrong width");
    std::vector<double> r;
    for (const auto& s : f) r.push_back(parse_number(s));
    t.rows.push_back(std::move(r));
  }
  return t;
}

SummaryRow check(std::string quantity, double measured, double expected, double tolerance) {
  return {std::move(quantity), measured, expected, tolerance, std::abs(measured - expected) <= tolerance};
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryHeader) + "\n";
  for (const auto& r : rows)
    out += csv_field(r.quantity) + "," + cell(r.measured) + "," + cell(r.expected) + "," + cell(r.tolerance) + "," +
           (r.pass ? "pass" : "fail") + "\n";
  return out;
}

std::vector<SummaryRow> summary_from_csv(const std::string& text) {
  auto lines = lines_of(text);
  if (lines.empty() || lines[0] != kSummaryHeader) throw DomainError("summary csv: unexpected header");
  std::vector<SummaryRow> out;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    auto f = split_csv_line(lines[k]);
    if (f.size() != 5) throw DomainError("summary csv: row " + std::to_string(k) + " has the wrong width");
    if (f[4] != "pass" && f[4] != "fail") throw DomainError("summary csv: status must be pass or fail");
    out.push_back({f[0], parse_number(f[1]), parse_number(f[2]), parse_number(f[3]), f[4] == "pass"});
  }
  return out;
}

}  // namespace detloop::app
