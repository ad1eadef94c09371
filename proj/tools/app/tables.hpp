#pragma once

#include <string>
#include <vector>

namespace detloop::app {

// Numeric table with named columns; NaN cells are written as "nan".
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 if absent
};

std::string table_to_csv(const Table& t);
Table table_from_csv(const std::string& text);

// One checked quantity of a figure reproduction.
struct SummaryRow {
  std::string quantity;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline const char* kSummaryHeader = "quantity,measured,expected,tolerance,status";
SummaryRow check(std::string quantity, double measured, double expected, double tolerance);
std::string summary_to_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> summary_from_csv(const std::string& text);

}  // namespace detloop::app
