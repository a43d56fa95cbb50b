#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lasmc::bench {

// One row per repetition plus summary rows; the leading `row` column marks
// the kind ("rep", "mean", "se" or an experiment-specific label).
struct ResultTable {
  std::vector<std::pair<std::string, std::string>> labels;  // constant columns, e.g. experiment
  std::vector<std::string> columns;                         // numeric columns
  std::vector<std::vector<double>> rows;                    // per repetition
  std::vector<std::pair<std::string, std::vector<double>>> extra;  // extra summary rows

  int column(std::string_view name) const;  // -1 when absent
  // Mean and standard error of a column over repetitions, skipping NaN.
  std::pair<double, double> mean_se(int col) const;
};

std::string csv_escape(std::string_view field);
// Round-trip decimal form; NaN is written as an empty cell.
std::string format_double(double v);

void write_csv(std::ostream& os, const ResultTable& table);
std::string to_csv(const ResultTable& table);

// RFC 4180 records; quoted fields may contain commas, quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace lasmc::bench
