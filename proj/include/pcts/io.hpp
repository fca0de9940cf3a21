#pragma once

// CSV ingestion and output for count series.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pcts/generate.hpp"

namespace pcts {

/// Header row plus numeric columns.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  long rows() const { return columns.empty() ? 0 : static_cast<long>(columns[0].size()); }
  /// Index of `name` in the header; throws IngestionError naming the column.
  int column(const std::string& name) const;
};

/// Parses a comma-separated file with a mandatory header row. Throws
/// IngestionError naming the line for unparsable fields or ragged rows.
CsvTable read_csv(const std::string& path);

/// Counts from `count_col`, covariates from `covariates` in order.
/// Non-integer or negative counts raise IngestionError naming the data row.
CountSeries series_from_table(const CsvTable& table, const std::string& count_col,
                              const std::vector<std::string>& covariates);

CountSeries read_series_csv(const std::string& path, const std::string& count_col,
                            const std::vector<std::string>& covariates);

/// Writes `t,x[,c1..cq]` with t = 1..n.
void write_series_csv(const std::string& path, const CountSeries& series);

/// Shortest decimal form that round-trips the double.
std::string format_double(double v);

/// Writes `contents` to `path`, throwing IngestionError if it cannot.
void write_text(const std::string& path, const std::string& contents);

}  // namespace pcts
