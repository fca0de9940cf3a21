#include "pcts/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pcts/errors.hpp"

namespace pcts {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<int>(j);
  }
  throw IngestionError("missing column '" + name + "' in input header");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open input file '" + path + "'");
  CsvTable table;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (table.header.empty()) {
      table.header = split(line);
      table.columns.assign(table.header.size(), {});
      continue;
    }
    const std::vector<std::string> fields = split(line);
    if (fields.size() != table.header.size()) {
      std::ostringstream os;
      os << "line " << line_no << ": expected " << table.header.size() << " fields, found "
         << fields.size();
      throw IngestionError(os.str());
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v = 0.0;
      const char* first = fields[j].data();
      const char* last = first + fields[j].size();
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last || fields[j].empty()) {
        std::ostringstream os;
        os << "line " << line_no << ": column '" << table.header[j]
           << "' is not a number: '" << fields[j] << "'";
        throw IngestionError(os.str());
      }
      table.columns[j].push_back(v);
    }
  }
  if (table.header.empty()) throw IngestionError("input file '" + path + "' has no header");
  return table;
}

CountSeries series_from_table(const CsvTable& table, const std::string& count_col,
                              const std::vector<std::string>& covariates) {
  const int xc = table.column(count_col);
  std::vector<int> cc;
  for (const auto& name : covariates) cc.push_back(table.column(name));
  const long n = table.rows();
  CountSeries s;
  s.x.resize(n);
  s.covariates.resize(n, static_cast<Eigen::Index>(cc.size()));
  s.covariate_names = covariates;
  s.generator = "input";
  for (long i = 0; i < n; ++i) {
    const double v = table.columns[xc][i];
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) {
      std::ostringstream os;
      os << "row " << i + 1 << ": count column '" << count_col
         << "' must hold a nonnegative integer, found " << format_double(v);
      throw IngestionError(os.str());
    }
    s.x(i) = static_cast<std::int64_t>(v);
    for (std::size_t j = 0; j < cc.size(); ++j) s.covariates(i, j) = table.columns[cc[j]][i];
  }
  return s;
}

CountSeries read_series_csv(const std::string& path, const std::string& count_col,
                            const std::vector<std::string>& covariates) {
  return series_from_table(read_csv(path), count_col, covariates);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_text(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw IngestionError("failed writing '" + path + "'");
}

void write_series_csv(const std::string& path, const CountSeries& series) {
  std::ostringstream os;
  os << "t,x";
  for (Eigen::Index j = 0; j < series.covariates.cols(); ++j) {
    os << ',';
    if (j < static_cast<Eigen::Index>(series.covariate_names.size())) {
      os << series.covariate_names[j];
    } else {
      os << 'c' << j + 1;
    }
  }
  os << '\n';
  for (long t = 0; t < series.size(); ++t) {
    os << t + 1 << ',' << series.x(t);
    for (Eigen::Index j = 0; j < series.covariates.cols(); ++j) {
      os << ',' << format_double(series.covariates(t, j));
    }
    os << '\n';
  }
  write_text(path, os.str());
}

}  // namespace pcts
