#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "causal/error.hpp"

namespace causal {

/** Column type: categorical with a fixed level count, or continuous. */
struct ColumnType {
  bool categorical = false;
  int levels = 0;
  friend bool operator==(const ColumnType&, const ColumnType&) = default;
};

inline ColumnType categorical(int levels) { return ColumnType{true, levels}; }
inline ColumnType continuous() { return ColumnType{false, 0}; }

using Schema = std::map<std::string, ColumnType>;

/**
 * Rectangular sample: named columns of doubles with a schema and a population
 * tag. Categorical values are integer levels 0..k-1 stored as doubles;
 * construction rejects missing values and out-of-domain levels.
 */
class Dataset {
 public:
  Dataset() = default;

  static Dataset build(Schema schema,
                       std::vector<std::pair<std::string, std::vector<double>>> columns,
                       std::string population = "") {
    Dataset d;
    d.schema_ = std::move(schema);
    d.population_ = std::move(population);
    bool first = true;
    for (auto& [name, values] : columns) {
      auto it = d.schema_.find(name);
      if (it == d.schema_.end())
        fail(ErrorCode::schema_mismatch, "column without schema entry: " + name);
      if (d.cols_.count(name)) fail(ErrorCode::duplicate_name, "duplicate column: " + name);
      if (first) {
        d.n_ = values.size();
        first = false;
      } else if (values.size() != d.n_) {
        fail(ErrorCode::schema_mismatch, "column length mismatch: " + name);
      }
      const ColumnType& t = it->second;
      for (double v : values) {
        if (std::isnan(v)) fail(ErrorCode::missing_value, "missing value in " + name);
        if (t.categorical) {
          double r = std::nearbyint(v);
          if (v != r || r < 0 || r >= t.levels)
            fail(ErrorCode::value_out_of_domain,
                 "categorical level out of range in " + name);
        }
      }
      d.order_.push_back(name);
      d.cols_.emplace(name, std::move(values));
    }
    if (d.cols_.size() != d.schema_.size())
      fail(ErrorCode::schema_mismatch, "schema entry without column");
    return d;
  }

  std::size_t n() const { return n_; }
  const Schema& schema() const { return schema_; }
  const std::string& population() const { return population_; }
  const std::vector<std::string>& column_order() const { return order_; }

  bool has_column(const std::string& name) const { return cols_.count(name) != 0; }

  const std::vector<double>& column(const std::string& name) const {
    auto it = cols_.find(name);
    if (it == cols_.end()) fail(ErrorCode::unknown_variable, "no column " + name);
    return it->second;
  }

  const ColumnType& type_of(const std::string& name) const {
    auto it = schema_.find(name);
    if (it == schema_.end()) fail(ErrorCode::unknown_variable, "no schema entry " + name);
    return it->second;
  }

  bool is_categorical(const std::string& name) const { return type_of(name).categorical; }

  int levels_of(const std::string& name) const {
    const ColumnType& t = type_of(name);
    if (!t.categorical) fail(ErrorCode::continuous_variable, name + " is continuous");
    return t.levels;
  }

  int level_at(const std::string& name, std::size_t row) const {
    return static_cast<int>(column(name)[row]);
  }

  /** Row-resampled copy (bootstrap support). */
  Dataset resample(const std::vector<std::size_t>& rows) const {
    std::vector<std::pair<std::string, std::vector<double>>> cols;
    for (const auto& name : order_) {
      const auto& src = cols_.at(name);
      std::vector<double> vals;
      vals.reserve(rows.size());
      for (std::size_t r : rows) vals.push_back(src[r]);
      cols.emplace_back(name, std::move(vals));
    }
    return build(schema_, std::move(cols), population_);
  }

 private:
  Schema schema_;
  std::map<std::string, std::vector<double>> cols_;
  std::vector<std::string> order_;
  std::string population_;
  std::size_t n_ = 0;
};

inline std::string format_value(double v, const ColumnType& t) {
  if (t.categorical) return std::to_string(static_cast<long long>(v));
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_csv(const Dataset& d, std::ostream& out) {
  const auto& order = d.column_order();
  for (std::size_t i = 0; i < order.size(); ++i) out << (i ? "," : "") << order[i];
  out << "\n";
  for (std::size_t r = 0; r < d.n(); ++r) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i) out << ",";
      out << format_value(d.column(order[i])[r], d.type_of(order[i]));
    }
    out << "\n";
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

inline Dataset read_csv(std::istream& in, const Schema& schema, std::string population = "") {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::parse_error, "empty csv input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);
  std::vector<std::pair<std::string, std::vector<double>>> cols;
  for (const auto& name : header) {
    if (name.empty()) fail(ErrorCode::parse_error, "empty column name in header");
    if (!schema.count(name)) fail(ErrorCode::schema_mismatch, "column without schema entry: " + name);
    cols.emplace_back(name, std::vector<double>{});
  }
  std::size_t rowno = 1;
  while (std::getline(in, line)) {
    ++rowno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      fail(ErrorCode::parse_error, "row " + std::to_string(rowno) + " has wrong cell count");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& cell = cells[i];
      if (cell.empty())
        fail(ErrorCode::missing_value, "empty cell at row " + std::to_string(rowno));
      double v = 0.0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        fail(ErrorCode::parse_error, "bad number '" + cell + "' at row " + std::to_string(rowno));
      cols[i].second.push_back(v);
    }
  }
  return Dataset::build(schema, std::move(cols), std::move(population));
}

}  // namespace causal
