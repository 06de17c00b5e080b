#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace motionkit {

// Shortest decimal form that round-trips to the same double.
std::string format_number(double x);

// Column-named rows that serialize as CSV or as a JSON array of objects.
class Table {
 public:
  using Cell = std::variant<double, std::int64_t, std::string>;

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<Cell> row);
  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }

  std::string to_csv() const;
  std::string to_json() const;
  std::string render(bool json) const { return json ? to_json() : to_csv(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace motionkit
