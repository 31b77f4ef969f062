#pragma once

#include <string>
#include <vector>

#include "chartnet/numfmt.hpp"

namespace chartnet {

// Small typed table rendered to RFC-4180 CSV with a header row. Doubles are
// written as shortest round-trip decimals, so identical tables produce
// byte-identical files on any platform or locale.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  class RowRef {
   public:
    explicit RowRef(std::vector<std::string>& row) : row_(row) {}
    RowRef& add(double v) { row_.push_back(fmt_double(v)); return *this; }
    RowRef& add(long long v) { row_.push_back(fmt_int(v)); return *this; }
    RowRef& add(int v) { row_.push_back(fmt_int(v)); return *this; }
    RowRef& add(const std::string& v) { row_.push_back(v); return *this; }

   private:
    std::vector<std::string>& row_;
  };

  RowRef new_row() {
    rows_.emplace_back();
    return RowRef(rows_.back());
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string render_csv(const Table& table);

// Writes the table to `path`. When plot columns are named, also writes a
// companion file `<path>.plot` holding ln(x), ln(y) pairs for the two
// columns, ready for external plotting.
void emit_csv(const Table& table, const std::string& path, const std::string& plot_x = "",
              const std::string& plot_y = "");

// Parses a CSV written by emit_csv (header + unquoted numeric/string cells).
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace chartnet
