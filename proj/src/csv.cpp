#include "chartnet/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "chartnet/errors.hpp"

namespace chartnet {

namespace {

std::string escape(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

std::string render_csv(const Table& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.header().size(); ++i) {
    if (i) out << ',';
    out << escape(table.header()[i]);
  }
  out << "\r\n";
  for (const auto& row : table.rows()) {
    if (row.size() != table.header().size())
      throw PreconditionError("csv row width disagrees with header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << escape(row[i]);
    }
    out << "\r\n";
  }
  return out.str();
}

void emit_csv(const Table& table, const std::string& path, const std::string& plot_x,
              const std::string& plot_y) {
  write_file(path, render_csv(table));
  if (plot_x.empty() && plot_y.empty()) return;
  auto col_index = [&](const std::string& name) {
    auto it = std::find(table.header().begin(), table.header().end(), name);
    if (it == table.header().end())
      throw PreconditionError("plot column '" + name + "' not in header");
    return static_cast<std::size_t>(it - table.header().begin());
  };
  const std::size_t xi = col_index(plot_x);
  const std::size_t yi = col_index(plot_y);
  Table plot({"ln_" + plot_x, "ln_" + plot_y});
  for (const auto& row : table.rows()) {
    const double x = parse_double(row[xi]);
    const double y = parse_double(row[yi]);
    if (!(x > 0.0) || !(y > 0.0)) continue;  // log axes only admit positives
    plot.new_row().add(std::log(x)).add(std::log(y));
  }
  write_file(path + ".plot", render_csv(plot));
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cell += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace chartnet
