#include "xyfit/csv.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace xyfit {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

}  // namespace

const Eigen::VectorXd& CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return data[i];
  throw std::invalid_argument("csv: no column named '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& c : columns)
    if (c == name) return true;
  return false;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("csv: cannot open " + path);

  CsvTable t;
  std::string line;
  bool have_header = false;
  std::vector<std::vector<double>> cols;

  while (std::getline(f, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      t.comments.push_back(line);
      continue;
    }
    const auto cells = split(line, ',');
    if (!have_header) {
      t.columns = cells;
      cols.resize(cells.size());
      have_header = true;
      continue;
    }
    if (cells.size() != t.columns.size())
      throw std::runtime_error("csv: ragged row in " + path);
    for (size_t i = 0; i < cells.size(); ++i) {
      // non-numeric cells (labels, method names) read as NaN
      try {
        size_t used = 0;
        const double v = std::stod(cells[i], &used);
        cols[i].push_back(used == cells[i].size()
                              ? v
                              : std::numeric_limits<double>::quiet_NaN());
      } catch (const std::exception&) {
        cols[i].push_back(std::numeric_limits<double>::quiet_NaN());
      }
    }
  }
  if (!have_header) throw std::runtime_error("csv: empty file " + path);
  for (auto& c : cols)
    t.data.push_back(Eigen::Map<Eigen::VectorXd>(c.data(), c.size()));
  return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("csv: cannot open " + path + " for writing");
  f.precision(12);
  for (const auto& c : table.comments)
    f << (c.rfind('#', 0) == 0 ? "" : "# ") << c << "\n";
  for (size_t i = 0; i < table.columns.size(); ++i)
    f << table.columns[i] << (i + 1 < table.columns.size() ? "," : "\n");
  const Eigen::Index n = table.rows();
  for (Eigen::Index r = 0; r < n; ++r)
    for (size_t i = 0; i < table.data.size(); ++i)
      f << table.data[i][r] << (i + 1 < table.data.size() ? "," : "\n");
}

Eigen::MatrixXd read_matrix_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(std::stod(c));
    if (!rows.empty() && row.size() != rows[0].size())
      throw std::runtime_error("csv: ragged matrix in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("csv: empty matrix file " + path);
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace xyfit
