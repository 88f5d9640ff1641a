#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace xyfit {

// Headered numeric CSV. Lines starting with '#' are kept as comments.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<Eigen::VectorXd> data;  // one vector per column
  std::vector<std::string> comments;

  const Eigen::VectorXd& column(const std::string& name) const;
  bool has_column(const std::string& name) const;
  Eigen::Index rows() const { return data.empty() ? 0 : data[0].size(); }
};

CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const CsvTable& table);

// Square matrix as bare comma-separated rows (no header).
Eigen::MatrixXd read_matrix_csv(const std::string& path);

}  // namespace xyfit
