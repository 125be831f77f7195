#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nlspec {

/// 17 significant digits, enough to round-trip a double exactly.
inline std::string fmt_sig17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Scientific notation with 17 significant digits (matrix exports).
inline std::string fmt_sci17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

/// Comma-separated table with a mandatory header row and LF line endings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

/// Write-temp-then-rename, so report files appear atomically.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    os << content;
    if (!os) throw std::runtime_error("atomic_write: failed to write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Row-major matrix CSV: header c0..c{n-1}, scientific notation.
inline void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& M) {
  CsvTable t;
  for (int j = 0; j < M.cols(); ++j) t.header.push_back("c" + std::to_string(j));
  for (int i = 0; i < M.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(M.cols());
    for (int j = 0; j < M.cols(); ++j) row.push_back(fmt_sci17(M(i, j)));
    t.rows.push_back(std::move(row));
  }
  atomic_write(path, t.to_string());
}

}  // namespace nlspec
