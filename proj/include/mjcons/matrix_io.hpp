#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace mjcons::io {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Plain-text matrix format: one row per line, whitespace-separated decimal
// entries. Blank lines and lines starting with '#' are skipped. All rows
// must have the same number of entries.
Eigen::MatrixXd read_matrix(const std::string& path);
Eigen::MatrixXd parse_matrix(std::istream& in, const std::string& origin = "<stream>");

void write_matrix(const std::string& path, const Eigen::MatrixXd& m);

// 17 significant digits; round-trips doubles bit-exactly through text.
std::string format_double(double v);
std::string format_matrix(const Eigen::MatrixXd& m);

}  // namespace mjcons::io
