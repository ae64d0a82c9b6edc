#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cldyn::csv {

/// Format a double with 17 significant digits so that CSV round-trips are
/// exact for 64-bit floats.
inline std::string format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& fields);
std::vector<std::string> split_line(const std::string& line);

void write_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::string& path);

/// Generic table writers/readers used by the run artifacts.
void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);
std::vector<std::vector<std::string>> read_table(const std::string& path,
                                                 std::vector<std::string>* header = nullptr);

}  // namespace cldyn::csv
