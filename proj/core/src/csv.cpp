#include "cldyn/csv.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cldyn/errors.hpp"

namespace cldyn::csv {

std::string join(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) f << ',';
            f << format(m(i, j));
        }
        f << '\n';
    }
    if (!f) throw IoError("write failed: " + path);
}

Eigen::MatrixXd read_matrix(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& field : split_line(line)) row.push_back(std::strtod(field.c_str(), nullptr));
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("ragged matrix csv: " + path);
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    return m;
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << join(header) << '\n';
    for (const auto& row : rows) f << join(row) << '\n';
    if (!f) throw IoError("write failed: " + path);
}

std::vector<std::vector<std::string>> read_table(const std::string& path,
                                                 std::vector<std::string>* header) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (first) {
            if (header) *header = fields;
            first = false;
            continue;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace cldyn::csv
