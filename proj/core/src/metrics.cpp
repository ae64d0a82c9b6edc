#include "cldyn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <utility>

#include "cldyn/csv.hpp"
#include "cldyn/errors.hpp"

namespace cldyn {

namespace {

void require_kind(const EvalMatrix& m, EvalMatrix::Kind kind, const char* op) {
    if (m.kind != kind)
        throw ValidationError(std::string(op) + ": evaluation matrix has the wrong kind");
}

void require_multi_task(const EvalMatrix& m, const char* op) {
    if (m.num_tasks() < 2)
        throw ValidationError(std::string(op) + " is undefined for a single task");
}

double diagonal_mean(const EvalMatrix& m) { return m.values.diagonal().mean(); }
double last_row_mean(const EvalMatrix& m) { return m.values.row(m.values.rows() - 1).mean(); }

}  // namespace

void EvalMatrix::validate() const {
    if (values.rows() < 1 || values.rows() != values.cols())
        throw ValidationError("evaluation matrix must be square with T >= 1");
    if (kind == Kind::accuracy) {
        if ((values.array() < 0.0).any() || (values.array() > 1.0).any())
            throw ValidationError("accuracy entries must lie in [0, 1]");
    } else {
        if ((values.array() < 0.0).any()) throw ValidationError("loss entries must be >= 0");
    }
}

double learning_accuracy(const EvalMatrix& m) {
    require_kind(m, EvalMatrix::Kind::accuracy, "learning_accuracy");
    return diagonal_mean(m);
}

double learning_error(const EvalMatrix& m) { return 1.0 - learning_accuracy(m); }

double learning_loss(const EvalMatrix& m) {
    require_kind(m, EvalMatrix::Kind::loss, "learning_loss");
    return diagonal_mean(m);
}

double average_accuracy(const EvalMatrix& m) {
    require_kind(m, EvalMatrix::Kind::accuracy, "average_accuracy");
    return last_row_mean(m);
}

double average_error(const EvalMatrix& m) { return 1.0 - average_accuracy(m); }

double average_loss(const EvalMatrix& m) {
    require_kind(m, EvalMatrix::Kind::loss, "average_loss");
    return last_row_mean(m);
}

double catastrophic_forgetting(const EvalMatrix& m) {
    require_multi_task(m, "catastrophic_forgetting");
    const int t_count = m.num_tasks();
    double sum = 0.0;
    for (int i = 0; i < t_count - 1; ++i) {
        // max over rows i..T-1 (1-based), i.e. everything before the final row
        double peak = m.values(i, i);
        for (int t = i; t < t_count - 1; ++t) peak = std::max(peak, m.values(t, i));
        sum += peak - m.values(t_count - 1, i);
    }
    return sum / static_cast<double>(t_count - 1);
}

std::vector<double> cfr_terms(const EvalMatrix& m) {
    require_multi_task(m, "catastrophic_forgetting_rate");
    const int t_count = m.num_tasks();
    std::vector<double> terms(t_count - 1, std::numeric_limits<double>::quiet_NaN());
    for (int i = 0; i < t_count - 1; ++i) {
        double peak = m.values(i, i);
        for (int t = i; t < t_count - 1; ++t) peak = std::max(peak, m.values(t, i));
        if (peak != 0.0) terms[i] = (peak - m.values(t_count - 1, i)) / peak;
    }
    return terms;
}

CfrResult catastrophic_forgetting_rate(const EvalMatrix& m) {
    CfrResult result;
    const auto terms = cfr_terms(m);
    double sum = 0.0;
    int kept = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (std::isnan(terms[i])) {
            result.excluded_tasks.push_back(static_cast<int>(i) + 1);
        } else {
            sum += terms[i];
            ++kept;
        }
    }
    result.value = kept > 0 ? sum / kept : 0.0;
    return result;
}

double cfr_loss_relative_increase(const EvalMatrix& m, double eps) {
    require_kind(m, EvalMatrix::Kind::loss, "cfr_loss_relative_increase");
    require_multi_task(m, "cfr_loss_relative_increase");
    const int t_count = m.num_tasks();
    double sum = 0.0;
    for (int i = 0; i < t_count - 1; ++i) {
        double best = m.values(i, i);
        for (int t = i; t < t_count; ++t) best = std::min(best, m.values(t, i));
        const double final = m.values(t_count - 1, i);
        sum += (final - best) / std::max(final, eps);
    }
    return sum / static_cast<double>(t_count - 1);
}

double cka(const Eigen::MatrixXd& gram_a, const Eigen::MatrixXd& gram_b) {
    if (gram_a.rows() != gram_a.cols() || gram_b.rows() != gram_b.cols() ||
        gram_a.rows() != gram_b.rows())
        throw ValidationError("cka: grams must be square and of equal size");
    const Eigen::Index n = gram_a.rows();
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n) -
                        Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::MatrixXd a = c * gram_a * c;
    Eigen::MatrixXd b = c * gram_b * c;
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        throw ValidationError("cka: centered gram has zero norm, alignment undefined");
    return (a.array() * b.array()).sum() / (na * nb);
}

double feature_evolution(const ActivationKernelSeries& series, int reference_index) {
    const int n = static_cast<int>(series.grams.size());
    if (n == 0) throw ValidationError("feature_evolution: empty series");
    if (reference_index < 0 || reference_index >= n)
        throw ValidationError("feature_evolution: reference index out of range");
    if (reference_index == n - 1)
        throw ValidationError("feature_evolution: no checkpoints after the reference");
    double sum = 0.0;
    for (int k = reference_index + 1; k < n; ++k)
        sum += 1.0 - cka(series.grams[reference_index], series.grams[k]);
    return sum / static_cast<double>(n - 1 - reference_index);
}

void write_eval_matrix_csv(const std::string& path, const EvalMatrix& m) {
    std::vector<std::vector<std::string>> rows;
    const std::string kind = m.kind == EvalMatrix::Kind::accuracy ? "accuracy" : "loss";
    const std::string t = std::to_string(m.num_tasks());
    for (int r = 0; r < m.num_tasks(); ++r)
        for (int c = 0; c < m.num_tasks(); ++c)
            rows.push_back({kind, t, std::to_string(r + 1), std::to_string(c + 1),
                            csv::format(m.values(r, c))});
    csv::write_table(path, {"kind", "T", "row", "col", "value"}, rows);
}

EvalMatrix read_eval_matrix_csv(const std::string& path) {
    std::vector<std::string> header;
    auto rows = csv::read_table(path, &header);
    if (header != std::vector<std::string>{"kind", "T", "row", "col", "value"})
        throw IoError("unexpected eval matrix header in " + path);
    if (rows.empty()) throw IoError("empty eval matrix in " + path);
    const int t_count = std::atoi(rows.front()[1].c_str());
    if (t_count < 1) throw IoError("bad T in " + path);
    EvalMatrix m;
    m.kind = rows.front()[0] == "accuracy" ? EvalMatrix::Kind::accuracy : EvalMatrix::Kind::loss;
    m.values.setZero(t_count, t_count);
    for (const auto& row : rows) {
        const int r = std::atoi(row[2].c_str()) - 1;
        const int c = std::atoi(row[3].c_str()) - 1;
        if (r < 0 || r >= t_count || c < 0 || c >= t_count)
            throw IoError("eval matrix index out of range in " + path);
        m.values(r, c) = std::strtod(row[4].c_str(), nullptr);
    }
    return m;
}

void write_metric_report_csv(const std::string& path,
                             const std::vector<std::pair<std::string, double>>& metrics) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [name, value] : metrics) rows.push_back({name, csv::format(value)});
    csv::write_table(path, {"metric", "value"}, rows);
}

}  // namespace cldyn
