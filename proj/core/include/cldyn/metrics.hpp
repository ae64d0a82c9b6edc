#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace cldyn {

/// T x T evaluation matrix: entry (j, i) is the accuracy (or training loss)
/// on task i after training task j. Indices in formulas are 1-based; storage
/// is 0-based.
struct EvalMatrix {
    enum class Kind { accuracy, loss };
    Kind kind = Kind::loss;
    Eigen::MatrixXd values;

    int num_tasks() const { return static_cast<int>(values.rows()); }
    /// Throws ValidationError on shape/range violations.
    void validate() const;
};

/// Mean over tasks of the diagonal a_{i,i}. Requires kind == accuracy.
double learning_accuracy(const EvalMatrix& m);
/// 1 - LA.
double learning_error(const EvalMatrix& m);
/// Diagonal mean of a loss matrix.
double learning_loss(const EvalMatrix& m);

/// Mean of the last row a_{T,i}. Requires kind == accuracy.
double average_accuracy(const EvalMatrix& m);
/// 1 - AA.
double average_error(const EvalMatrix& m);
/// Last-row mean of a loss matrix.
double average_loss(const EvalMatrix& m);

/// (1/(T-1)) sum_i [ max_{t in {i..T-1}} v_{t,i} - v_{T,i} ]. Works for both
/// kinds; for losses this is the printed convention, which goes negative when
/// later losses grow.
double catastrophic_forgetting(const EvalMatrix& m);

struct CfrResult {
    double value = 0.0;
    /// 1-based task indices excluded because their max term was zero (the
    /// relative drop is undefined there).
    std::vector<int> excluded_tasks;
};

/// Relative variant: each task's drop is divided by its max term. Tasks with
/// a zero max term are excluded and reported, never silently clamped.
CfrResult catastrophic_forgetting_rate(const EvalMatrix& m);

/// Per-task forgetting-rate terms (same windows as CFr), exposed so
/// relabeling tests can track how terms move under task permutations.
std::vector<double> cfr_terms(const EvalMatrix& m);

/// Alternate loss-forgetting measure used for figures:
/// (1/(T-1)) sum_i (L_{T,i} - min_{t in {i..T}} L_{t,i}) / max(L_{T,i}, eps).
/// Non-negative by construction; eps only guards the all-zero case.
double cfr_loss_relative_increase(const EvalMatrix& m, double eps = 1e-12);

/// Centered kernel alignment: Frobenius cosine of the double-centered Grams.
/// In [-1, 1], and in [0, 1] for PSD inputs. Throws on zero centered norm.
double cka(const Eigen::MatrixXd& gram_a, const Eigen::MatrixXd& gram_b);

/// Per-checkpoint activation Grams of a fixed probe set.
struct ActivationKernelSeries {
    std::vector<Eigen::MatrixXd> grams;
};

/// Mean over checkpoints after `reference_index` of 1 - CKA(reference, later).
double feature_evolution(const ActivationKernelSeries& series, int reference_index);

/// EvalMatrix file format: header `kind,T,row,col,value` (1-based row/col).
void write_eval_matrix_csv(const std::string& path, const EvalMatrix& m);
EvalMatrix read_eval_matrix_csv(const std::string& path);

/// Metric report file format: header `metric,value`.
void write_metric_report_csv(const std::string& path,
                             const std::vector<std::pair<std::string, double>>& metrics);

}  // namespace cldyn
