#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cldyn {

/// One task's regression data. Inputs are stored column-wise (D x P) and the
/// synthetic generators scale columns to squared norm D so that self Grams
/// under the x.x/D convention come out with unit diagonal.
struct TaskDataset {
    Eigen::MatrixXd inputs;   // D x P
    Eigen::VectorXd targets;  // P
    int task_index = 1;       // 1-based

    int dim() const { return static_cast<int>(inputs.rows()); }
    int samples() const { return static_cast<int>(inputs.cols()); }
};

enum class SequenceKind { rotated, permuted, custom };

struct SimilaritySpec {
    SequenceKind kind = SequenceKind::rotated;
    double rho = 0.0;  // in [0, 1]
    std::uint64_t seed = 0;
};

/// An ordered task sequence together with the full cross-task input Gram
/// K^x_{mu nu} = x_mu . x_nu / D over all (sum P) samples.
struct TaskSequence {
    std::vector<TaskDataset> tasks;
    SequenceKind kind = SequenceKind::custom;
    std::optional<double> similarity;  // rho, when generated synthetically
    Eigen::MatrixXd gram;

    int num_tasks() const { return static_cast<int>(tasks.size()); }
    int dim() const { return tasks.empty() ? 0 : tasks.front().dim(); }
    int total_samples() const;
    /// Column offset of task i (0-based task index) in the flattened sample order.
    int sample_offset(int task) const;
    /// All targets concatenated in the flattened sample order.
    Eigen::VectorXd all_targets() const;
    /// All inputs concatenated column-wise, D x (sum P).
    Eigen::MatrixXd all_inputs() const;
};

/// T tasks of P samples each in dimension D with exact cross-task Gram rho*I
/// and self Gram I. Columns of task i are sqrt(rho)*u0 + sqrt(1-rho)*ui over
/// T+1 mutually orthogonal column blocks, which needs D >= (T+1)*P.
/// The shared targets vector (length P) is reused by every task.
TaskSequence make_rotated_tasks(int T, int P, int D, double rho, const Eigen::VectorXd& targets,
                                std::uint64_t seed);

/// Task 1 is the base dataset; each later task applies a fresh uniform random
/// permutation to a fixed coordinate block of size ceil((1-rho)*D). By default
/// the block is the last ceil((1-rho)*D) indices; pass `permuted_indices` to
/// override. rho = 1 leaves the inputs bit-identical to the base.
TaskSequence make_permuted_tasks(const TaskDataset& base, int T, double rho, std::uint64_t seed,
                                 const std::vector<int>* permuted_indices = nullptr);

/// Recompute the (sum P) x (sum P) Gram from the sequence's inputs.
Eigen::MatrixXd input_gram(const TaskSequence& seq);

struct GramValidation {
    struct Failure {
        std::string check;   // "symmetry", "psd", "cross_block"
        double value = 0.0;  // offending magnitude
        std::string detail;
    };
    std::vector<Failure> failures;
    double symmetry_defect = 0.0;
    double min_eigenvalue = 0.0;
    Eigen::VectorXd eigenvalues;
    std::optional<double> max_cross_deviation;  // vs rho*I, synthetic rotated only

    bool ok() const { return failures.empty(); }
};

/// Structural checks on the sequence Gram: symmetry, PSD via the eigenvalue
/// spectrum, and (for rotated sequences) cross blocks against rho*I. Reports
/// failures instead of throwing.
GramValidation validate_gram(const TaskSequence& seq, double tol);

/// Columnar dataset file: header `task,sample,target,x0,...,x{D-1}`.
void write_dataset_csv(const std::string& path, const TaskSequence& seq);
TaskSequence read_dataset_csv(const std::string& path);

}  // namespace cldyn
