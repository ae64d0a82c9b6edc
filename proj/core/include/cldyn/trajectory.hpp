#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "cldyn/metrics.hpp"

namespace cldyn {

struct KernelSnapshot {
    long step = 0;
    double time = 0.0;
    Eigen::MatrixXd phi;  // feature kernel
    Eigen::MatrixXd g;    // gradient kernel
    Eigen::MatrixXd ntk;  // phi + g .* K^x for one hidden layer
};

/// Time-indexed record shared by the finite trainer and the mean-field
/// simulator. Rows are checkpoints; losses and forgetting are per task,
/// residuals cover all (sum P) samples in task order.
struct Trajectory {
    std::vector<double> times;
    std::vector<long> steps;
    std::vector<int> task_trained;       // 1-based, per checkpoint
    Eigen::MatrixXd losses;              // checkpoints x T, loss_i = 0.5 * sum residual^2
    Eigen::MatrixXd forgetting;          // checkpoints x T, loss_i(t) - loss_i(end of task i)
    Eigen::MatrixXd residuals;           // checkpoints x (sum P), optional (0x0 when off)
    std::vector<KernelSnapshot> kernels; // at snapshot cadence
    std::vector<int> task_sizes;         // P_i
    std::vector<long> task_end_step;     // last training step of each task
    std::vector<int> task_end_record;    // checkpoint index at each task end

    int num_tasks() const { return static_cast<int>(task_sizes.size()); }
    int num_records() const { return static_cast<int>(times.size()); }

    /// Loss matrix L_{j,i}: loss on task i at the end of training task j.
    EvalMatrix loss_matrix() const;
};

/// Long-format export: header `time,task_trained,task_eval,loss,forgetting`,
/// one row per (checkpoint, evaluated task).
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace cldyn
