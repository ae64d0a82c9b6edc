#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "cldyn/activation.hpp"
#include "cldyn/dataset.hpp"
#include "cldyn/trajectory.hpp"

namespace cldyn::dmft {

enum class XiMode { gaussian, zero };

struct DmftConfig {
    double gamma0 = 1.0;
    int samples = 3000;  // Monte-Carlo sample count S
    double dt = 0.25;
    std::vector<int> steps_per_task;  // one entry, or one per task
    Activation activation = Activation::relu;
    XiMode xi_mode = XiMode::gaussian;
    std::uint64_t seed = 0;
    int checkpoint_every = 1;    // loss/residual recording cadence
    int snapshot_every = 0;      // kernel snapshot cadence, 0 = off
    double overflow = 1e12;

    int steps_for(int task) const;
    void validate(int num_tasks) const;
};

/// Monte-Carlo ensemble of single-site fields. Rows are samples, columns are
/// data points in task order. The pre-gradient z is a single scalar process
/// per sample (one hidden layer), shared across data.
struct FieldEnsemble {
    Eigen::MatrixXd h;    // S x M pre-activation fields
    Eigen::VectorXd z;    // S pre-gradient fields
    Eigen::MatrixXd chi;  // S x M frozen initial draws
    Eigen::VectorXd xi;   // S frozen initial draws (zeros under XiMode::zero)
    Eigen::MatrixXd gram; // M x M input Gram the chi rows were drawn against

    int num_samples() const { return static_cast<int>(h.rows()); }
    int num_data() const { return static_cast<int>(h.cols()); }
};

/// Draw chi rows iid from N(0, gram) via a lower-triangular factorization
/// (jitter 1e-10 * I is added first) and xi from N(0, 1) or zeros.
FieldEnsemble sample_initial_fields(const Eigen::MatrixXd& gram, int samples, XiMode xi_mode,
                                    std::uint64_t seed);

struct TaskSpan {
    int begin = 0;
    int count = 0;
};

/// One explicit-Euler field update using start-of-step values. Only the
/// current task's residuals enter the sums:
///   h_mu += gamma0 dt sum_a Delta_a g_a K^x_{mu a},  g_a = phi'(h_a) z
///   z    += gamma0 dt sum_a Delta_a phi(h_a)
/// gamma0 == 0 leaves the ensemble bit-identical (no update applied).
void step(FieldEnsemble& ensemble, const Eigen::VectorXd& residuals, const DmftConfig& cfg,
          TaskSpan current);

struct Kernels {
    Eigen::MatrixXd phi;
    Eigen::MatrixXd g;
    Eigen::MatrixXd ntk;  // phi + g .* K^x
};

/// Sample means over the ensemble: Phi = E[phi(h) phi(h')], G = E[g g'],
/// and the across-task NTK assembled against the ensemble's Gram.
Kernels estimate_kernels(const FieldEnsemble& ensemble, Activation activation);

/// Full sequential-task simulation. Each Euler step estimates kernels,
/// updates all residuals from the current task's columns, then updates the
/// fields, all from start-of-step values.
Trajectory simulate(const TaskSequence& seq, const DmftConfig& cfg);

/// Max over task-2 steps of |finite-difference dCF/dt + Delta_1^T K_12
/// Delta_2|, which is O(dt) for an Euler run. Needs kernel snapshots at every
/// step and recorded residuals.
double forgetting_rate_check(const Trajectory& traj);

/// Centered Frobenius cosine between a task's feature kernel block and the
/// target outer product Y Y^T. Throws when a centered norm vanishes.
double kernel_target_alignment(const Eigen::MatrixXd& phi, const Eigen::VectorXd& targets);

/// Field-histogram export: header `sample,datum,h,g`.
void write_fields_csv(const std::string& path, const FieldEnsemble& ensemble,
                      Activation activation);

}  // namespace cldyn::dmft
