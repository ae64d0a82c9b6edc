#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "cldyn/activation.hpp"
#include "cldyn/dataset.hpp"
#include "cldyn/dmft.hpp"
#include "cldyn/trajectory.hpp"

namespace cldyn::finite {

enum class Parameterization { ntp, mup };
enum class ReadoutInit { zero, gaussian };

struct ParamConfig {
    Parameterization parameterization = Parameterization::mup;
    double gamma0 = 1.0;
    int width = 64;       // N
    int base_width = 64;  // N0; mup is normalized to match ntp at N = N0
    int depth = 1;        // L hidden layers
    int residual_alpha = 0;  // 0 or 1, skip connections between hidden blocks
    Activation activation = Activation::relu;
    double eta0 = 0.25;
    ReadoutInit readout_init = ReadoutInit::zero;
    double overflow = 1e12;

    void validate() const;
};

struct Scales {
    double gamma = 1.0;  // output scale
    double eta = 0.25;   // raw-parameter learning rate
};

/// ntp: (1, eta0) regardless of gamma0 and width.
/// mup: (gamma0 * sqrt(N/N0), eta0 * gamma0^2 * (N/N0)).
Scales effective_scales(const ParamConfig& cfg);

struct NetworkState {
    std::vector<Eigen::MatrixXd> hidden;  // W0 is N x D, W1..W{L-1} are N x N
    Eigen::VectorXd readout;              // w^L
    long step = 0;
    int current_task = 1;
};

/// Weight entries ~ N(0,1); the readout is zeroed under ReadoutInit::zero so
/// the output is exactly 0 at t = 0.
NetworkState init_network(const ParamConfig& cfg, int input_dim, std::uint64_t seed);

struct ForwardResult {
    double output = 0.0;
    std::vector<Eigen::VectorXd> preactivations;  // h^1..h^L
};

ForwardResult forward(const NetworkState& state, const ParamConfig& cfg, const Eigen::VectorXd& x);

struct TrainOptions {
    std::vector<int> steps_per_task;  // one entry, or one per task
    int checkpoint_every = 1;
    int kernel_snapshot_every = 0;  // 0 = off; snapshots use layer 1
    bool record_residuals = true;

    int steps_for(int task) const;
    void validate(int num_tasks) const;
};

/// Sequential full-batch gradient descent on the MSE of the current task
/// only; checkpoints record losses and residuals for every task. Throws
/// DivergenceError past the overflow bound.
Trajectory train_sequential(NetworkState& state, const ParamConfig& cfg, const TaskSequence& seq,
                            const TrainOptions& opts);

/// Feature kernel Phi^layer, gradient kernel G^layer, and the full NTK across
/// tasks. For depth 1 the NTK is exactly Phi^1 + G^1 .* K^x.
dmft::Kernels compute_kernels(const NetworkState& state, const ParamConfig& cfg,
                              const TaskSequence& seq, int layer = 1);

/// The N per-unit values of h^1 and g^1 for every datum, for distribution
/// comparison against the mean-field single-site marginals.
struct FieldSamples {
    Eigen::MatrixXd h;  // N x (sum P)
    Eigen::MatrixXd g;  // N x (sum P)
};

FieldSamples extract_field_distributions(const NetworkState& state, const ParamConfig& cfg,
                                         const TaskSequence& seq);

}  // namespace cldyn::finite
