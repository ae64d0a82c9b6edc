#include "cldyn/finite_net.hpp"

#include <cmath>
#include <string>

#include "cldyn/errors.hpp"
#include "cldyn/rng.hpp"

namespace cldyn::finite {

namespace {

struct BatchForward {
    std::vector<Eigen::MatrixXd> h;  // per layer, N x M
    Eigen::VectorXd outputs;         // M
};

/// Forward pass over a column batch X (D x M).
BatchForward forward_batch(const NetworkState& state, const ParamConfig& cfg,
                           const Eigen::MatrixXd& x) {
    const Scales sc = effective_scales(cfg);
    const double n = static_cast<double>(cfg.width);
    const double d = static_cast<double>(x.rows());

    BatchForward out;
    out.h.resize(cfg.depth);
    out.h[0] = state.hidden[0] * x / std::sqrt(d);
    for (int l = 1; l < cfg.depth; ++l) {
        out.h[l] = state.hidden[l] * activate(cfg.activation, out.h[l - 1]) / std::sqrt(n);
        if (cfg.residual_alpha) out.h[l] += out.h[l - 1];
    }
    out.outputs =
        activate(cfg.activation, out.h[cfg.depth - 1]).transpose() * state.readout /
        (sc.gamma * std::sqrt(n));
    return out;
}

/// Gradient fields g^l = sqrt(N) dh^{L+1}/dh^l for every layer, N x M.
std::vector<Eigen::MatrixXd> gradient_fields(const NetworkState& state, const ParamConfig& cfg,
                                             const BatchForward& fwd) {
    const double n = static_cast<double>(cfg.width);
    std::vector<Eigen::MatrixXd> g(cfg.depth);
    g[cfg.depth - 1] =
        activate_derivative(cfg.activation, fwd.h[cfg.depth - 1]).array().colwise() *
        state.readout.array();
    for (int l = cfg.depth - 2; l >= 0; --l) {
        Eigen::MatrixXd z = state.hidden[l + 1].transpose() * g[l + 1] / std::sqrt(n);
        g[l] = activate_derivative(cfg.activation, fwd.h[l]).array() * z.array();
        if (cfg.residual_alpha) g[l] += g[l + 1];
    }
    return g;
}

Eigen::VectorXd task_losses(const Eigen::VectorXd& residuals, const TaskSequence& seq) {
    Eigen::VectorXd losses(seq.num_tasks());
    for (int i = 0; i < seq.num_tasks(); ++i) {
        const auto seg = residuals.segment(seq.sample_offset(i), seq.tasks[i].samples());
        losses(i) = 0.5 * seg.squaredNorm();
    }
    return losses;
}

}  // namespace

void ParamConfig::validate() const {
    if (!(gamma0 > 0.0)) throw ValidationError("finite: gamma0 must be > 0");
    if (width < 1) throw ValidationError("finite: width must be >= 1");
    if (base_width < 1) throw ValidationError("finite: base width must be >= 1");
    if (depth < 1) throw ValidationError("finite: depth must be >= 1");
    if (residual_alpha != 0 && residual_alpha != 1)
        throw ValidationError("finite: residual alpha must be 0 or 1");
    if (!(eta0 > 0.0)) throw ValidationError("finite: eta0 must be > 0");
}

Scales effective_scales(const ParamConfig& cfg) {
    cfg.validate();
    if (cfg.parameterization == Parameterization::ntp) return {1.0, cfg.eta0};
    const double ratio = static_cast<double>(cfg.width) / static_cast<double>(cfg.base_width);
    return {cfg.gamma0 * std::sqrt(ratio), cfg.eta0 * cfg.gamma0 * cfg.gamma0 * ratio};
}

NetworkState init_network(const ParamConfig& cfg, int input_dim, std::uint64_t seed) {
    cfg.validate();
    if (input_dim < 1) throw ValidationError("finite: input dimension must be >= 1");

    auto eng = make_engine(derive_seed(seed, "finite-init"));
    std::normal_distribution<double> gauss(0.0, 1.0);

    NetworkState state;
    state.hidden.resize(cfg.depth);
    state.hidden[0].resize(cfg.width, input_dim);
    for (int l = 1; l < cfg.depth; ++l) state.hidden[l].resize(cfg.width, cfg.width);
    for (auto& w : state.hidden)
        for (Eigen::Index j = 0; j < w.cols(); ++j)
            for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = gauss(eng);

    state.readout.resize(cfg.width);
    if (cfg.readout_init == ReadoutInit::zero) {
        state.readout.setZero();
    } else {
        for (Eigen::Index i = 0; i < state.readout.size(); ++i) state.readout(i) = gauss(eng);
    }
    return state;
}

ForwardResult forward(const NetworkState& state, const ParamConfig& cfg, const Eigen::VectorXd& x) {
    if (x.size() != state.hidden[0].cols())
        throw ValidationError("finite: input dimension mismatch");
    BatchForward fwd = forward_batch(state, cfg, x);
    ForwardResult out;
    out.output = fwd.outputs(0);
    out.preactivations.reserve(fwd.h.size());
    for (const auto& h : fwd.h) out.preactivations.push_back(h.col(0));
    return out;
}

int TrainOptions::steps_for(int task) const {
    if (steps_per_task.empty()) return 0;
    if (steps_per_task.size() == 1) return steps_per_task.front();
    return steps_per_task.at(static_cast<std::size_t>(task));
}

void TrainOptions::validate(int num_tasks) const {
    if (steps_per_task.empty()) throw ValidationError("finite: steps_per_task is empty");
    if (steps_per_task.size() != 1 && static_cast<int>(steps_per_task.size()) != num_tasks)
        throw ValidationError("finite: steps_per_task must have one entry or one per task");
    for (int s : steps_per_task)
        if (s < 0) throw ValidationError("finite: steps_per_task entries must be >= 0");
    if (checkpoint_every < 1) throw ValidationError("finite: checkpoint_every must be >= 1");
    if (kernel_snapshot_every < 0)
        throw ValidationError("finite: kernel_snapshot_every must be >= 0");
}

Trajectory train_sequential(NetworkState& state, const ParamConfig& cfg, const TaskSequence& seq,
                            const TrainOptions& opts) {
    cfg.validate();
    opts.validate(seq.num_tasks());
    if (seq.tasks.empty()) throw ValidationError("finite: empty task sequence");
    if (seq.dim() != state.hidden[0].cols())
        throw ValidationError("finite: network input dimension does not match the data");

    const Scales sc = effective_scales(cfg);
    const double n = static_cast<double>(cfg.width);
    const double d = static_cast<double>(seq.dim());
    const double grad_scale = sc.eta / (sc.gamma * std::sqrt(n));

    const int t_count = seq.num_tasks();
    const int m = seq.total_samples();
    const Eigen::MatrixXd x_all = seq.all_inputs();
    const Eigen::VectorXd y_all = seq.all_targets();

    long total_steps = 0;
    for (int i = 0; i < t_count; ++i) total_steps += opts.steps_for(i);
    const long approx_records = total_steps / opts.checkpoint_every + t_count + 2;

    Trajectory traj;
    for (const auto& task : seq.tasks) traj.task_sizes.push_back(task.samples());
    traj.losses.resize(approx_records, t_count);
    traj.forgetting.resize(approx_records, t_count);
    if (opts.record_residuals) traj.residuals.resize(approx_records, m);

    Eigen::VectorXd loss_at_task_end = Eigen::VectorXd::Zero(t_count);
    Eigen::VectorXd tasks_ended = Eigen::VectorXd::Zero(t_count);

    int record = 0;
    long last_recorded_step = -1;
    auto record_state = [&](long step_idx, int training_task) {
        last_recorded_step = step_idx;
        BatchForward fwd = forward_batch(state, cfg, x_all);
        const Eigen::VectorXd residuals = y_all - fwd.outputs;
        const Eigen::VectorXd losses = task_losses(residuals, seq);
        if (losses.maxCoeff() > cfg.overflow || !losses.allFinite())
            throw DivergenceError("finite: loss exceeded the overflow bound " +
                                  std::to_string(cfg.overflow));
        traj.times.push_back(static_cast<double>(step_idx) * cfg.eta0);
        traj.steps.push_back(step_idx);
        traj.task_trained.push_back(training_task + 1);
        traj.losses.row(record) = losses;
        for (int i = 0; i < t_count; ++i)
            traj.forgetting(record, i) =
                tasks_ended(i) > 0.0 ? losses(i) - loss_at_task_end(i) : 0.0;
        if (opts.record_residuals) traj.residuals.row(record) = residuals;
        if (opts.kernel_snapshot_every > 0 && step_idx % opts.kernel_snapshot_every == 0) {
            KernelSnapshot snap;
            snap.step = step_idx;
            snap.time = static_cast<double>(step_idx) * cfg.eta0;
            auto kernels = compute_kernels(state, cfg, seq, 1);
            snap.phi = std::move(kernels.phi);
            snap.g = std::move(kernels.g);
            snap.ntk = std::move(kernels.ntk);
            traj.kernels.push_back(std::move(snap));
        }
        ++record;
    };

    long step_idx = 0;
    for (int task = 0; task < t_count; ++task) {
        state.current_task = task + 1;
        const int begin = seq.sample_offset(task);
        const int count = seq.tasks[task].samples();
        const Eigen::MatrixXd x_cur = x_all.middleCols(begin, count);
        const Eigen::VectorXd y_cur = y_all.segment(begin, count);
        const long steps = opts.steps_for(task);

        for (long s = 0; s < steps; ++s) {
            if (step_idx % opts.checkpoint_every == 0 && step_idx != last_recorded_step)
                record_state(step_idx, task);

            BatchForward fwd = forward_batch(state, cfg, x_cur);
            const Eigen::VectorXd delta = y_cur - fwd.outputs;
            if (0.5 * delta.squaredNorm() > cfg.overflow || !delta.allFinite())
                throw DivergenceError("finite: loss exceeded the overflow bound " +
                                      std::to_string(cfg.overflow));
            auto g = gradient_fields(state, cfg, fwd);

            // theta <- theta - eta grad: all layers updated from pre-step values.
            Eigen::VectorXd readout_update =
                grad_scale * (activate(cfg.activation, fwd.h[cfg.depth - 1]) * delta);
            state.hidden[0].noalias() +=
                (grad_scale / std::sqrt(d)) * (g[0] * delta.asDiagonal()) * x_cur.transpose();
            for (int l = 1; l < cfg.depth; ++l)
                state.hidden[l].noalias() +=
                    (grad_scale / std::sqrt(n)) * (g[l] * delta.asDiagonal()) *
                    activate(cfg.activation, fwd.h[l - 1]).transpose();
            state.readout += readout_update;

            ++step_idx;
            ++state.step;
        }
        record_state(step_idx, task);
        traj.task_end_step.push_back(step_idx);
        traj.task_end_record.push_back(record - 1);
        loss_at_task_end(task) = traj.losses(record - 1, task);
        tasks_ended(task) = 1.0;
    }

    traj.losses.conservativeResize(record, t_count);
    traj.forgetting.conservativeResize(record, t_count);
    if (opts.record_residuals) traj.residuals.conservativeResize(record, m);
    return traj;
}

dmft::Kernels compute_kernels(const NetworkState& state, const ParamConfig& cfg,
                              const TaskSequence& seq, int layer) {
    if (layer < 1 || layer > cfg.depth)
        throw ValidationError("finite: kernel layer out of range");
    const double n = static_cast<double>(cfg.width);
    const Eigen::MatrixXd x_all = seq.all_inputs();
    BatchForward fwd = forward_batch(state, cfg, x_all);
    auto g = gradient_fields(state, cfg, fwd);

    dmft::Kernels k;
    {
        Eigen::MatrixXd phi_h = activate(cfg.activation, fwd.h[layer - 1]);
        k.phi.noalias() = phi_h.transpose() * phi_h / n;
        k.g.noalias() = g[layer - 1].transpose() * g[layer - 1] / n;
        k.phi = 0.5 * (k.phi + k.phi.transpose()).eval();
        k.g = 0.5 * (k.g + k.g.transpose()).eval();
    }

    // Full parameter NTK: readout term + per-layer G^{l+1} .* Phi^l with
    // Phi^0 = K^x. For depth 1 this is Phi^1 + G^1 .* K^x exactly.
    Eigen::MatrixXd phi_top = activate(cfg.activation, fwd.h[cfg.depth - 1]);
    k.ntk.noalias() = phi_top.transpose() * phi_top / n;
    for (int l = 0; l < cfg.depth; ++l) {
        Eigen::MatrixXd g_kernel = g[l].transpose() * g[l] / n;
        if (l == 0) {
            k.ntk += g_kernel.cwiseProduct(seq.gram);
        } else {
            Eigen::MatrixXd phi_prev = activate(cfg.activation, fwd.h[l - 1]);
            k.ntk += g_kernel.cwiseProduct(Eigen::MatrixXd(phi_prev.transpose() * phi_prev / n));
        }
    }
    k.ntk = 0.5 * (k.ntk + k.ntk.transpose()).eval();
    return k;
}

FieldSamples extract_field_distributions(const NetworkState& state, const ParamConfig& cfg,
                                         const TaskSequence& seq) {
    BatchForward fwd = forward_batch(state, cfg, seq.all_inputs());
    auto g = gradient_fields(state, cfg, fwd);
    return {fwd.h[0], g[0]};
}

}  // namespace cldyn::finite
