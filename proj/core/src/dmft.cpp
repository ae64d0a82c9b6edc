#include "cldyn/dmft.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "cldyn/csv.hpp"
#include "cldyn/errors.hpp"
#include "cldyn/metrics.hpp"
#include "cldyn/rng.hpp"

namespace cldyn::dmft {

namespace {

constexpr double kGramJitter = 1e-10;

Eigen::VectorXd task_losses(const Eigen::VectorXd& residuals, const TaskSequence& seq) {
    Eigen::VectorXd losses(seq.num_tasks());
    for (int i = 0; i < seq.num_tasks(); ++i) {
        const auto seg = residuals.segment(seq.sample_offset(i), seq.tasks[i].samples());
        losses(i) = 0.5 * seg.squaredNorm();
    }
    return losses;
}

}  // namespace

int DmftConfig::steps_for(int task) const {
    if (steps_per_task.empty()) return 0;
    if (steps_per_task.size() == 1) return steps_per_task.front();
    return steps_per_task.at(static_cast<std::size_t>(task));
}

void DmftConfig::validate(int num_tasks) const {
    if (!(dt > 0.0)) throw ValidationError("dmft: dt must be > 0");
    if (samples < 2) throw ValidationError("dmft: S must be >= 2");
    if (!(gamma0 >= 0.0)) throw ValidationError("dmft: gamma0 must be >= 0");
    if (steps_per_task.empty()) throw ValidationError("dmft: steps_per_task is empty");
    if (steps_per_task.size() != 1 && static_cast<int>(steps_per_task.size()) != num_tasks)
        throw ValidationError("dmft: steps_per_task must have one entry or one per task");
    for (int s : steps_per_task)
        if (s < 0) throw ValidationError("dmft: steps_per_task entries must be >= 0");
    if (checkpoint_every < 1) throw ValidationError("dmft: checkpoint_every must be >= 1");
    if (snapshot_every < 0) throw ValidationError("dmft: snapshot_every must be >= 0");
}

FieldEnsemble sample_initial_fields(const Eigen::MatrixXd& gram, int samples, XiMode xi_mode,
                                    std::uint64_t seed) {
    if (samples < 2) throw ValidationError("dmft: S must be >= 2");
    if (gram.rows() != gram.cols() || gram.rows() < 1)
        throw ValidationError("dmft: gram must be square and non-empty");

    const Eigen::Index m = gram.rows();
    Eigen::MatrixXd jittered = gram + kGramJitter * Eigen::MatrixXd::Identity(m, m);
    Eigen::LLT<Eigen::MatrixXd> llt(jittered);
    if (llt.info() != Eigen::Success)
        throw ValidationError("dmft: gram factorization failed even with jitter; "
                              "the matrix is not positive semi-definite");
    Eigen::MatrixXd chol_l = llt.matrixL();

    FieldEnsemble ens;
    ens.gram = gram;
    ens.chi.resize(samples, m);
    ens.xi.resize(samples);

    auto eng = make_engine(derive_seed(seed, "dmft-fields"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd standard(m);
    for (int s = 0; s < samples; ++s) {
        for (Eigen::Index j = 0; j < m; ++j) standard(j) = gauss(eng);
        ens.chi.row(s) = (chol_l * standard).transpose();
        ens.xi(s) = xi_mode == XiMode::gaussian ? gauss(eng) : 0.0;
    }
    ens.h = ens.chi;
    ens.z = ens.xi;
    return ens;
}

void step(FieldEnsemble& ensemble, const Eigen::VectorXd& residuals, const DmftConfig& cfg,
          TaskSpan current) {
    if (cfg.gamma0 == 0.0) return;
    if (residuals.size() != ensemble.num_data())
        throw ValidationError("dmft: residual vector does not cover all data");
    if (current.begin < 0 || current.count < 1 ||
        current.begin + current.count > ensemble.num_data())
        throw ValidationError("dmft: current task span out of range");

    const auto h_cur = ensemble.h.middleCols(current.begin, current.count);
    const Eigen::VectorXd delta_cur = residuals.segment(current.begin, current.count);

    // g_a^{(s)} = phi'(h_a^{(s)}) z^{(s)}
    Eigen::MatrixXd g_cur =
        activate_derivative(cfg.activation, h_cur).array().colwise() * ensemble.z.array();
    Eigen::VectorXd phi_dot_delta = activate(cfg.activation, h_cur) * delta_cur;

    const double scale = cfg.gamma0 * cfg.dt;
    ensemble.h.noalias() +=
        scale * g_cur * (delta_cur.asDiagonal() *
                         ensemble.gram.middleRows(current.begin, current.count));
    ensemble.z += scale * phi_dot_delta;
}

Kernels estimate_kernels(const FieldEnsemble& ensemble, Activation activation) {
    const double inv_s = 1.0 / static_cast<double>(ensemble.num_samples());
    Kernels k;
    Eigen::MatrixXd phi_h = activate(activation, ensemble.h);
    Eigen::MatrixXd g_all =
        activate_derivative(activation, ensemble.h).array().colwise() * ensemble.z.array();
    k.phi.noalias() = inv_s * phi_h.transpose() * phi_h;
    k.g.noalias() = inv_s * g_all.transpose() * g_all;
    k.phi = 0.5 * (k.phi + k.phi.transpose()).eval();
    k.g = 0.5 * (k.g + k.g.transpose()).eval();
    k.ntk = k.phi + k.g.cwiseProduct(ensemble.gram);
    return k;
}

Trajectory simulate(const TaskSequence& seq, const DmftConfig& cfg) {
    if (seq.tasks.empty()) throw ValidationError("dmft: empty task sequence");
    cfg.validate(seq.num_tasks());

    const int t_count = seq.num_tasks();
    const int m = seq.total_samples();
    FieldEnsemble ens = sample_initial_fields(seq.gram, cfg.samples, cfg.xi_mode, cfg.seed);

    long total_steps = 0;
    for (int i = 0; i < t_count; ++i) total_steps += cfg.steps_for(i);
    const long approx_records = total_steps / cfg.checkpoint_every + t_count + 2;

    Trajectory traj;
    for (const auto& task : seq.tasks) traj.task_sizes.push_back(task.samples());
    traj.times.reserve(approx_records);
    traj.losses.resize(approx_records, t_count);
    traj.forgetting.resize(approx_records, t_count);
    traj.residuals.resize(approx_records, m);

    Eigen::VectorXd residuals = seq.all_targets();  // f = 0 at t = 0
    Eigen::VectorXd loss_at_task_end = Eigen::VectorXd::Zero(t_count);
    Eigen::VectorXd tasks_ended = Eigen::VectorXd::Zero(t_count);

    int record = 0;
    long last_recorded_step = -1;
    auto record_state = [&](long step_idx, int training_task) {
        last_recorded_step = step_idx;
        traj.times.push_back(static_cast<double>(step_idx) * cfg.dt);
        traj.steps.push_back(step_idx);
        traj.task_trained.push_back(training_task + 1);
        const Eigen::VectorXd losses = task_losses(residuals, seq);
        if (losses.maxCoeff() > cfg.overflow)
            throw DivergenceError("dmft: loss exceeded the overflow bound " +
                                  std::to_string(cfg.overflow));
        traj.losses.row(record) = losses;
        for (int i = 0; i < t_count; ++i)
            traj.forgetting(record, i) =
                tasks_ended(i) > 0.0 ? losses(i) - loss_at_task_end(i) : 0.0;
        traj.residuals.row(record) = residuals;
        ++record;
    };

    long step_idx = 0;
    for (int task = 0; task < t_count; ++task) {
        const TaskSpan span{seq.sample_offset(task), seq.tasks[task].samples()};
        const long steps = cfg.steps_for(task);
        for (long s = 0; s < steps; ++s) {
            if (step_idx % cfg.checkpoint_every == 0 && step_idx != last_recorded_step)
                record_state(step_idx, task);

            // Explicit Euler: kernels from start-of-step fields, then residual
            // and field updates both from start-of-step values.
            Eigen::MatrixXd phi_h = activate(cfg.activation, ens.h);
            Eigen::MatrixXd g_all =
                activate_derivative(cfg.activation, ens.h).array().colwise() * ens.z.array();
            const double inv_s = 1.0 / static_cast<double>(cfg.samples);
            Eigen::MatrixXd phi_cols =
                inv_s * phi_h.transpose() * phi_h.middleCols(span.begin, span.count);
            Eigen::MatrixXd g_cols =
                inv_s * g_all.transpose() * g_all.middleCols(span.begin, span.count);
            Eigen::MatrixXd ntk_cols =
                phi_cols + g_cols.cwiseProduct(ens.gram.middleCols(span.begin, span.count));

            if (cfg.snapshot_every > 0 && step_idx % cfg.snapshot_every == 0) {
                KernelSnapshot snap;
                snap.step = step_idx;
                snap.time = static_cast<double>(step_idx) * cfg.dt;
                snap.phi.noalias() = inv_s * phi_h.transpose() * phi_h;
                snap.g.noalias() = inv_s * g_all.transpose() * g_all;
                snap.phi = 0.5 * (snap.phi + snap.phi.transpose()).eval();
                snap.g = 0.5 * (snap.g + snap.g.transpose()).eval();
                snap.ntk = snap.phi + snap.g.cwiseProduct(ens.gram);
                traj.kernels.push_back(std::move(snap));
            }

            const Eigen::VectorXd delta_old = residuals;
            const Eigen::VectorXd delta_cur = delta_old.segment(span.begin, span.count);
            residuals.noalias() -= cfg.dt * (ntk_cols * delta_cur);
            step(ens, delta_old, cfg, span);
            ++step_idx;
        }
        record_state(step_idx, task);  // end-of-task state, half-open boundary
        traj.task_end_step.push_back(step_idx);
        traj.task_end_record.push_back(record - 1);
        loss_at_task_end(task) = traj.losses(record - 1, task);
        tasks_ended(task) = 1.0;
    }

    traj.losses.conservativeResize(record, t_count);
    traj.forgetting.conservativeResize(record, t_count);
    traj.residuals.conservativeResize(record, m);
    return traj;
}

double forgetting_rate_check(const Trajectory& traj) {
    if (traj.num_tasks() < 2) throw ValidationError("forgetting_rate_check needs two tasks");
    if (traj.residuals.size() == 0 || traj.kernels.empty())
        throw ValidationError("forgetting_rate_check needs residuals and per-step kernels");
    const int p1 = traj.task_sizes[0];
    const int p2 = traj.task_sizes[1];

    // Map recorded steps to kernel snapshots (cadence must be every step).
    if (traj.kernels.size() + 1 < traj.times.size())
        throw ValidationError("forgetting_rate_check needs kernel snapshots at every step");

    double max_defect = 0.0;
    const long task2_begin = traj.task_end_step[0];
    const long task2_end = traj.task_end_step[1];
    for (int r = traj.task_end_record[0]; r + 1 < traj.num_records(); ++r) {
        if (traj.steps[r] < task2_begin || traj.steps[r] >= task2_end) continue;
        const double dt = traj.times[r + 1] - traj.times[r];
        if (!(dt > 0.0)) continue;
        const double fd = (traj.forgetting(r + 1, 0) - traj.forgetting(r, 0)) / dt;
        const auto& k = traj.kernels[static_cast<std::size_t>(traj.steps[r])];
        if (k.step != traj.steps[r])
            throw ValidationError("forgetting_rate_check: kernel snapshots are not per-step");
        const Eigen::VectorXd d1 = traj.residuals.row(r).segment(0, p1);
        const Eigen::VectorXd d2 = traj.residuals.row(r).segment(p1, p2);
        const double bilinear = d1.transpose() * k.ntk.block(0, p1, p1, p2) * d2;
        max_defect = std::max(max_defect, std::abs(fd + bilinear));
    }
    return max_defect;
}

double kernel_target_alignment(const Eigen::MatrixXd& phi, const Eigen::VectorXd& targets) {
    if (phi.rows() != phi.cols() || phi.rows() != targets.size())
        throw ValidationError("kernel_target_alignment: phi must be square over the task's data");
    return cka(phi, targets * targets.transpose());
}

void write_fields_csv(const std::string& path, const FieldEnsemble& ensemble,
                      Activation activation) {
    Eigen::MatrixXd g_all =
        activate_derivative(activation, ensemble.h).array().colwise() * ensemble.z.array();
    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<std::size_t>(ensemble.num_samples()) * ensemble.num_data());
    for (int s = 0; s < ensemble.num_samples(); ++s)
        for (int mu = 0; mu < ensemble.num_data(); ++mu)
            rows.push_back({std::to_string(s), std::to_string(mu),
                            csv::format(ensemble.h(s, mu)), csv::format(g_all(s, mu))});
    csv::write_table(path, {"sample", "datum", "h", "g"}, rows);
}

}  // namespace cldyn::dmft
