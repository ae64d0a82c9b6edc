#include "cldyn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include <Eigen/Dense>

#include "cldyn/csv.hpp"
#include "cldyn/errors.hpp"
#include "cldyn/rng.hpp"

namespace cldyn {

namespace {

void check_rho(double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in [0, 1]");
}

Eigen::MatrixXd gram_of(const Eigen::MatrixXd& all_inputs) {
    const double d = static_cast<double>(all_inputs.rows());
    Eigen::MatrixXd g = all_inputs.transpose() * all_inputs / d;
    g = 0.5 * (g + g.transpose()).eval();  // exact symmetry
    return g;
}

}  // namespace

int TaskSequence::total_samples() const {
    int n = 0;
    for (const auto& t : tasks) n += t.samples();
    return n;
}

int TaskSequence::sample_offset(int task) const {
    int off = 0;
    for (int i = 0; i < task; ++i) off += tasks[i].samples();
    return off;
}

Eigen::VectorXd TaskSequence::all_targets() const {
    Eigen::VectorXd y(total_samples());
    int off = 0;
    for (const auto& t : tasks) {
        y.segment(off, t.samples()) = t.targets;
        off += t.samples();
    }
    return y;
}

Eigen::MatrixXd TaskSequence::all_inputs() const {
    Eigen::MatrixXd x(dim(), total_samples());
    int off = 0;
    for (const auto& t : tasks) {
        x.middleCols(off, t.samples()) = t.inputs;
        off += t.samples();
    }
    return x;
}

TaskSequence make_rotated_tasks(int T, int P, int D, double rho, const Eigen::VectorXd& targets,
                                std::uint64_t seed) {
    if (T < 1) throw ValidationError("T must be >= 1");
    if (P < 1) throw ValidationError("P must be >= 1");
    check_rho(rho);
    if (targets.size() != P) throw ValidationError("targets must have length P");
    if (D < (T + 1) * P)
        throw ValidationError("dimension too small: rotated construction needs D >= (T+1)*P, got D=" +
                              std::to_string(D) + " for T=" + std::to_string(T) +
                              ", P=" + std::to_string(P));

    // T+1 mutually orthonormal column blocks from a QR of a Gaussian matrix,
    // rescaled so each column has squared norm D.
    auto eng = make_engine(derive_seed(seed, "rotated-basis"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd raw(D, (T + 1) * P);
    for (Eigen::Index j = 0; j < raw.cols(); ++j)
        for (Eigen::Index i = 0; i < raw.rows(); ++i) raw(i, j) = gauss(eng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(D, (T + 1) * P);
    q *= std::sqrt(static_cast<double>(D));

    const double w_shared = std::sqrt(rho);
    const double w_own = std::sqrt(1.0 - rho);

    TaskSequence seq;
    seq.kind = SequenceKind::rotated;
    seq.similarity = rho;
    seq.tasks.resize(T);
    for (int i = 0; i < T; ++i) {
        auto& task = seq.tasks[i];
        task.task_index = i + 1;
        task.targets = targets;
        task.inputs = w_shared * q.middleCols(0, P) + w_own * q.middleCols((i + 1) * P, P);
    }
    seq.gram = input_gram(seq);

    // Construction postcondition: self blocks = I, cross blocks = rho*I, to 1e-12.
    for (int i = 0; i < T; ++i) {
        for (int j = 0; j <= i; ++j) {
            Eigen::MatrixXd block = seq.gram.block(seq.sample_offset(i), seq.sample_offset(j), P, P);
            const double target = (i == j) ? 1.0 : rho;
            const double defect =
                (block - target * Eigen::MatrixXd::Identity(P, P)).cwiseAbs().maxCoeff();
            if (defect > 1e-12)
                throw ValidationError("rotated construction failed its Gram postcondition (defect " +
                                      std::to_string(defect) + ")");
        }
    }
    return seq;
}

TaskSequence make_permuted_tasks(const TaskDataset& base, int T, double rho, std::uint64_t seed,
                                 const std::vector<int>* permuted_indices) {
    if (T < 1) throw ValidationError("T must be >= 1");
    check_rho(rho);
    if (base.samples() < 1 || base.dim() < 1) throw ValidationError("base dataset is empty");
    if (base.targets.size() != base.samples())
        throw ValidationError("base targets length does not match sample count");

    const int d = base.dim();
    std::vector<int> block;
    if (permuted_indices) {
        block = *permuted_indices;
        for (int idx : block)
            if (idx < 0 || idx >= d) throw ValidationError("permuted index out of range");
    } else {
        const int m = static_cast<int>(std::ceil((1.0 - rho) * d));
        block.resize(m);
        std::iota(block.begin(), block.end(), d - m);  // last m coordinates
    }

    TaskSequence seq;
    seq.kind = SequenceKind::permuted;
    seq.similarity = rho;
    seq.tasks.resize(T);
    seq.tasks[0] = base;
    seq.tasks[0].task_index = 1;

    for (int i = 1; i < T; ++i) {
        std::vector<int> perm(block.size());
        std::iota(perm.begin(), perm.end(), 0);
        auto eng = make_engine(derive_seed(seed, "permutation", static_cast<std::uint64_t>(i)));
        std::shuffle(perm.begin(), perm.end(), eng);

        auto& task = seq.tasks[i];
        task.task_index = i + 1;
        task.targets = base.targets;
        task.inputs = base.inputs;
        for (std::size_t k = 0; k < block.size(); ++k)
            task.inputs.row(block[k]) = base.inputs.row(block[perm[k]]);
    }
    seq.gram = input_gram(seq);
    return seq;
}

Eigen::MatrixXd input_gram(const TaskSequence& seq) {
    if (seq.tasks.empty()) throw ValidationError("cannot compute the Gram of an empty sequence");
    return gram_of(seq.all_inputs());
}

GramValidation validate_gram(const TaskSequence& seq, double tol) {
    if (!(tol > 0.0)) throw ValidationError("tol must be > 0");
    GramValidation report;
    const Eigen::MatrixXd& g = seq.gram;

    report.symmetry_defect = (g - g.transpose()).cwiseAbs().maxCoeff();
    if (report.symmetry_defect > tol)
        report.failures.push_back({"symmetry", report.symmetry_defect, "gram is not symmetric"});

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (g + g.transpose()));
    report.eigenvalues = eig.eigenvalues();
    report.min_eigenvalue = report.eigenvalues.minCoeff();
    if (report.min_eigenvalue < -tol)
        report.failures.push_back({"psd", report.min_eigenvalue, "gram has a negative eigenvalue"});

    if (seq.kind == SequenceKind::rotated && seq.similarity) {
        const double rho = *seq.similarity;
        double worst = 0.0;
        for (int i = 0; i < seq.num_tasks(); ++i) {
            for (int j = 0; j < i; ++j) {
                const int pi = seq.tasks[i].samples();
                const int pj = seq.tasks[j].samples();
                Eigen::MatrixXd block =
                    g.block(seq.sample_offset(i), seq.sample_offset(j), pi, pj);
                Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(pi, pj);
                expect.diagonal().setConstant(rho);
                worst = std::max(worst, (block - expect).cwiseAbs().maxCoeff());
            }
        }
        report.max_cross_deviation = worst;
        if (worst > tol)
            report.failures.push_back({"cross_block", worst, "cross block deviates from rho*I"});
    }
    return report;
}

void write_dataset_csv(const std::string& path, const TaskSequence& seq) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    const int d = seq.dim();
    f << "task,sample,target";
    for (int k = 0; k < d; ++k) f << ",x" << k;
    f << '\n';
    for (const auto& task : seq.tasks) {
        for (int s = 0; s < task.samples(); ++s) {
            f << task.task_index << ',' << s << ',' << csv::format(task.targets(s));
            for (int k = 0; k < d; ++k) f << ',' << csv::format(task.inputs(k, s));
            f << '\n';
        }
    }
    if (!f) throw IoError("write failed: " + path);
}

TaskSequence read_dataset_csv(const std::string& path) {
    std::vector<std::string> header;
    auto rows = csv::read_table(path, &header);
    if (header.size() < 4 || header[0] != "task" || header[1] != "sample" || header[2] != "target")
        throw IoError("unexpected dataset header in " + path);
    const int d = static_cast<int>(header.size()) - 3;

    std::vector<int> task_ids;
    std::vector<std::vector<std::pair<double, Eigen::VectorXd>>> per_task;
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != d + 3) throw IoError("ragged dataset row in " + path);
        const int task = std::atoi(row[0].c_str());
        if (task < 1) throw IoError("bad task index in " + path);
        auto it = std::find(task_ids.begin(), task_ids.end(), task);
        std::size_t ti;
        if (it == task_ids.end()) {
            task_ids.push_back(task);
            per_task.emplace_back();
            ti = task_ids.size() - 1;
        } else {
            ti = static_cast<std::size_t>(it - task_ids.begin());
        }
        Eigen::VectorXd x(d);
        for (int k = 0; k < d; ++k) x(k) = std::strtod(row[k + 3].c_str(), nullptr);
        per_task[ti].emplace_back(std::strtod(row[2].c_str(), nullptr), std::move(x));
    }

    TaskSequence seq;
    seq.kind = SequenceKind::custom;
    seq.tasks.resize(per_task.size());
    for (std::size_t i = 0; i < per_task.size(); ++i) {
        auto& task = seq.tasks[i];
        task.task_index = task_ids[i];
        const int p = static_cast<int>(per_task[i].size());
        task.inputs.resize(d, p);
        task.targets.resize(p);
        for (int s = 0; s < p; ++s) {
            task.targets(s) = per_task[i][s].first;
            task.inputs.col(s) = per_task[i][s].second;
        }
    }
    seq.gram = input_gram(seq);
    return seq;
}

}  // namespace cldyn
