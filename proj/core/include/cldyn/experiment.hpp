#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cldyn/dataset.hpp"
#include "cldyn/trajectory.hpp"

namespace cldyn::experiment {

struct DataSpec {
    std::string kind = "rotated";  // rotated | permuted
    int tasks = 2;
    int samples_per_task = 1;
    int dim = 4;
    double rho = 0.0;
    std::string targets = "ones";  // ones | labels10 | comma-separated values
};

struct ModelSpec {
    std::string type = "dmft";  // dmft | finite
    double gamma0 = 1.0;
    std::string activation = "relu";
    double overflow = 1e12;
    // finite
    std::string parameterization = "mup";
    int width = 64;
    int base_width = 64;
    int depth = 1;
    int residual_alpha = 0;
    std::string readout_init = "zero";
    double eta0 = 0.25;
    // dmft
    int samples = 3000;
    double dt = 0.25;
    std::string xi_mode = "gaussian";
};

struct ScheduleSpec {
    std::vector<int> steps_per_task{1000};
    int checkpoint_every = 10;
    int kernel_snapshots = 0;  // cadence for K_t{step}.csv dumps, 0 = off
};

struct SweepSpec {
    std::string param;  // gamma0 | width | rho | steps
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
};

/// Flat key = value sections; no nesting, no includes.
struct ExperimentConfig {
    DataSpec data;
    ModelSpec model;
    ScheduleSpec schedule;
    std::optional<SweepSpec> sweep;

    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig parse_file(const std::string& path);
    /// Canonical serialization; hashing input and also valid parse input.
    std::string canonical() const;
    /// Throws ValidationError with the offending field path.
    void validate() const;
};

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string input_digest;   // content digest of config + generated data
    double wall_clock_sec = 0.0;
    std::vector<std::string> outputs;
    double gamma0_effective = 0.0;  // feature-learning strength on the shared time grid
    std::string model_type;
};

/// Build the task sequence for a config. All randomness derives from the
/// root seed split per component.
TaskSequence build_data(const DataSpec& spec, std::uint64_t root_seed);

struct RunResult {
    RunManifest manifest;
    Trajectory trajectory;
};

/// Execute one configured run end to end and write trajectory.csv,
/// eval_matrix.csv, metrics.csv and manifest.json into out_dir.
RunResult run(const ExperimentConfig& config, const std::string& out_dir, std::uint64_t seed);

struct SweepOutcome {
    std::vector<RunManifest> manifests;
    std::vector<std::string> failures;  // "param=value seed=s: error"
    std::string summary_path;
};

/// Cartesian product of sweep values and seeds, executed with up to `workers`
/// concurrent runs; emits sweep_summary.csv plus sweep_manifest.json.
/// Individual run failures are recorded and the sweep continues.
SweepOutcome sweep(const ExperimentConfig& config, const std::string& out_dir, int workers = 1);

struct ComparisonReport {
    double max_rel_loss_gap = 0.0;
    Eigen::MatrixXd rel_gap;  // records x tasks
    std::vector<std::pair<long, double>> kernel_fro_gaps;
    std::vector<double> field_ks;  // per datum, when field samples are given
};

/// Per-time relative loss differences between two runs on the same data and
/// grid; relative to the reference trajectory `b` with a floor of 1e-3 of its
/// per-task peak loss so fully fitted tails do not divide by zero.
/// Mismatched grids raise a ValidationError.
ComparisonReport compare(const Trajectory& a, const Trajectory& b);

/// Optional distribution comparison: columns are matched data, rows samples.
std::vector<double> field_ks_statistics(const Eigen::MatrixXd& fields_a,
                                        const Eigen::MatrixXd& fields_b);

void write_manifest_json(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest_json(const std::string& path);

/// FNV-1a 64-bit content digest, hex-encoded.
std::string content_digest(const std::string& bytes);

}  // namespace cldyn::experiment
