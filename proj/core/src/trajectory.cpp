#include "cldyn/trajectory.hpp"

#include <algorithm>
#include <cstdlib>

#include "cldyn/csv.hpp"
#include "cldyn/errors.hpp"

namespace cldyn {

EvalMatrix Trajectory::loss_matrix() const {
    const int t_count = num_tasks();
    if (static_cast<int>(task_end_record.size()) != t_count)
        throw ValidationError("trajectory has no complete task-end records");
    EvalMatrix m;
    m.kind = EvalMatrix::Kind::loss;
    m.values.resize(t_count, t_count);
    for (int j = 0; j < t_count; ++j)
        for (int i = 0; i < t_count; ++i) m.values(j, i) = losses(task_end_record[j], i);
    return m;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::vector<std::vector<std::string>> rows;
    for (int r = 0; r < traj.num_records(); ++r) {
        for (int i = 0; i < traj.num_tasks(); ++i) {
            rows.push_back({csv::format(traj.times[r]), std::to_string(traj.task_trained[r]),
                            std::to_string(i + 1), csv::format(traj.losses(r, i)),
                            csv::format(traj.forgetting(r, i))});
        }
    }
    csv::write_table(path, {"time", "task_trained", "task_eval", "loss", "forgetting"}, rows);
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::vector<std::string> header;
    auto rows = csv::read_table(path, &header);
    if (header != std::vector<std::string>{"time", "task_trained", "task_eval", "loss", "forgetting"})
        throw IoError("unexpected trajectory header in " + path);

    Trajectory traj;
    int t_count = 0;
    for (const auto& row : rows) t_count = std::max(t_count, std::atoi(row[2].c_str()));
    if (t_count < 1 || rows.empty()) throw IoError("empty trajectory in " + path);
    if (rows.size() % static_cast<std::size_t>(t_count) != 0)
        throw IoError("trajectory rows are not a multiple of the task count in " + path);
    const int records = static_cast<int>(rows.size()) / t_count;

    traj.task_sizes.assign(t_count, 0);  // sample counts are not stored in the csv
    traj.losses.resize(records, t_count);
    traj.forgetting.resize(records, t_count);
    traj.times.resize(records);
    traj.steps.resize(records, 0);
    traj.task_trained.resize(records);
    for (int r = 0; r < records; ++r) {
        for (int i = 0; i < t_count; ++i) {
            const auto& row = rows[static_cast<std::size_t>(r) * t_count + i];
            const int task_eval = std::atoi(row[2].c_str()) - 1;
            traj.times[r] = std::strtod(row[0].c_str(), nullptr);
            traj.task_trained[r] = std::atoi(row[1].c_str());
            traj.losses(r, task_eval) = std::strtod(row[3].c_str(), nullptr);
            traj.forgetting(r, task_eval) = std::strtod(row[4].c_str(), nullptr);
        }
    }
    // Recover task-end records: the last checkpoint trained on task j is its end.
    traj.task_end_record.assign(t_count, 0);
    for (int r = 0; r < records; ++r) {
        const int tt = traj.task_trained[r];
        if (tt >= 1 && tt <= t_count) traj.task_end_record[tt - 1] = r;
    }
    return traj;
}

}  // namespace cldyn
