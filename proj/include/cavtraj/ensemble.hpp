#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cavtraj/sde.hpp"

namespace cavtraj {

/// How each trajectory's starting point is produced.
struct InitialStateSpec {
    std::shared_ptr<const GroundState> ground;
    /// Needed only when Bogoliubov noise is sampled.
    std::shared_ptr<const BdGModeSet> modes;
    bool sample_noise = false;
    double temperature = 0.0;
    cplx alpha0{0.0, 0.0};
    /// Add symmetric-ordering vacuum noise to alpha (full cavity model).
    bool alpha_vacuum_noise = false;
};

struct EnsembleConfig {
    std::size_t n_trajectories = 1;
    std::uint64_t base_seed = 1;
    ModelParams params;
    StepScheme scheme;
    double t_final = 0.0;
    RecorderConfig recorder;
    InitialStateSpec initial;
    unsigned threads = 0;  // 0: hardware concurrency
    std::string checkpoint_path;
    /// Stop after this many further trajectories (0: run to the end). Used to
    /// interrupt a run deliberately.
    std::size_t stop_after = 0;
    /// Called on the reducing thread, in trajectory order, for every
    /// finished trajectory (failed ones included).
    std::function<void(std::size_t, const TrajectoryOutput&)> on_trajectory;
};

/// Running mean and sum of squared deviations of one channel, for every
/// time index and column.
struct Accumulator {
    std::size_t width = 1;
    std::vector<double> mean;
    std::vector<double> m2;
};

struct EnsembleStats {
    std::vector<double> times;
    std::size_t count = 0;  // successful trajectories folded in
    std::size_t processed = 0;  // trajectory indices consumed, failed included
    std::vector<std::size_t> failed;
    std::map<std::string, Accumulator> channels;

    void add(const TrajectoryOutput& traj);
    double mean(const std::string& channel, std::size_t time_index, std::size_t column = 0) const;
    /// Sample variance across trajectories.
    double variance(const std::string& channel, std::size_t time_index, std::size_t column = 0) const;
    /// Standard error of the mean.
    double standard_error(const std::string& channel, std::size_t time_index,
                          std::size_t column = 0) const;
    const Accumulator& channel(const std::string& name) const;
    bool complete(std::size_t n_trajectories) const { return processed >= n_trajectories; }
};

/// Trajectory k starts from its own generator seeded with base_seed + k.
TrajectoryState make_initial_state(const EnsembleConfig& config, std::size_t index);

EnsembleStats run_ensemble(const EnsembleConfig& config);
/// Continue from config.checkpoint_path. Throws ConfigError when the
/// checkpoint is corrupt or was written for different parameters.
EnsembleStats resume_ensemble(const EnsembleConfig& config);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string content_hash(const std::string& text);
/// Hash of everything that determines the trajectories of an ensemble.
std::string params_hash(const EnsembleConfig& config);

}  // namespace cavtraj
