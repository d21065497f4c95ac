#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "podlstm/dataset.hpp"
#include "podlstm/hifi_sim.hpp"
#include "podlstm/io.hpp"
#include "podlstm/lstm.hpp"
#include "podlstm/metrics.hpp"
#include "podlstm/rollout.hpp"
#include "podlstm/trajectory.hpp"

namespace podlstm::harness {

/// Every random stream in the pipeline is pinned here; there is no implicit
/// entropy anywhere.
struct Seeds {
    std::uint64_t data = 1;    // excitation generation
    std::uint64_t split = 2;   // train/validation/test partition
    std::uint64_t init = 3;    // weight initialization
    std::uint64_t shuffle = 4; // epoch shuffling
};

struct ExperimentConfig {
    hifi::HifiModelConfig hifi;
    TimeGrid grid;
    hifi::ExcitationSpec excitation;
    int train_count = 1;
    int validation_count = 1;
    int test_count = 1;
    int reduced_dim = 1;
    int window_length = 1;
    std::vector<int> hidden_sizes;
    bool output_layer = false;
    lstm::TrainConfig training;
    Seeds seeds;
    std::vector<int> benchmark_sweep; // optional state-dim sweep for `benchmark`

    int total_simulations() const { return train_count + validation_count + test_count; }
    void validate() const;
};

/// Strict JSON parsing: unknown keys, wrong types, and inconsistent values
/// all raise ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::filesystem::path sim_file_path(const std::filesystem::path& dir, int sim_id);

/// Excitation stage alone: writes one parameter-only trajectory file per
/// simulation into `out_dir`.
void run_generate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct OfflineResult {
    rollout::SurrogateBundle bundle;
    io::DatasetManifest manifest;
    std::vector<lstm::EpochStats> history;
    int best_epoch = 0;
    double best_validation_loss = 0.0;
};

/// The full offline pipeline: generate, simulate, split, basis, dataset,
/// train. Persists every artifact in `out_dir`; on failure writes a FAILED
/// marker naming the stage and rethrows.
OfflineResult run_offline(const ExperimentConfig& config,
                          const std::filesystem::path& out_dir);

struct OnlineOptions {
    int sim_id = -1;     // >= 0 replays that stored simulation; -1 rolls out zero input
    int repetitions = 1; // timing repetitions for the reported realtime ratio
};

struct OnlineResult {
    StateTrajectory prediction;
    double realtime_ratio = 0.0;
    bool evaluated = false; // true when a stored reference was available
    metrics::SimulationReport report;
};

OnlineResult run_online(const ExperimentConfig& config,
                        const std::filesystem::path& bundle_dir,
                        const std::filesystem::path& out_dir, const OnlineOptions& options);

/// Scores every test-split simulation against the stored references, writes
/// per-simulation score CSVs plus the summary report, and prints a table.
std::vector<metrics::SimulationReport> run_evaluate(const ExperimentConfig& config,
                                                    const std::filesystem::path& bundle_dir,
                                                    const std::filesystem::path& out_dir,
                                                    int repetitions);

struct BenchmarkRow {
    int state_dim = 0;
    double hifi_ratio = 0.0;      // median realtime ratio of the full-order model
    double surrogate_ratio = 0.0; // median realtime ratio of the rollout
    double speedup = 0.0;         // hifi_ratio / surrogate_ratio
};

/// Times the full-order model against a shape-matched surrogate on the same
/// grid, per sweep entry (the config's own size when no sweep is given).
/// Timing needs no trained weights, so the surrogate is synthesized unless a
/// bundle directory is supplied and matches the size.
std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& config,
                                        const std::filesystem::path& out_dir, int repetitions,
                                        const std::filesystem::path* bundle_dir = nullptr);

} // namespace podlstm::harness
