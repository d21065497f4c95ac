#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "podlstm/dataset.hpp"
#include "podlstm/lstm.hpp"
#include "podlstm/metrics.hpp"
#include "podlstm/reduction.hpp"
#include "podlstm/trajectory.hpp"

namespace podlstm::io {

/// All binary artifacts share the layout: 8 magic bytes, a format version
/// word, shape words, then payload. Words are little-endian 64-bit
/// (unsigned integers for shapes, IEEE doubles for data, row-major).
inline constexpr std::uint64_t kFormatVersion = 1;

/// States and parameters over one grid. Either block may be absent (zero
/// rows): parameter-set files carry no states, rollout outputs may carry no
/// parameters.
struct TrajectoryFile {
    TimeGrid grid;
    Eigen::MatrixXd states; // N x eta, N may be 0
    Eigen::MatrixXd params; // ell x eta, ell may be 0

    StateTrajectory state_trajectory() const;
    ParameterTrajectory parameter_trajectory() const;
};

void save_trajectory(const std::filesystem::path& path, const TrajectoryFile& file);
TrajectoryFile load_trajectory(const std::filesystem::path& path);

/// Basis files have no slot for a snapshot mean, so centered bases cannot be
/// persisted; save_basis rejects them.
void save_basis(const std::filesystem::path& path, const reduction::ReducedBasis& basis);
reduction::ReducedBasis load_basis(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const lstm::LstmModel& model);
lstm::LstmModel load_model(const std::filesystem::path& path);

/// Which simulations went where, plus the normalization fitted on the
/// training split.
struct DatasetManifest {
    std::vector<int> train_ids;
    std::vector<int> validation_ids;
    std::vector<int> test_ids;
    int reduced_dim = 0;
    int param_dim = 0;
    int window_length = 0;
    dataset::Normalization normalization;
};

void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// CSV emission, 17 significant digits throughout.
void write_history_csv(const std::filesystem::path& path,
                       const std::vector<lstm::EpochStats>& history);
void write_scores_csv(const std::filesystem::path& path, const metrics::ScoreTriplet& triplet);
void write_rollout_csv(const std::filesystem::path& path, const TimeGrid& grid,
                       const Eigen::MatrixXd& reduced);
void write_report_csv(const std::filesystem::path& path,
                      const std::vector<metrics::SimulationReport>& rows);
/// Generic table writer for benchmark output.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

std::string format_double(double value);

} // namespace podlstm::io
