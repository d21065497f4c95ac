#pragma once

#include <cstdint>
#include <vector>

#include "podlstm/trajectory.hpp"

namespace podlstm::dataset {

/// One training sample: a window of stacked [reduced state; parameters]
/// columns ending at the current step, and the reduced-state increment to the
/// next step as the target.
struct WindowSample {
    Eigen::MatrixXd inputs;  // (r + ell) x valid_length, oldest column first
    int valid_length = 0;    // number of real columns; short early-trajectory windows
    Eigen::VectorXd target;  // r: zbar[t+1] - zbar[t]
    int sim_id = 0;          // index into the source simulation list
    int time_index = 0;      // t of the window's newest column
};

/// Per-feature affine map to zero mean, unit spread. Applied featurewise to
/// every window column; targets have their own statistics.
struct Normalization {
    Eigen::VectorXd input_shift;  // r + ell
    Eigen::VectorXd input_scale;  // r + ell, floored away from zero
    Eigen::VectorXd target_shift; // r
    Eigen::VectorXd target_scale; // r

    Eigen::MatrixXd apply_inputs(const Eigen::MatrixXd& window) const;
    Eigen::VectorXd apply_target(const Eigen::VectorXd& target) const;
    Eigen::VectorXd invert_target(const Eigen::VectorXd& normalized) const;
};

struct WindowedDataset {
    std::vector<WindowSample> samples;
    int window_length = 0;
    int reduced_dim = 0;
    int param_dim = 0;
};

/// Deterministic shuffle-and-partition of simulation indices.
struct SplitSpec {
    std::uint64_t seed = 0;
    int train = 0;
    int validation = 0;
    int test = 0;
};

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> validation;
    std::vector<int> test;
};

SplitIndices split_simulations(int total, const SplitSpec& spec);

/// Slide windows over each (reduced trajectory, parameter trajectory) pair.
/// A trajectory of eta steps yields eta - 1 samples; windows near the start
/// are short rather than padded.
WindowedDataset build_windows(const std::vector<Eigen::MatrixXd>& reduced,
                              const std::vector<ParameterTrajectory>& params,
                              int window_length);

/// Statistics over each sample's newest column and target. Population
/// standard deviation, floored at 1e-8 so constant features stay finite.
Normalization fit_normalization(const WindowedDataset& dataset);

} // namespace podlstm::dataset
