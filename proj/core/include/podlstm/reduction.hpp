#pragma once

#include <utility>
#include <vector>

#include "podlstm/trajectory.hpp"

namespace podlstm::reduction {

/// Columns are full-order states gathered across simulations, simulation-major
/// and time-ordered within each simulation.
struct SnapshotMatrix {
    Eigen::MatrixXd data;                           // N x total samples
    std::vector<std::pair<int, int>> column_index;  // (simulation id, time index)
};

/// Truncated orthonormal basis from the snapshot SVD, plus the full list of
/// singular values (descending). `mean` is non-empty only when the optional
/// snapshot centering was requested.
struct ReducedBasis {
    Eigen::MatrixXd basis;           // V: N x r, orthonormal columns
    Eigen::VectorXd singular_values; // all d computed values, descending
    Eigen::VectorXd mean;            // empty unless centering was enabled

    int rank() const { return static_cast<int>(basis.cols()); }
    int full_dim() const { return static_cast<int>(basis.rows()); }
    bool centered() const { return mean.size() > 0; }
};

SnapshotMatrix assemble_snapshots(const std::vector<StateTrajectory>& trajectories);

struct PodOptions {
    /// Subtract the column mean before decomposing. Off by default: the basis
    /// is computed from the raw snapshots.
    bool center = false;
    /// Decompose the Gram matrix of the smaller dimension instead of the
    /// rectangular matrix once the aspect ratio reaches this factor.
    double gram_ratio = 4.0;
};

/// First r left-singular vectors of the snapshot matrix, sign-fixed so each
/// column's largest-magnitude entry is positive. Throws ArgumentError if r is
/// out of range and NumericError if the factorization fails.
ReducedBasis compute_pod(const SnapshotMatrix& snapshots, int r, const PodOptions& options = {});

/// zbar = V^T z (with the stored mean removed first, when present).
Eigen::VectorXd reduce(const ReducedBasis& basis, const Eigen::VectorXd& z);
Eigen::MatrixXd reduce_all(const ReducedBasis& basis, const Eigen::MatrixXd& z_columns);

/// z ~ V zbar (plus the stored mean, when present).
Eigen::VectorXd reconstruct(const ReducedBasis& basis, const Eigen::VectorXd& zbar);
Eigen::MatrixXd reconstruct_all(const ReducedBasis& basis, const Eigen::MatrixXd& zbar_columns);

} // namespace podlstm::reduction
