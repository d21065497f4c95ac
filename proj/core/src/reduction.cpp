#include "podlstm/reduction.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "podlstm/errors.hpp"

namespace podlstm::reduction {

SnapshotMatrix assemble_snapshots(const std::vector<StateTrajectory>& trajectories) {
    if (trajectories.empty()) throw ArgumentError("assemble_snapshots: no trajectories");
    const auto n = trajectories.front().states.rows();
    Eigen::Index total = 0;
    for (const auto& traj : trajectories) {
        traj.validate();
        if (traj.states.rows() != n)
            throw ArgumentError("assemble_snapshots: trajectories disagree on state dimension");
        total += traj.states.cols();
    }

    SnapshotMatrix out;
    out.data.resize(n, total);
    out.column_index.reserve(static_cast<std::size_t>(total));
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < trajectories.size(); ++j) {
        const auto& states = trajectories[j].states;
        out.data.middleCols(col, states.cols()) = states;
        for (Eigen::Index i = 0; i < states.cols(); ++i)
            out.column_index.emplace_back(static_cast<int>(j), static_cast<int>(i));
        col += states.cols();
    }
    return out;
}

namespace {

// Flip each column so its largest-magnitude entry is positive. Ties resolved
// by the first such entry top to bottom.
void fix_signs(Eigen::MatrixXd& basis) {
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
        Eigen::Index where = 0;
        basis.col(j).cwiseAbs().maxCoeff(&where);
        if (basis(where, j) < 0.0) basis.col(j) = -basis.col(j);
    }
}

struct ThinSvd {
    Eigen::MatrixXd u;      // rows(Z) x d
    Eigen::VectorXd sigma;  // d, descending
};

ThinSvd svd_direct(const Eigen::MatrixXd& z) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinU);
    if (svd.info() != Eigen::Success)
        throw NumericError("compute_pod: singular value decomposition failed");
    return {svd.matrixU(), svd.singularValues()};
}

// Method of snapshots: eigendecompose the d x d Gram matrix of the smaller
// side and recover the left singular vectors from it. Falls back to the
// rectangular SVD when trailing eigenvalues are too small to divide by.
ThinSvd svd_via_gram(const Eigen::MatrixXd& z) {
    const bool tall = z.rows() >= z.cols();
    const Eigen::MatrixXd gram = tall ? Eigen::MatrixXd(z.transpose() * z)
                                      : Eigen::MatrixXd(z * z.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success)
        throw NumericError("compute_pod: Gram eigendecomposition failed");

    const Eigen::Index d = gram.rows();
    // Ascending from the solver; we want descending.
    Eigen::VectorXd lambda(d);
    Eigen::MatrixXd vectors(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        lambda(i) = eig.eigenvalues()(d - 1 - i);
        vectors.col(i) = eig.eigenvectors().col(d - 1 - i);
    }

    // Squared singular values; clamp roundoff negatives.
    for (Eigen::Index i = 0; i < d; ++i) lambda(i) = std::max(lambda(i), 0.0);
    Eigen::VectorXd sigma = lambda.cwiseSqrt();

    // Dividing by a vanishing singular value would blow up; let the dense SVD
    // handle rank-deficient inputs instead.
    const double cutoff = sigma(0) * 1e-10;
    for (Eigen::Index i = 0; i < d; ++i)
        if (sigma(i) <= cutoff) return svd_direct(z);

    ThinSvd out;
    out.sigma = sigma;
    if (tall) {
        out.u = z * vectors;
        for (Eigen::Index i = 0; i < d; ++i) out.u.col(i) /= sigma(i);
    } else {
        out.u = vectors;
    }
    return out;
}

} // namespace

ReducedBasis compute_pod(const SnapshotMatrix& snapshots, int r, const PodOptions& options) {
    const Eigen::Index n = snapshots.data.rows();
    const Eigen::Index k = snapshots.data.cols();
    if (n == 0 || k == 0) throw ArgumentError("compute_pod: empty snapshot matrix");
    const Eigen::Index d = std::min(n, k);
    if (r < 1 || r > d)
        throw ArgumentError("compute_pod: rank " + std::to_string(r) +
                            " outside [1, " + std::to_string(d) + "]");
    if (!snapshots.data.allFinite())
        throw NumericError("compute_pod: snapshot matrix has non-finite entries");

    Eigen::MatrixXd work = snapshots.data;
    Eigen::VectorXd mean;
    if (options.center) {
        mean = work.rowwise().mean();
        work.colwise() -= mean;
    }

    const Eigen::Index big = std::max(n, k);
    const Eigen::Index small = std::min(n, k);
    const bool use_gram =
        static_cast<double>(big) >= options.gram_ratio * static_cast<double>(small);
    ThinSvd svd = use_gram ? svd_via_gram(work) : svd_direct(work);

    ReducedBasis out;
    out.basis = svd.u.leftCols(r);
    fix_signs(out.basis);
    out.singular_values = svd.sigma;
    if (options.center) out.mean = std::move(mean);
    return out;
}

namespace {

void check_full_dim(const ReducedBasis& basis, Eigen::Index rows, const char* who) {
    if (rows != basis.basis.rows())
        throw ArgumentError(std::string(who) + ": state dimension " + std::to_string(rows) +
                            " does not match basis dimension " +
                            std::to_string(basis.basis.rows()));
}

void check_reduced_dim(const ReducedBasis& basis, Eigen::Index rows, const char* who) {
    if (rows != basis.basis.cols())
        throw ArgumentError(std::string(who) + ": reduced dimension " + std::to_string(rows) +
                            " does not match basis rank " + std::to_string(basis.basis.cols()));
}

} // namespace

Eigen::VectorXd reduce(const ReducedBasis& basis, const Eigen::VectorXd& z) {
    check_full_dim(basis, z.size(), "reduce");
    if (basis.centered()) return basis.basis.transpose() * (z - basis.mean);
    return basis.basis.transpose() * z;
}

Eigen::MatrixXd reduce_all(const ReducedBasis& basis, const Eigen::MatrixXd& z_columns) {
    check_full_dim(basis, z_columns.rows(), "reduce_all");
    if (basis.centered())
        return basis.basis.transpose() * (z_columns.colwise() - basis.mean);
    return basis.basis.transpose() * z_columns;
}

Eigen::VectorXd reconstruct(const ReducedBasis& basis, const Eigen::VectorXd& zbar) {
    check_reduced_dim(basis, zbar.size(), "reconstruct");
    if (basis.centered()) return basis.basis * zbar + basis.mean;
    return basis.basis * zbar;
}

Eigen::MatrixXd reconstruct_all(const ReducedBasis& basis, const Eigen::MatrixXd& zbar_columns) {
    check_reduced_dim(basis, zbar_columns.rows(), "reconstruct_all");
    if (basis.centered()) return (basis.basis * zbar_columns).colwise() + basis.mean;
    return basis.basis * zbar_columns;
}

} // namespace podlstm::reduction
