#include "podlstm/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "podlstm/errors.hpp"

namespace podlstm::metrics {

int ScoreSeries::undefined_count() const {
    int count = 0;
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (!std::isfinite(values(i))) ++count;
    return count;
}

ScoreSeries relative_score(const TimeGrid& grid, const Eigen::MatrixXd& ref,
                           const Eigen::MatrixXd& approx) {
    grid.validate();
    if (ref.rows() != approx.rows() || ref.cols() != approx.cols())
        throw ArgumentError("relative_score: reference and approximation shapes differ");
    if (ref.cols() != grid.eta)
        throw ArgumentError("relative_score: trajectory has " + std::to_string(ref.cols()) +
                            " steps, grid expects " + std::to_string(grid.eta));

    ScoreSeries series;
    series.grid = grid;
    series.values.resize(grid.eta);
    for (Eigen::Index i = 0; i < ref.cols(); ++i) {
        const double ref_norm = ref.col(i).norm();
        const double diff_norm = (ref.col(i) - approx.col(i)).norm();
        if (ref_norm == 0.0)
            series.values(i) =
                diff_norm == 0.0 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
        else
            series.values(i) = 1.0 - diff_norm / ref_norm;
    }
    return series;
}

ScoreSeries relative_score(const StateTrajectory& ref, const StateTrajectory& approx) {
    if (!(ref.grid == approx.grid))
        throw ArgumentError("relative_score: trajectories live on different grids");
    return relative_score(ref.grid, ref.states, approx.states);
}

namespace {

double mean_over(const ScoreSeries& series, Eigen::Index first, Eigen::Index last) {
    double sum = 0.0;
    int counted = 0;
    for (Eigen::Index i = first; i <= last; ++i) {
        if (!series.defined(static_cast<int>(i))) continue;
        sum += series.values(i);
        ++counted;
    }
    if (counted == 0)
        throw NumericError("mean_score: every step in the range is undefined");
    return sum / static_cast<double>(counted);
}

} // namespace

double mean_score(const ScoreSeries& series) {
    if (series.values.size() == 0) throw ArgumentError("mean_score: empty series");
    return mean_over(series, 0, series.values.size() - 1);
}

double mean_score(const ScoreSeries& series, double t_lo, double t_hi) {
    if (series.values.size() == 0) throw ArgumentError("mean_score: empty series");
    if (t_lo > t_hi) throw ArgumentError("mean_score: empty time range");
    // Absorb roundoff from t_start + i * dt so boundary steps stay included.
    const double slack = 1e-9 * series.grid.dt;
    Eigen::Index first = -1;
    Eigen::Index last = -1;
    for (Eigen::Index i = 0; i < series.values.size(); ++i) {
        const double t = series.grid.time(static_cast<int>(i));
        if (t < t_lo - slack || t > t_hi + slack) continue;
        if (first < 0) first = i;
        last = i;
    }
    if (first < 0)
        throw ArgumentError("mean_score: time range selects no steps");
    return mean_over(series, first, last);
}

ScoreTriplet score_triplet(const StateTrajectory& z_test, const ParameterTrajectory& mu,
                           const reduction::ReducedBasis& basis,
                           rollout::DeltaPredictor& predictor, int window_length) {
    z_test.validate();
    mu.validate();
    if (!(z_test.grid == mu.grid))
        throw ArgumentError("score_triplet: state and parameter grids differ");

    const Eigen::MatrixXd reduced_ref = reduction::reduce_all(basis, z_test.states);
    const Eigen::MatrixXd reduced_rollout =
        rollout::rollout_reduced(basis, predictor, window_length, z_test.states.col(0), mu);

    ScoreTriplet triplet;
    triplet.reconstruction = relative_score(z_test.grid, z_test.states,
                                            reduction::reconstruct_all(basis, reduced_ref));
    triplet.regression = relative_score(z_test.grid, reduced_ref, reduced_rollout);
    triplet.approximation = relative_score(z_test.grid, z_test.states,
                                           reduction::reconstruct_all(basis, reduced_rollout));
    return triplet;
}

ScoreTriplet score_triplet(const StateTrajectory& z_test, const ParameterTrajectory& mu,
                           const rollout::SurrogateBundle& bundle) {
    bundle.validate();
    rollout::LstmDeltaPredictor predictor(bundle.model);
    return score_triplet(z_test, mu, bundle.basis, predictor, bundle.window_length());
}

Eigen::VectorXd vec_nodes(const Eigen::MatrixXd& node_coords) {
    const Eigen::Index n_node = node_coords.rows();
    const Eigen::Index dims = node_coords.cols();
    Eigen::VectorXd state(n_node * dims);
    for (Eigen::Index m = 0; m < n_node; ++m)
        for (Eigen::Index c = 0; c < dims; ++c) state(m * dims + c) = node_coords(m, c);
    return state;
}

Eigen::MatrixXd unvec_nodes(const Eigen::VectorXd& state, int dims_per_node) {
    if (dims_per_node < 1)
        throw ArgumentError("unvec_nodes: dims_per_node must be >= 1");
    if (state.size() % dims_per_node != 0)
        throw ArgumentError("unvec_nodes: state size " + std::to_string(state.size()) +
                            " not divisible by " + std::to_string(dims_per_node));
    const Eigen::Index n_node = state.size() / dims_per_node;
    Eigen::MatrixXd node_coords(n_node, dims_per_node);
    for (Eigen::Index m = 0; m < n_node; ++m)
        for (Eigen::Index c = 0; c < dims_per_node; ++c)
            node_coords(m, c) = state(m * dims_per_node + c);
    return node_coords;
}

NodeDistances node_distance(const StateTrajectory& ref, const StateTrajectory& approx,
                            int dims_per_node) {
    if (!(ref.grid == approx.grid))
        throw ArgumentError("node_distance: trajectories live on different grids");
    if (ref.states.rows() != approx.states.rows())
        throw ArgumentError("node_distance: state dimensions differ");
    if (dims_per_node < 1)
        throw ArgumentError("node_distance: dims_per_node must be >= 1");
    if (ref.states.rows() % dims_per_node != 0)
        throw ArgumentError("node_distance: state size " + std::to_string(ref.states.rows()) +
                            " not divisible by " + std::to_string(dims_per_node));

    const Eigen::Index n_node = ref.states.rows() / dims_per_node;
    NodeDistances out;
    out.distances.resize(n_node, ref.states.cols());
    out.max = 0.0;
    for (Eigen::Index t = 0; t < ref.states.cols(); ++t) {
        for (Eigen::Index m = 0; m < n_node; ++m) {
            const double d = (ref.states.col(t).segment(m * dims_per_node, dims_per_node) -
                              approx.states.col(t).segment(m * dims_per_node, dims_per_node))
                                 .norm();
            out.distances(m, t) = d;
            if (d > out.max) out.max = d;
        }
    }
    return out;
}

} // namespace podlstm::metrics
