#pragma once

#include <cmath>

#include "podlstm/rollout.hpp"
#include "podlstm/trajectory.hpp"

namespace podlstm::metrics {

/// Time-resolved relative score, at most 1, unbounded below. Steps where the
/// reference norm vanishes while the approximation differs carry NaN and are
/// excluded from means; their count is reported alongside.
struct ScoreSeries {
    TimeGrid grid;
    Eigen::VectorXd values;

    bool defined(int i) const { return std::isfinite(values(i)); }
    int undefined_count() const;
};

/// s(t) = 1 - |ref(t) - approx(t)| / |ref(t)| columnwise. A zero-norm
/// reference column scores 1 when the approximation is also zero, NaN
/// otherwise.
ScoreSeries relative_score(const TimeGrid& grid, const Eigen::MatrixXd& ref,
                           const Eigen::MatrixXd& approx);
ScoreSeries relative_score(const StateTrajectory& ref, const StateTrajectory& approx);

/// Arithmetic mean over the defined steps, optionally restricted to
/// t_lo <= t <= t_hi. Throws ArgumentError when the range selects no steps
/// and NumericError when every selected step is undefined.
double mean_score(const ScoreSeries& series);
double mean_score(const ScoreSeries& series, double t_lo, double t_hi);

/// The three specializations evaluated against one test trajectory:
/// reconstruction (z vs V V^T z), regression (V^T z vs rolled-out
/// coefficients) and approximation (z vs reconstructed rollout).
struct ScoreTriplet {
    ScoreSeries reconstruction;
    ScoreSeries regression;
    ScoreSeries approximation;
};

ScoreTriplet score_triplet(const StateTrajectory& z_test, const ParameterTrajectory& mu,
                           const rollout::SurrogateBundle& bundle);
/// Stub-friendly variant taking any increment predictor.
ScoreTriplet score_triplet(const StateTrajectory& z_test, const ParameterTrajectory& mu,
                           const reduction::ReducedBasis& basis,
                           rollout::DeltaPredictor& predictor, int window_length);

/// Node-major flattening: component c of node m lives at index m * dims + c.
Eigen::VectorXd vec_nodes(const Eigen::MatrixXd& node_coords /* n_node x dims */);
Eigen::MatrixXd unvec_nodes(const Eigen::VectorXd& state, int dims_per_node);

/// Pointwise Euclidean distance between corresponding nodes, plus the
/// maximum over all nodes and steps.
struct NodeDistances {
    Eigen::MatrixXd distances; // n_node x eta
    double max = 0.0;
};

NodeDistances node_distance(const StateTrajectory& ref, const StateTrajectory& approx,
                            int dims_per_node);

/// One test simulation's summary row.
struct SimulationReport {
    int sim_id = 0;
    double s_rec_mean = 0.0;
    double s_regr_mean = 0.0;
    double s_approx_mean = 0.0;
    double s_approx_first_second = 0.0;
    double e_dist_max = 0.0;
    double realtime_ratio = 0.0;
    int undefined_steps = 0; // across the triplet
};

} // namespace podlstm::metrics
