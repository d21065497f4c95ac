#include "podlstm/rollout.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "podlstm/errors.hpp"

namespace podlstm::rollout {

void SurrogateBundle::validate() const {
    model.validate();
    if (basis.rank() < 1) throw ArgumentError("SurrogateBundle: empty basis");
    if (basis.rank() != model.output_size())
        throw ArgumentError("SurrogateBundle: basis rank " + std::to_string(basis.rank()) +
                            " does not match model output size " +
                            std::to_string(model.output_size()));
    if (model.input_size() <= model.output_size())
        throw ArgumentError("SurrogateBundle: model input leaves no room for parameters");
    if (basis.centered())
        throw ArgumentError("SurrogateBundle: centered bases are not supported online");
}

Eigen::MatrixXd rollout_reduced(const reduction::ReducedBasis& basis,
                                DeltaPredictor& predictor, int window_length,
                                const Eigen::VectorXd& z1, const ParameterTrajectory& mu) {
    mu.validate();
    if (window_length < 1) throw ArgumentError("rollout_reduced: window length must be >= 1");
    const int r = predictor.reduced_dim();
    if (basis.rank() != r)
        throw ArgumentError("rollout_reduced: basis rank does not match predictor output");

    const int eta = mu.grid.eta;
    const int ell = static_cast<int>(mu.values.rows());
    Eigen::MatrixXd zbar(r, eta);
    zbar.col(0) = reduction::reduce(basis, z1);
    if (!zbar.col(0).allFinite())
        throw NumericError("rollout_reduced: non-finite reduced initial state");

    Eigen::MatrixXd window;
    for (int t = 0; t + 1 < eta; ++t) {
        const int valid = std::min(t + 1, window_length);
        const int first = t + 1 - valid;
        window.resize(r + ell, valid);
        window.topRows(r) = zbar.middleCols(first, valid);
        window.bottomRows(ell) = mu.values.middleCols(first, valid);

        const Eigen::VectorXd delta = predictor.predict(window, valid);
        if (delta.size() != r)
            throw ArgumentError("rollout_reduced: predictor returned " +
                                std::to_string(delta.size()) + " components, expected " +
                                std::to_string(r));
        zbar.col(t + 1) = zbar.col(t) + delta;
        if (!zbar.col(t + 1).allFinite())
            throw NumericError("rollout_reduced: diverged at step " + std::to_string(t + 2) +
                               " of " + std::to_string(eta));
    }
    return zbar;
}

Eigen::MatrixXd rollout_reduced(const SurrogateBundle& bundle, const Eigen::VectorXd& z1,
                                const ParameterTrajectory& mu) {
    bundle.validate();
    const int ell = bundle.model.input_size() - bundle.model.output_size();
    if (mu.values.rows() != ell)
        throw ArgumentError("rollout_reduced: parameter trajectory has " +
                            std::to_string(mu.values.rows()) + " channels, model expects " +
                            std::to_string(ell));
    LstmDeltaPredictor predictor(bundle.model);
    return rollout_reduced(bundle.basis, predictor, bundle.window_length(), z1, mu);
}

StateTrajectory rollout_full(const SurrogateBundle& bundle, const Eigen::VectorXd& z1,
                             const ParameterTrajectory& mu) {
    StateTrajectory out;
    out.grid = mu.grid;
    out.states = reduction::reconstruct_all(bundle.basis, rollout_reduced(bundle, z1, mu));
    return out;
}

RealtimeStats measure_realtime_ratio(const SurrogateBundle& bundle, const Eigen::VectorXd& z1,
                                     const ParameterTrajectory& mu, int repetitions) {
    if (repetitions < 1)
        throw ArgumentError("measure_realtime_ratio: repetitions must be >= 1");
    mu.validate();
    if (mu.grid.eta < 2)
        throw ArgumentError("measure_realtime_ratio: need at least two steps of simulated time");
    const double span = mu.grid.duration();

    RealtimeStats stats;
    stats.ratios.reserve(static_cast<std::size_t>(repetitions));
    for (int rep = 0; rep < repetitions; ++rep) {
        const auto begin = std::chrono::steady_clock::now();
        const StateTrajectory result = rollout_full(bundle, z1, mu);
        const auto end = std::chrono::steady_clock::now();
        (void)result;
        stats.ratios.push_back(std::chrono::duration<double>(end - begin).count() / span);
    }

    std::vector<double> sorted = stats.ratios;
    std::sort(sorted.begin(), sorted.end());
    stats.min = sorted.front();
    const std::size_t mid = sorted.size() / 2;
    stats.median = sorted.size() % 2 == 1 ? sorted[mid]
                                          : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return stats;
}

} // namespace podlstm::rollout
