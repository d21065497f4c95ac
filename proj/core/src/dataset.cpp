#include "podlstm/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "podlstm/errors.hpp"

namespace podlstm::dataset {

namespace {
constexpr double kScaleFloor = 1e-8;
}

Eigen::MatrixXd Normalization::apply_inputs(const Eigen::MatrixXd& window) const {
    if (window.rows() != input_shift.size())
        throw ArgumentError("Normalization: window has " + std::to_string(window.rows()) +
                            " features, expected " + std::to_string(input_shift.size()));
    return (window.colwise() - input_shift).array().colwise() / input_scale.array();
}

Eigen::VectorXd Normalization::apply_target(const Eigen::VectorXd& target) const {
    if (target.size() != target_shift.size())
        throw ArgumentError("Normalization: target size mismatch");
    return (target - target_shift).cwiseQuotient(target_scale);
}

Eigen::VectorXd Normalization::invert_target(const Eigen::VectorXd& normalized) const {
    if (normalized.size() != target_shift.size())
        throw ArgumentError("Normalization: target size mismatch");
    return normalized.cwiseProduct(target_scale) + target_shift;
}

SplitIndices split_simulations(int total, const SplitSpec& spec) {
    if (spec.train < 1 || spec.validation < 0 || spec.test < 0)
        throw ArgumentError("split_simulations: counts must be positive (train >= 1)");
    if (spec.train + spec.validation + spec.test > total)
        throw ArgumentError("split_simulations: split asks for " +
                            std::to_string(spec.train + spec.validation + spec.test) +
                            " simulations, only " + std::to_string(total) + " available");

    std::vector<int> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(spec.seed);
    // Fisher-Yates by hand: std::shuffle is not specified bit-for-bit across
    // standard library implementations.
    for (int i = total - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(pick(rng))]);
    }

    SplitIndices out;
    auto it = order.begin();
    out.train.assign(it, it + spec.train);
    it += spec.train;
    out.validation.assign(it, it + spec.validation);
    it += spec.validation;
    out.test.assign(it, it + spec.test);
    return out;
}

WindowedDataset build_windows(const std::vector<Eigen::MatrixXd>& reduced,
                              const std::vector<ParameterTrajectory>& params,
                              int window_length) {
    if (window_length < 1) throw ArgumentError("build_windows: window_length must be >= 1");
    if (reduced.empty()) throw ArgumentError("build_windows: no trajectories");
    if (reduced.size() != params.size())
        throw ArgumentError("build_windows: reduced/parameter trajectory counts differ");

    WindowedDataset out;
    out.window_length = window_length;
    out.reduced_dim = static_cast<int>(reduced.front().rows());
    out.param_dim = static_cast<int>(params.front().values.rows());

    for (std::size_t j = 0; j < reduced.size(); ++j) {
        const auto& zbar = reduced[j];
        const auto& mu = params[j].values;
        if (zbar.rows() != out.reduced_dim)
            throw ArgumentError("build_windows: reduced dimension differs between trajectories");
        if (mu.rows() != out.param_dim)
            throw ArgumentError("build_windows: parameter dimension differs between trajectories");
        if (zbar.cols() != mu.cols())
            throw ArgumentError("build_windows: trajectory " + std::to_string(j) +
                                " has " + std::to_string(zbar.cols()) + " reduced steps but " +
                                std::to_string(mu.cols()) + " parameter steps");
        const int eta = static_cast<int>(zbar.cols());
        if (eta < 2)
            throw ArgumentError("build_windows: trajectory " + std::to_string(j) +
                                " too short to form a sample (needs at least 2 steps)");

        for (int t = 0; t + 1 < eta; ++t) {
            WindowSample sample;
            sample.valid_length = std::min(t + 1, window_length);
            const int first = t + 1 - sample.valid_length;
            sample.inputs.resize(out.reduced_dim + out.param_dim, sample.valid_length);
            sample.inputs.topRows(out.reduced_dim) =
                zbar.middleCols(first, sample.valid_length);
            sample.inputs.bottomRows(out.param_dim) =
                mu.middleCols(first, sample.valid_length);
            sample.target = zbar.col(t + 1) - zbar.col(t);
            sample.sim_id = static_cast<int>(j);
            sample.time_index = t;
            out.samples.push_back(std::move(sample));
        }
    }
    return out;
}

Normalization fit_normalization(const WindowedDataset& dataset) {
    if (dataset.samples.empty())
        throw ArgumentError("fit_normalization: empty dataset");
    const int n_in = dataset.reduced_dim + dataset.param_dim;
    const int n_out = dataset.reduced_dim;
    const double count = static_cast<double>(dataset.samples.size());

    Eigen::VectorXd in_sum = Eigen::VectorXd::Zero(n_in);
    Eigen::VectorXd in_sq = Eigen::VectorXd::Zero(n_in);
    Eigen::VectorXd out_sum = Eigen::VectorXd::Zero(n_out);
    Eigen::VectorXd out_sq = Eigen::VectorXd::Zero(n_out);
    for (const auto& sample : dataset.samples) {
        const Eigen::VectorXd newest = sample.inputs.col(sample.inputs.cols() - 1);
        in_sum += newest;
        in_sq += newest.cwiseAbs2();
        out_sum += sample.target;
        out_sq += sample.target.cwiseAbs2();
    }

    auto finish = [count](const Eigen::VectorXd& sum, const Eigen::VectorXd& sq,
                          Eigen::VectorXd& shift, Eigen::VectorXd& scale) {
        shift = sum / count;
        Eigen::VectorXd var = sq / count - shift.cwiseAbs2();
        var = var.cwiseMax(0.0); // roundoff guard
        scale = var.cwiseSqrt().cwiseMax(kScaleFloor);
    };

    Normalization norm;
    finish(in_sum, in_sq, norm.input_shift, norm.input_scale);
    finish(out_sum, out_sq, norm.target_shift, norm.target_scale);
    return norm;
}

} // namespace podlstm::dataset
