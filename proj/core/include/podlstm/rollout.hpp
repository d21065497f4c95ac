#pragma once

#include <vector>

#include "podlstm/lstm.hpp"
#include "podlstm/reduction.hpp"
#include "podlstm/trajectory.hpp"

namespace podlstm::rollout {

/// Supplies the reduced-state increment for one autoregressive step given the
/// raw (unnormalized) window of stacked [zbar; mu] columns. Abstract so tests
/// can substitute stubs and instrumented recorders for the trained network.
class DeltaPredictor {
public:
    virtual ~DeltaPredictor() = default;
    virtual int reduced_dim() const = 0;
    virtual Eigen::VectorXd predict(const Eigen::MatrixXd& window, int valid_length) = 0;
};

/// The trained network behind the DeltaPredictor interface: normalizes the
/// window, evaluates, and maps the prediction back to raw increments.
class LstmDeltaPredictor : public DeltaPredictor {
public:
    explicit LstmDeltaPredictor(const lstm::LstmModel& model) : model_(model) {}
    int reduced_dim() const override { return model_.output_size(); }
    Eigen::VectorXd predict(const Eigen::MatrixXd& window, int valid_length) override {
        return model_.normalization.invert_target(lstm::forward_normalized(
            model_, model_.normalization.apply_inputs(window), valid_length));
    }

private:
    const lstm::LstmModel& model_;
};

/// Everything the online phase needs: projection basis plus the increment
/// model trained in the reduced coordinates.
struct SurrogateBundle {
    reduction::ReducedBasis basis;
    lstm::LstmModel model;

    int reduced_dim() const { return basis.rank(); }
    int window_length() const { return model.window_length; }
    void validate() const;
};

/// Autoregressive reduced prediction: column 0 is the reduced initial state,
/// every later column adds the predicted increment for a window ending at the
/// previous step. Returns r x eta. Throws NumericError with the failing step
/// on divergence.
Eigen::MatrixXd rollout_reduced(const reduction::ReducedBasis& basis,
                                DeltaPredictor& predictor, int window_length,
                                const Eigen::VectorXd& z1, const ParameterTrajectory& mu);
Eigen::MatrixXd rollout_reduced(const SurrogateBundle& bundle, const Eigen::VectorXd& z1,
                                const ParameterTrajectory& mu);

/// Reduced rollout followed by reconstruction into full coordinates.
StateTrajectory rollout_full(const SurrogateBundle& bundle, const Eigen::VectorXd& z1,
                             const ParameterTrajectory& mu);

/// Wall-clock cost of rollout_full relative to the simulated time span.
struct RealtimeStats {
    std::vector<double> ratios; // one per repetition, t_cpu / (t_eta - t_1)
    double min = 0.0;
    double median = 0.0;
};

RealtimeStats measure_realtime_ratio(const SurrogateBundle& bundle, const Eigen::VectorXd& z1,
                                     const ParameterTrajectory& mu, int repetitions);

} // namespace podlstm::rollout
