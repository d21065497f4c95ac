#pragma once

#include <Eigen/Dense>

#include "podlstm/errors.hpp"

namespace podlstm {

/// Uniform time grid t_i = t_start + i * dt for i = 0 .. eta-1.
struct TimeGrid {
    double t_start = 0.0;
    double dt = 1.0;
    int eta = 2;

    TimeGrid() = default;
    TimeGrid(double t_start_, double dt_, int eta_) : t_start(t_start_), dt(dt_), eta(eta_) {
        validate();
    }

    void validate() const {
        if (!(dt > 0.0)) throw ArgumentError("TimeGrid: dt must be positive");
        if (eta < 1) throw ArgumentError("TimeGrid: need at least one grid point");
        if (!std::isfinite(t_start) || !std::isfinite(dt))
            throw ArgumentError("TimeGrid: non-finite t_start or dt");
    }

    double time(int i) const { return t_start + static_cast<double>(i) * dt; }
    double duration() const { return static_cast<double>(eta - 1) * dt; }

    bool operator==(const TimeGrid&) const = default;
};

/// Time-dependent input channels; column i holds mu(t_i) in R^ell.
struct ParameterTrajectory {
    TimeGrid grid;
    Eigen::MatrixXd values; // ell x eta

    int channels() const { return static_cast<int>(values.rows()); }

    void validate() const {
        grid.validate();
        if (values.cols() != grid.eta)
            throw ArgumentError("ParameterTrajectory: column count does not match grid");
        if (values.rows() < 1)
            throw ArgumentError("ParameterTrajectory: need at least one channel");
        if (!values.allFinite())
            throw ArgumentError("ParameterTrajectory: non-finite entries");
    }
};

/// Full-order state samples; column i holds z(t_i) in R^N.
struct StateTrajectory {
    TimeGrid grid;
    Eigen::MatrixXd states; // N x eta

    int dim() const { return static_cast<int>(states.rows()); }

    void validate() const {
        grid.validate();
        if (states.cols() != grid.eta)
            throw ArgumentError("StateTrajectory: column count does not match grid");
        if (states.rows() < 1)
            throw ArgumentError("StateTrajectory: empty state vector");
        if (!states.allFinite())
            throw ArgumentError("StateTrajectory: non-finite entries");
    }
};

} // namespace podlstm
