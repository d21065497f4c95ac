#pragma once

#include <cstdint>
#include <vector>

#include "podlstm/trajectory.hpp"

namespace podlstm::hifi {

enum class Topology { kChain, kGrid };

/// Synthetic full-order model: a damped, cubically nonlinear mass-spring
/// lattice whose support frame is driven by the input accelerations. The
/// state vector holds nodal displacements relative to the frame; velocities
/// live only inside the integrator.
struct HifiModelConfig {
    int n_node = 1;
    int dims_per_node = 1;
    double stiffness = 1.0;          // N/m
    double damping = 0.0;            // N s/m
    double nonlinearity_coeff = 0.0; // N/m^3, cubic spring term
    double mass = 1.0;               // kg
    Topology topology = Topology::kChain;
    int grid_rows = 1;               // rows of the kGrid layout; kChain ignores it
    int substeps = 10;               // RK4 substeps per output sample interval

    int state_dim() const { return n_node * dims_per_node; }
    void validate() const;
};

/// Flow map of the synthetic model: initial displacements z1 (velocities start
/// at rest) and the input trajectory mu produce the displacement samples on
/// the grid. Deterministic. Throws NumericError if the integration diverges.
StateTrajectory simulate(const HifiModelConfig& config, const ParameterTrajectory& mu,
                         const Eigen::VectorXd& z1, const TimeGrid& grid);

struct SimulationResult {
    StateTrajectory displacements;
    Eigen::MatrixXd velocities; // N x eta, sampled alongside the displacements
};

/// Same integration as simulate(), additionally sampling the internal
/// velocities (energy bookkeeping in tests; the surrogate never sees them).
SimulationResult simulate_full(const HifiModelConfig& config, const ParameterTrajectory& mu,
                               const Eigen::VectorXd& z1, const TimeGrid& grid);

/// Random smooth excitation family: per channel a sum of low-frequency
/// sinusoids plus an optional ramp-and-hold pulse, scaled so |mu| stays
/// within `amplitude`.
struct ExcitationSpec {
    int channels = 3;
    double amplitude = 1.0; // bound on |mu| per channel
    double freq_min = 0.2;  // Hz
    double freq_max = 2.0;  // Hz
    int n_sinusoids = 3;
    bool include_pulse = true;

    void validate() const;
};

/// Seeded generation of `count` independent parameter trajectories on `grid`.
/// Identical arguments reproduce identical trajectories bit for bit.
std::vector<ParameterTrajectory> generate_parameter_set(int count, std::uint64_t seed,
                                                        const ExcitationSpec& spec,
                                                        const TimeGrid& grid);

} // namespace podlstm::hifi
