#include "podlstm/hifi_sim.hpp"

#include <cmath>
#include <random>
#include <string>
#include <utility>

namespace podlstm::hifi {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Spring/damper edges between node indices; -1 is the frame-fixed support.
struct Lattice {
    std::vector<std::pair<int, int>> edges;
};

Lattice build_lattice(const HifiModelConfig& cfg) {
    Lattice lat;
    if (cfg.topology == Topology::kChain) {
        lat.edges.reserve(static_cast<std::size_t>(cfg.n_node));
        lat.edges.emplace_back(-1, 0);
        for (int m = 0; m + 1 < cfg.n_node; ++m) lat.edges.emplace_back(m, m + 1);
    } else {
        const int rows = cfg.grid_rows;
        const int cols = cfg.n_node / rows;
        auto id = [cols](int row, int col) { return row * cols + col; };
        for (int c = 0; c < cols; ++c) lat.edges.emplace_back(-1, id(0, c));
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                if (c + 1 < cols) lat.edges.emplace_back(id(r, c), id(r, c + 1));
                if (r + 1 < rows) lat.edges.emplace_back(id(r, c), id(r + 1, c));
            }
    }
    return lat;
}

// Internal forces plus the frame pseudo-force; writes accelerations.
void accelerations(const HifiModelConfig& cfg, const Lattice& lat, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& v, const Eigen::VectorXd& mu_t, Eigen::VectorXd& acc) {
    const int dims = cfg.dims_per_node;
    acc.setZero();
    for (const auto& [a, b] : lat.edges) {
        for (int c = 0; c < dims; ++c) {
            const double qa = a < 0 ? 0.0 : q[a * dims + c];
            const double va = a < 0 ? 0.0 : v[a * dims + c];
            const double e = q[b * dims + c] - qa;
            const double w = v[b * dims + c] - va;
            const double f = cfg.stiffness * e + cfg.nonlinearity_coeff * e * e * e +
                             cfg.damping * w;
            acc[b * dims + c] -= f;
            if (a >= 0) acc[a * dims + c] += f;
        }
    }
    acc /= cfg.mass;
    const int driven = std::min<int>(dims, static_cast<int>(mu_t.size()));
    for (int m = 0; m < cfg.n_node; ++m)
        for (int c = 0; c < driven; ++c) acc[m * dims + c] -= mu_t[c];
}

} // namespace

void HifiModelConfig::validate() const {
    if (n_node < 1) throw ConfigError("hifi: n_node must be >= 1");
    if (dims_per_node < 1) throw ConfigError("hifi: dims_per_node must be >= 1");
    if (!(mass > 0.0)) throw ConfigError("hifi: mass must be positive");
    if (stiffness < 0.0) throw ConfigError("hifi: stiffness must be >= 0");
    if (damping < 0.0) throw ConfigError("hifi: damping must be >= 0");
    if (substeps < 1) throw ConfigError("hifi: substeps must be >= 1");
    if (topology == Topology::kGrid) {
        if (grid_rows < 1 || n_node % grid_rows != 0)
            throw ConfigError("hifi: grid_rows must divide n_node");
    }
}

SimulationResult simulate_full(const HifiModelConfig& config, const ParameterTrajectory& mu,
                               const Eigen::VectorXd& z1, const TimeGrid& grid) {
    config.validate();
    mu.validate();
    if (!(mu.grid == grid)) throw ArgumentError("simulate: mu grid differs from output grid");
    const int n = config.state_dim();
    if (z1.size() != n) throw ArgumentError("simulate: initial state has wrong dimension");
    if (!z1.allFinite()) throw ArgumentError("simulate: non-finite initial state");

    const Lattice lat = build_lattice(config);

    SimulationResult out;
    out.displacements.grid = grid;
    out.displacements.states.resize(n, grid.eta);
    out.velocities.resize(n, grid.eta);

    Eigen::VectorXd q = z1;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    out.displacements.states.col(0) = q;
    out.velocities.col(0) = v;

    const double h = grid.dt / static_cast<double>(config.substeps);
    Eigen::VectorXd mu_t(mu.channels());
    Eigen::VectorXd k1q(n), k1v(n), k2q(n), k2v(n), k3q(n), k3v(n), k4q(n), k4v(n);
    Eigen::VectorXd qt(n), vt(n);

    // mu between samples is linearly interpolated for the RK4 stage times.
    auto input_at = [&](int i, double local_t) {
        const double a = local_t / grid.dt;
        if (i + 1 < grid.eta)
            mu_t = (1.0 - a) * mu.values.col(i) + a * mu.values.col(i + 1);
        else
            mu_t = mu.values.col(i);
    };

    for (int i = 0; i + 1 < grid.eta; ++i) {
        for (int s = 0; s < config.substeps; ++s) {
            const double local = static_cast<double>(s) * h;

            input_at(i, local);
            k1q = v;
            accelerations(config, lat, q, v, mu_t, k1v);

            input_at(i, local + 0.5 * h);
            qt = q + 0.5 * h * k1q;
            vt = v + 0.5 * h * k1v;
            k2q = vt;
            accelerations(config, lat, qt, vt, mu_t, k2v);

            qt = q + 0.5 * h * k2q;
            vt = v + 0.5 * h * k2v;
            k3q = vt;
            accelerations(config, lat, qt, vt, mu_t, k3v);

            input_at(i, local + h);
            qt = q + h * k3q;
            vt = v + h * k3v;
            k4q = vt;
            accelerations(config, lat, qt, vt, mu_t, k4v);

            q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        if (!q.allFinite() || !v.allFinite())
            throw NumericError("hifi integration diverged at step " + std::to_string(i + 1) +
                               " of " + std::to_string(grid.eta - 1) +
                               " (t=" + std::to_string(grid.time(i + 1)) + ")");
        out.displacements.states.col(i + 1) = q;
        out.velocities.col(i + 1) = v;
    }
    return out;
}

StateTrajectory simulate(const HifiModelConfig& config, const ParameterTrajectory& mu,
                         const Eigen::VectorXd& z1, const TimeGrid& grid) {
    return simulate_full(config, mu, z1, grid).displacements;
}

void ExcitationSpec::validate() const {
    if (channels < 1) throw ConfigError("excitation: channels must be >= 1");
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw ConfigError("excitation: amplitude must be >= 0");
    if (!(freq_min > 0.0) || !(freq_max >= freq_min))
        throw ConfigError("excitation: need 0 < freq_min <= freq_max");
    if (n_sinusoids < 1) throw ConfigError("excitation: n_sinusoids must be >= 1");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::vector<ParameterTrajectory> generate_parameter_set(int count, std::uint64_t seed,
                                                        const ExcitationSpec& spec,
                                                        const TimeGrid& grid) {
    if (count < 1) throw ArgumentError("generate_parameter_set: count must be >= 1");
    spec.validate();
    grid.validate();

    const double horizon = std::max(grid.duration(), grid.dt);

    std::vector<ParameterTrajectory> set;
    set.reserve(static_cast<std::size_t>(count));

    for (int j = 0; j < count; ++j) {
        // Each trajectory gets its own stream so trajectory j does not depend
        // on how many were requested.
        std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(j) + 1)));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        ParameterTrajectory traj;
        traj.grid = grid;
        traj.values.resize(spec.channels, grid.eta);

        for (int c = 0; c < spec.channels; ++c) {
            std::vector<double> amp(static_cast<std::size_t>(spec.n_sinusoids));
            std::vector<double> freq(amp.size());
            std::vector<double> phase(amp.size());
            double budget = 0.0;
            for (std::size_t s = 0; s < amp.size(); ++s) {
                amp[s] = 0.3 + 0.7 * unit(rng);
                freq[s] = spec.freq_min + (spec.freq_max - spec.freq_min) * unit(rng);
                phase[s] = kTwoPi * unit(rng);
                budget += amp[s];
            }
            double pulse_amp = 0.0, pulse_onset = 0.0, pulse_rise = 1.0;
            if (spec.include_pulse) {
                pulse_amp = 0.3 + 0.7 * unit(rng);
                pulse_onset = grid.t_start + 0.5 * horizon * unit(rng);
                pulse_rise = (0.05 + 0.15 * unit(rng)) * horizon;
                budget += pulse_amp;
            }
            // Scale so the worst-case sum of magnitudes stays inside the bound.
            const double total = spec.amplitude * (0.5 + 0.5 * unit(rng));
            const double scale = total / budget;
            const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;

            for (int i = 0; i < grid.eta; ++i) {
                const double t = grid.time(i);
                double val = 0.0;
                for (std::size_t s = 0; s < amp.size(); ++s)
                    val += amp[s] * scale *
                           std::sin(kTwoPi * freq[s] * (t - grid.t_start) + phase[s]);
                if (spec.include_pulse)
                    val += sign * pulse_amp * scale *
                           std::clamp((t - pulse_onset) / pulse_rise, 0.0, 1.0);
                traj.values(c, i) = val;
            }
        }
        set.push_back(std::move(traj));
    }
    return set;
}

} // namespace podlstm::hifi
