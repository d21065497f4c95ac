// Microbenchmarks for the hot paths: snapshot compression, network evaluation
// and training steps, the autoregressive rollout, and the full-order model it
// competes against. Run `podlstm_bench --benchmark_filter=...` to narrow down.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include <podlstm/harness.hpp>

namespace {

using namespace podlstm;

Eigen::MatrixXd gaussian_matrix(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = gauss(rng);
    return out;
}

hifi::HifiModelConfig bench_chain(int n_node) {
    hifi::HifiModelConfig config;
    config.n_node = n_node;
    config.dims_per_node = 3;
    config.stiffness = 4000.0;
    config.damping = 2.0;
    config.nonlinearity_coeff = 2e5;
    config.substeps = 10;
    return config;
}

ParameterTrajectory bench_excitation(const TimeGrid& grid) {
    hifi::ExcitationSpec spec;
    return hifi::generate_parameter_set(1, 7, spec, grid).front();
}

void BM_HifiSimulate(benchmark::State& state) {
    const auto config = bench_chain(static_cast<int>(state.range(0)));
    const TimeGrid grid(0.0, 0.025, 120);
    const auto mu = bench_excitation(grid);
    const Eigen::VectorXd z1 = Eigen::VectorXd::Zero(config.state_dim());
    for (auto _ : state) {
        benchmark::DoNotOptimize(hifi::simulate(config, mu, z1, grid));
    }
}
BENCHMARK(BM_HifiSimulate)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ComputePod(benchmark::State& state) {
    reduction::SnapshotMatrix snapshots;
    snapshots.data = gaussian_matrix(300, static_cast<int>(state.range(0)), 11);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reduction::compute_pod(snapshots, 10));
    }
}
BENCHMARK(BM_ComputePod)->Arg(300)->Arg(3600)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
    reduction::SnapshotMatrix snapshots;
    snapshots.data = gaussian_matrix(3000, 200, 13);
    const auto basis = reduction::compute_pod(snapshots, 30);
    const Eigen::MatrixXd reduced = reduction::reduce_all(basis, snapshots.data);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reduction::reconstruct_all(basis, reduced));
    }
}
BENCHMARK(BM_Reconstruct)->Unit(benchmark::kMicrosecond);

void BM_CellForward(benchmark::State& state) {
    const int n_h = static_cast<int>(state.range(0));
    const auto model = lstm::make_model({n_h}, 33, 30, true, 8, 17);
    const auto& layer = model.layers.front();
    lstm::CellState cell;
    cell.h = Eigen::VectorXd::Zero(n_h);
    cell.c = Eigen::VectorXd::Zero(n_h);
    const Eigen::VectorXd x = gaussian_matrix(33, 1, 19).col(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lstm::cell_forward(x, cell, layer));
    }
}
BENCHMARK(BM_CellForward)->Arg(64)->Arg(256);

void BM_Forward(benchmark::State& state) {
    const auto model = lstm::make_model({64, 64}, 33, 30, true, 8, 23);
    const Eigen::MatrixXd window = gaussian_matrix(33, 8, 29);
    for (auto _ : state) {
        benchmark::DoNotOptimize(lstm::forward(model, window, 8));
    }
}
BENCHMARK(BM_Forward);

void BM_Backward(benchmark::State& state) {
    const auto model = lstm::make_model({64, 64}, 33, 30, true, 8, 31);
    std::vector<dataset::WindowSample> batch;
    for (int i = 0; i < 16; ++i) {
        dataset::WindowSample sample;
        sample.inputs = gaussian_matrix(33, 8, 100 + static_cast<std::uint64_t>(i));
        sample.valid_length = 8;
        sample.target = gaussian_matrix(30, 1, 200 + static_cast<std::uint64_t>(i)).col(0);
        sample.sim_id = i;
        sample.time_index = 7;
        batch.push_back(sample);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(lstm::backward(model, batch));
    }
}
BENCHMARK(BM_Backward)->Unit(benchmark::kMicrosecond);

void BM_Rollout(benchmark::State& state) {
    const int full_dim = static_cast<int>(state.range(0));
    reduction::SnapshotMatrix snapshots;
    snapshots.data = gaussian_matrix(full_dim, 120, 37);
    rollout::SurrogateBundle bundle;
    bundle.basis = reduction::compute_pod(snapshots, 30);
    bundle.model = lstm::make_model({64, 64}, 33, 30, true, 8, 41);
    const TimeGrid grid(0.0, 0.025, 120);
    const auto mu = bench_excitation(grid);
    const Eigen::VectorXd z1 = Eigen::VectorXd::Zero(full_dim);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rollout::rollout_full(bundle, z1, mu));
    }
}
BENCHMARK(BM_Rollout)->Arg(300)->Arg(3000)->Unit(benchmark::kMillisecond);

void BM_RelativeScore(benchmark::State& state) {
    const TimeGrid grid(0.0, 0.025, 120);
    StateTrajectory ref{grid, gaussian_matrix(3000, 120, 43)};
    StateTrajectory approx{grid, gaussian_matrix(3000, 120, 47)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::relative_score(ref, approx));
    }
}
BENCHMARK(BM_RelativeScore)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
