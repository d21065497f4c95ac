#include "podlstm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <utility>

#include <json.hpp>

#include "podlstm/errors.hpp"
#include "podlstm/reduction.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace podlstm::harness {

namespace {

const json* find_key(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("config: unknown key \"" + it.key() + "\" in " + where);
    }
}

const json& require_object(const json& obj, const char* key) {
    const json* v = find_key(obj, key);
    if (!v) throw ConfigError(std::string("config: missing section \"") + key + "\"");
    if (!v->is_object())
        throw ConfigError(std::string("config: \"") + key + "\" must be an object");
    return *v;
}

double require_double(const json& obj, const std::string& where, const char* key) {
    const json* v = find_key(obj, key);
    if (!v) throw ConfigError("config: missing " + where + "." + key);
    if (!v->is_number())
        throw ConfigError("config: " + where + "." + key + " must be a number");
    return v->get<double>();
}

double optional_double(const json& obj, const std::string& where, const char* key,
                       double fallback) {
    return find_key(obj, key) ? require_double(obj, where, key) : fallback;
}

int require_int(const json& obj, const std::string& where, const char* key) {
    const json* v = find_key(obj, key);
    if (!v) throw ConfigError("config: missing " + where + "." + key);
    if (!v->is_number_integer())
        throw ConfigError("config: " + where + "." + key + " must be an integer");
    return v->get<int>();
}

int optional_int(const json& obj, const std::string& where, const char* key, int fallback) {
    return find_key(obj, key) ? require_int(obj, where, key) : fallback;
}

bool optional_bool(const json& obj, const std::string& where, const char* key, bool fallback) {
    const json* v = find_key(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean())
        throw ConfigError("config: " + where + "." + key + " must be a boolean");
    return v->get<bool>();
}

std::uint64_t require_seed(const json& obj, const std::string& where, const char* key) {
    const json* v = find_key(obj, key);
    if (!v) throw ConfigError("config: missing " + where + "." + key);
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v->get<std::int64_t>());
    throw ConfigError("config: " + where + "." + key + " must be a non-negative integer");
}

hifi::Topology parse_topology(const json& obj, const std::string& where) {
    const json* v = find_key(obj, "topology");
    if (!v) return hifi::Topology::kChain;
    if (!v->is_string())
        throw ConfigError("config: " + where + ".topology must be a string");
    const std::string name = v->get<std::string>();
    if (name == "chain") return hifi::Topology::kChain;
    if (name == "grid") return hifi::Topology::kGrid;
    throw ConfigError("config: " + where + ".topology must be \"chain\" or \"grid\", got \"" +
                      name + "\"");
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

} // namespace

void ExperimentConfig::validate() const {
    hifi.validate();
    grid.validate();
    excitation.validate();
    if (grid.eta < 2) throw ConfigError("config: grid needs at least two steps");
    if (train_count < 1 || validation_count < 1 || test_count < 0)
        throw ConfigError("config: split needs train >= 1, validation >= 1, test >= 0");
    if (reduced_dim < 1) throw ConfigError("config: reduced_dim must be >= 1");
    if (reduced_dim > hifi.state_dim())
        throw ConfigError("config: reduced_dim " + std::to_string(reduced_dim) +
                          " exceeds the state dimension " + std::to_string(hifi.state_dim()));
    if (window_length < 1) throw ConfigError("config: window_length must be >= 1");
    if (hidden_sizes.empty()) throw ConfigError("config: model.hidden_sizes is empty");
    for (int n_h : hidden_sizes)
        if (n_h < 1) throw ConfigError("config: hidden sizes must be >= 1");
    if (!output_layer && hidden_sizes.back() != reduced_dim)
        throw ConfigError("config: without an output layer the last hidden size must equal "
                          "reduced_dim");
    if (training.epochs < 1 || training.batch_size < 1 || training.learning_rate <= 0.0)
        throw ConfigError("config: training needs epochs >= 1, batch_size >= 1, "
                          "learning_rate > 0");
    if (!(training.input_noise >= 0.0) || !std::isfinite(training.input_noise))
        throw ConfigError("config: training.input_noise must be >= 0");
    for (int n : benchmark_sweep)
        if (n < hifi.dims_per_node || n % hifi.dims_per_node != 0)
            throw ConfigError("config: benchmark sweep entries must be positive multiples of "
                              "dims_per_node");
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& err) {
        throw ConfigError(std::string("config: invalid JSON: ") + err.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(root, "the top level",
               {"hifi", "grid", "excitation", "split", "reduced_dim", "window_length", "model",
                "training", "seeds", "benchmark"});

    ExperimentConfig config;

    const json& hifi_obj = require_object(root, "hifi");
    check_keys(hifi_obj, "hifi",
               {"n_node", "dims_per_node", "stiffness", "damping", "nonlinearity_coeff", "mass",
                "topology", "grid_rows", "substeps"});
    config.hifi.n_node = require_int(hifi_obj, "hifi", "n_node");
    config.hifi.dims_per_node = require_int(hifi_obj, "hifi", "dims_per_node");
    config.hifi.stiffness = require_double(hifi_obj, "hifi", "stiffness");
    config.hifi.damping = optional_double(hifi_obj, "hifi", "damping", 0.0);
    config.hifi.nonlinearity_coeff =
        optional_double(hifi_obj, "hifi", "nonlinearity_coeff", 0.0);
    config.hifi.mass = optional_double(hifi_obj, "hifi", "mass", 1.0);
    config.hifi.topology = parse_topology(hifi_obj, "hifi");
    config.hifi.grid_rows = optional_int(hifi_obj, "hifi", "grid_rows", 1);
    config.hifi.substeps = optional_int(hifi_obj, "hifi", "substeps", 10);

    const json& grid_obj = require_object(root, "grid");
    check_keys(grid_obj, "grid", {"t_start", "dt", "steps"});
    config.grid.t_start = optional_double(grid_obj, "grid", "t_start", 0.0);
    config.grid.dt = require_double(grid_obj, "grid", "dt");
    config.grid.eta = require_int(grid_obj, "grid", "steps");

    if (const json* excitation_obj = find_key(root, "excitation")) {
        if (!excitation_obj->is_object())
            throw ConfigError("config: \"excitation\" must be an object");
        check_keys(*excitation_obj, "excitation",
                   {"channels", "amplitude", "freq_min", "freq_max", "n_sinusoids",
                    "include_pulse"});
        config.excitation.channels =
            optional_int(*excitation_obj, "excitation", "channels", config.excitation.channels);
        config.excitation.amplitude = optional_double(*excitation_obj, "excitation", "amplitude",
                                                      config.excitation.amplitude);
        config.excitation.freq_min = optional_double(*excitation_obj, "excitation", "freq_min",
                                                     config.excitation.freq_min);
        config.excitation.freq_max = optional_double(*excitation_obj, "excitation", "freq_max",
                                                     config.excitation.freq_max);
        config.excitation.n_sinusoids = optional_int(*excitation_obj, "excitation", "n_sinusoids",
                                                     config.excitation.n_sinusoids);
        config.excitation.include_pulse = optional_bool(
            *excitation_obj, "excitation", "include_pulse", config.excitation.include_pulse);
    }

    const json& split_obj = require_object(root, "split");
    check_keys(split_obj, "split", {"train", "validation", "test"});
    config.train_count = require_int(split_obj, "split", "train");
    config.validation_count = require_int(split_obj, "split", "validation");
    config.test_count = require_int(split_obj, "split", "test");

    config.reduced_dim = require_int(root, "the top level", "reduced_dim");
    config.window_length = require_int(root, "the top level", "window_length");

    const json& model_obj = require_object(root, "model");
    check_keys(model_obj, "model", {"hidden_sizes", "output_layer"});
    const json* sizes = find_key(model_obj, "hidden_sizes");
    if (!sizes || !sizes->is_array() || sizes->empty())
        throw ConfigError("config: model.hidden_sizes must be a non-empty array");
    for (const auto& entry : *sizes) {
        if (!entry.is_number_integer())
            throw ConfigError("config: model.hidden_sizes entries must be integers");
        config.hidden_sizes.push_back(entry.get<int>());
    }
    config.output_layer = optional_bool(model_obj, "model", "output_layer", false);

    const json& training_obj = require_object(root, "training");
    check_keys(training_obj, "training",
               {"epochs", "batch_size", "learning_rate", "clip_norm", "input_noise", "rho",
                "epsilon"});
    config.training.epochs = require_int(training_obj, "training", "epochs");
    config.training.batch_size = require_int(training_obj, "training", "batch_size");
    config.training.learning_rate = require_double(training_obj, "training", "learning_rate");
    config.training.clip_norm = optional_double(training_obj, "training", "clip_norm", 0.0);
    config.training.input_noise =
        optional_double(training_obj, "training", "input_noise", 0.0);
    config.training.rho = optional_double(training_obj, "training", "rho", 0.9);
    config.training.epsilon = optional_double(training_obj, "training", "epsilon", 1e-7);

    const json& seeds_obj = require_object(root, "seeds");
    check_keys(seeds_obj, "seeds", {"data", "split", "init", "shuffle"});
    config.seeds.data = require_seed(seeds_obj, "seeds", "data");
    config.seeds.split = require_seed(seeds_obj, "seeds", "split");
    config.seeds.init = require_seed(seeds_obj, "seeds", "init");
    config.seeds.shuffle = require_seed(seeds_obj, "seeds", "shuffle");
    config.training.shuffle_seed = config.seeds.shuffle;

    if (const json* benchmark_obj = find_key(root, "benchmark")) {
        if (!benchmark_obj->is_object())
            throw ConfigError("config: \"benchmark\" must be an object");
        check_keys(*benchmark_obj, "benchmark", {"sweep"});
        if (const json* sweep = find_key(*benchmark_obj, "sweep")) {
            if (!sweep->is_array())
                throw ConfigError("config: benchmark.sweep must be an array");
            for (const auto& entry : *sweep) {
                if (!entry.is_number_integer())
                    throw ConfigError("config: benchmark.sweep entries must be integers");
                config.benchmark_sweep.push_back(entry.get<int>());
            }
        }
    }

    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::filesystem::path sim_file_path(const std::filesystem::path& dir, int sim_id) {
    char name[32];
    std::snprintf(name, sizeof(name), "sim_%03d.bin", sim_id);
    return dir / name;
}

namespace {

std::filesystem::path numbered(const std::filesystem::path& dir, const char* stem, int id,
                               const char* ext) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%03d.%s", stem, id, ext);
    return dir / name;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

metrics::SimulationReport build_report(int sim_id, const metrics::ScoreTriplet& triplet,
                                       const StateTrajectory& reference,
                                       const StateTrajectory& prediction, int dims_per_node,
                                       double realtime_ratio) {
    const TimeGrid& grid = reference.grid;
    metrics::SimulationReport report;
    report.sim_id = sim_id;
    report.s_rec_mean = metrics::mean_score(triplet.reconstruction);
    report.s_regr_mean = metrics::mean_score(triplet.regression);
    report.s_approx_mean = metrics::mean_score(triplet.approximation);
    report.s_approx_first_second =
        metrics::mean_score(triplet.approximation, grid.t_start, grid.t_start + 1.0);
    report.e_dist_max = metrics::node_distance(reference, prediction, dims_per_node).max;
    report.realtime_ratio = realtime_ratio;
    report.undefined_steps = triplet.reconstruction.undefined_count() +
                             triplet.regression.undefined_count() +
                             triplet.approximation.undefined_count();
    return report;
}

void print_report_table(const std::vector<metrics::SimulationReport>& rows) {
    auto line = [](const std::string& label, double regr, double approx, double approx_1s,
                   double rec, double dist, double ratio) {
        char buffer[160];
        std::snprintf(buffer, sizeof(buffer), "%-6s %9.4f %9.4f %12.4f %9.4f %12.5g %11.5g",
                      label.c_str(), regr, approx, approx_1s, rec, dist, ratio);
        std::cout << buffer << '\n';
    };
    char header[160];
    std::snprintf(header, sizeof(header), "%-6s %9s %9s %12s %9s %12s %11s", "sim", "s_regr",
                  "s_approx", "s_approx_1s", "s_rec", "e_dist_max", "rt_ratio");
    std::cout << header << '\n';
    metrics::SimulationReport mean;
    for (const auto& row : rows) {
        line(std::to_string(row.sim_id), row.s_regr_mean, row.s_approx_mean,
             row.s_approx_first_second, row.s_rec_mean, row.e_dist_max, row.realtime_ratio);
        mean.s_regr_mean += row.s_regr_mean;
        mean.s_approx_mean += row.s_approx_mean;
        mean.s_approx_first_second += row.s_approx_first_second;
        mean.s_rec_mean += row.s_rec_mean;
        mean.e_dist_max += row.e_dist_max;
        mean.realtime_ratio += row.realtime_ratio;
    }
    if (rows.size() > 1) {
        const double count = static_cast<double>(rows.size());
        line("mean", mean.s_regr_mean / count, mean.s_approx_mean / count,
             mean.s_approx_first_second / count, mean.s_rec_mean / count,
             mean.e_dist_max / count, mean.realtime_ratio / count);
    }
}

rollout::SurrogateBundle load_bundle(const fs::path& bundle_dir) {
    rollout::SurrogateBundle bundle;
    bundle.basis = io::load_basis(bundle_dir / "basis.bin");
    bundle.model = io::load_model(bundle_dir / "model.bin");
    bundle.validate();
    return bundle;
}

} // namespace

void run_generate(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
    config.validate();
    ensure_directory(out_dir);
    const auto params = hifi::generate_parameter_set(config.total_simulations(),
                                                     config.seeds.data, config.excitation,
                                                     config.grid);
    for (std::size_t j = 0; j < params.size(); ++j) {
        io::TrajectoryFile file;
        file.grid = config.grid;
        file.states.resize(0, config.grid.eta);
        file.params = params[j].values;
        io::save_trajectory(numbered(out_dir, "mu", static_cast<int>(j), "bin"), file);
    }
}

OfflineResult run_offline(const ExperimentConfig& config,
                          const std::filesystem::path& out_dir) {
    config.validate();
    ensure_directory(out_dir);
    const fs::path marker = out_dir / "FAILED";
    std::error_code ec;
    fs::remove(marker, ec);

    std::string stage = "generate";
    try {
        const int total = config.total_simulations();
        const auto params =
            hifi::generate_parameter_set(total, config.seeds.data, config.excitation,
                                         config.grid);

        stage = "simulate";
        const Eigen::VectorXd z1 = Eigen::VectorXd::Zero(config.hifi.state_dim());
        std::vector<StateTrajectory> states;
        states.reserve(static_cast<std::size_t>(total));
        for (int j = 0; j < total; ++j) {
            states.push_back(simulate(config.hifi, params[static_cast<std::size_t>(j)], z1,
                                      config.grid));
            io::TrajectoryFile file;
            file.grid = config.grid;
            file.states = states.back().states;
            file.params = params[static_cast<std::size_t>(j)].values;
            io::save_trajectory(sim_file_path(out_dir, j), file);
        }

        stage = "split";
        dataset::SplitSpec split_spec;
        split_spec.seed = config.seeds.split;
        split_spec.train = config.train_count;
        split_spec.validation = config.validation_count;
        split_spec.test = config.test_count;
        const auto split = dataset::split_simulations(total, split_spec);

        stage = "basis";
        std::vector<StateTrajectory> train_states;
        train_states.reserve(split.train.size());
        for (int id : split.train) train_states.push_back(states[static_cast<std::size_t>(id)]);
        const auto snapshots = reduction::assemble_snapshots(train_states);
        const auto basis = reduction::compute_pod(snapshots, config.reduced_dim);
        io::save_basis(out_dir / "basis.bin", basis);

        stage = "dataset";
        auto windows_for = [&](const std::vector<int>& ids) {
            std::vector<Eigen::MatrixXd> reduced;
            std::vector<ParameterTrajectory> mu;
            reduced.reserve(ids.size());
            mu.reserve(ids.size());
            for (int id : ids) {
                reduced.push_back(
                    reduction::reduce_all(basis, states[static_cast<std::size_t>(id)].states));
                mu.push_back(params[static_cast<std::size_t>(id)]);
            }
            return dataset::build_windows(reduced, mu, config.window_length);
        };
        const auto train_windows = windows_for(split.train);
        const auto validation_windows = windows_for(split.validation);
        const auto normalization = dataset::fit_normalization(train_windows);

        io::DatasetManifest manifest;
        manifest.train_ids = split.train;
        manifest.validation_ids = split.validation;
        manifest.test_ids = split.test;
        manifest.reduced_dim = config.reduced_dim;
        manifest.param_dim = config.excitation.channels;
        manifest.window_length = config.window_length;
        manifest.normalization = normalization;
        io::save_manifest(out_dir / "manifest.bin", manifest);

        stage = "train";
        auto initial = lstm::make_model(config.hidden_sizes,
                                        config.reduced_dim + config.excitation.channels,
                                        config.reduced_dim, config.output_layer,
                                        config.window_length, config.seeds.init);
        initial.normalization = normalization;
        auto trained = lstm::train(initial, train_windows, validation_windows, config.training);
        io::save_model(out_dir / "model.bin", trained.model);
        io::write_history_csv(out_dir / "history.csv", trained.history);

        OfflineResult result;
        result.bundle.basis = basis;
        result.bundle.model = std::move(trained.model);
        result.manifest = std::move(manifest);
        result.history = std::move(trained.history);
        result.best_epoch = trained.best_epoch;
        result.best_validation_loss = trained.best_validation_loss;
        return result;
    } catch (const std::exception& err) {
        std::ofstream out(marker);
        out << stage << ": " << err.what() << '\n';
        throw;
    }
}

OnlineResult run_online(const ExperimentConfig& config,
                        const std::filesystem::path& bundle_dir,
                        const std::filesystem::path& out_dir, const OnlineOptions& options) {
    config.validate();
    if (options.repetitions < 1) throw ArgumentError("run_online: repetitions must be >= 1");
    ensure_directory(out_dir);
    const auto bundle = load_bundle(bundle_dir);
    const int ell = bundle.model.input_size() - bundle.model.output_size();

    ParameterTrajectory mu;
    Eigen::VectorXd z1;
    std::optional<StateTrajectory> reference;
    if (options.sim_id >= 0) {
        const auto file = io::load_trajectory(sim_file_path(bundle_dir, options.sim_id));
        mu = file.parameter_trajectory();
        reference = file.state_trajectory();
        z1 = reference->states.col(0);
    } else {
        mu.grid = config.grid;
        mu.values = Eigen::MatrixXd::Zero(ell, config.grid.eta);
        z1 = Eigen::VectorXd::Zero(bundle.basis.full_dim());
    }

    const auto stats = rollout::measure_realtime_ratio(bundle, z1, mu, options.repetitions);
    const Eigen::MatrixXd reduced = rollout::rollout_reduced(bundle, z1, mu);

    OnlineResult result;
    result.prediction.grid = mu.grid;
    result.prediction.states = reduction::reconstruct_all(bundle.basis, reduced);
    result.realtime_ratio = stats.median;

    const bool replay = options.sim_id >= 0;
    const fs::path prediction_path = replay
                                         ? numbered(out_dir, "prediction", options.sim_id, "bin")
                                         : out_dir / "prediction.bin";
    const fs::path rollout_path =
        replay ? numbered(out_dir, "rollout", options.sim_id, "csv") : out_dir / "rollout.csv";
    io::TrajectoryFile prediction_file;
    prediction_file.grid = mu.grid;
    prediction_file.states = result.prediction.states;
    prediction_file.params = mu.values;
    io::save_trajectory(prediction_path, prediction_file);
    io::write_rollout_csv(rollout_path, mu.grid, reduced);

    if (reference) {
        const auto triplet = metrics::score_triplet(*reference, mu, bundle);
        io::write_scores_csv(numbered(out_dir, "scores", options.sim_id, "csv"), triplet);
        result.evaluated = true;
        result.report = build_report(options.sim_id, triplet, *reference, result.prediction,
                                     config.hifi.dims_per_node, stats.median);
    }
    return result;
}

std::vector<metrics::SimulationReport> run_evaluate(const ExperimentConfig& config,
                                                    const std::filesystem::path& bundle_dir,
                                                    const std::filesystem::path& out_dir,
                                                    int repetitions) {
    config.validate();
    if (repetitions < 1) throw ArgumentError("run_evaluate: repetitions must be >= 1");
    ensure_directory(out_dir);
    const auto bundle = load_bundle(bundle_dir);
    const auto manifest = io::load_manifest(bundle_dir / "manifest.bin");
    if (manifest.test_ids.empty())
        throw ConfigError("run_evaluate: the manifest lists no test simulations");

    std::vector<metrics::SimulationReport> reports;
    reports.reserve(manifest.test_ids.size());
    for (int id : manifest.test_ids) {
        const auto file = io::load_trajectory(sim_file_path(bundle_dir, id));
        const auto reference = file.state_trajectory();
        const auto mu = file.parameter_trajectory();
        const Eigen::VectorXd z1 = reference.states.col(0);

        const auto triplet = metrics::score_triplet(reference, mu, bundle);
        const auto prediction = rollout::rollout_full(bundle, z1, mu);
        const auto stats = rollout::measure_realtime_ratio(bundle, z1, mu, repetitions);
        reports.push_back(build_report(id, triplet, reference, prediction,
                                       config.hifi.dims_per_node, stats.median));
        io::write_scores_csv(numbered(out_dir, "scores", id, "csv"), triplet);
    }

    io::write_report_csv(out_dir / "report.csv", reports);
    print_report_table(reports);
    return reports;
}

namespace {

// Orthonormal basis of the right shape for timing runs; the values are
// irrelevant, the cost of the two projections is not.
reduction::ReducedBasis synthetic_basis(int full_dim, int rank, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd random(full_dim, rank);
    for (Eigen::Index i = 0; i < random.rows(); ++i)
        for (Eigen::Index j = 0; j < random.cols(); ++j) random(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random);
    reduction::ReducedBasis basis;
    basis.basis = qr.householderQ() * Eigen::MatrixXd::Identity(full_dim, rank);
    basis.singular_values = Eigen::VectorXd::Ones(rank);
    return basis;
}

} // namespace

std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& config,
                                        const std::filesystem::path& out_dir, int repetitions,
                                        const std::filesystem::path* bundle_dir) {
    config.validate();
    if (repetitions < 1) throw ArgumentError("run_benchmark: repetitions must be >= 1");
    ensure_directory(out_dir);

    std::optional<rollout::SurrogateBundle> loaded;
    if (bundle_dir) loaded = load_bundle(*bundle_dir);

    std::vector<int> sweep = config.benchmark_sweep;
    if (sweep.empty()) sweep.push_back(config.hifi.state_dim());

    const auto mu = hifi::generate_parameter_set(1, config.seeds.data, config.excitation,
                                                 config.grid)
                        .front();
    const double span = config.grid.duration();

    std::vector<BenchmarkRow> rows;
    rows.reserve(sweep.size());
    for (int state_dim : sweep) {
        hifi::HifiModelConfig model_config = config.hifi;
        model_config.n_node = state_dim / config.hifi.dims_per_node;
        model_config.validate();

        const Eigen::VectorXd z1 = Eigen::VectorXd::Zero(state_dim);
        std::vector<double> hifi_ratios;
        hifi_ratios.reserve(static_cast<std::size_t>(repetitions));
        for (int rep = 0; rep < repetitions; ++rep) {
            const auto begin = std::chrono::steady_clock::now();
            const auto trajectory = simulate(model_config, mu, z1, config.grid);
            const auto end = std::chrono::steady_clock::now();
            (void)trajectory;
            hifi_ratios.push_back(std::chrono::duration<double>(end - begin).count() / span);
        }

        rollout::SurrogateBundle bundle;
        if (loaded && loaded->basis.full_dim() == state_dim) {
            bundle = *loaded;
        } else {
            bundle.basis = synthetic_basis(state_dim, config.reduced_dim, config.seeds.init);
            bundle.model = lstm::make_model(config.hidden_sizes,
                                            config.reduced_dim + config.excitation.channels,
                                            config.reduced_dim, config.output_layer,
                                            config.window_length, config.seeds.init);
        }
        bundle.validate();
        const auto stats = rollout::measure_realtime_ratio(bundle, z1, mu, repetitions);

        BenchmarkRow row;
        row.state_dim = state_dim;
        row.hifi_ratio = median_of(hifi_ratios);
        row.surrogate_ratio = stats.median;
        row.speedup = row.hifi_ratio / row.surrogate_ratio;
        rows.push_back(row);
    }

    std::vector<std::vector<std::string>> csv_rows;
    csv_rows.reserve(rows.size());
    for (const auto& row : rows)
        csv_rows.push_back({std::to_string(row.state_dim), io::format_double(row.hifi_ratio),
                            io::format_double(row.surrogate_ratio),
                            io::format_double(row.speedup)});
    io::write_table_csv(out_dir / "benchmark.csv",
                        {"state_dim", "hifi_realtime_ratio", "surrogate_realtime_ratio",
                         "speedup"},
                        csv_rows);

    char header[128];
    std::snprintf(header, sizeof(header), "%10s %18s %18s %10s", "state_dim", "hifi_rt_ratio",
                  "surrogate_rt_ratio", "speedup");
    std::cout << header << '\n';
    for (const auto& row : rows) {
        char buffer[128];
        std::snprintf(buffer, sizeof(buffer), "%10d %18.6g %18.6g %10.2f", row.state_dim,
                      row.hifi_ratio, row.surrogate_ratio, row.speedup);
        std::cout << buffer << '\n';
    }
    return rows;
}

} // namespace podlstm::harness
