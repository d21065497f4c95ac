#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <podlstm/io.hpp>

#include "support.hpp"

using namespace podlstm;
using namespace podlstm::io;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void spit(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::string> lines_of(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

TrajectoryFile sample_trajectory() {
    TrajectoryFile file;
    file.grid = TimeGrid{0.25, 0.05, 6};
    file.states = testsupport::random_matrix(4, 6, 1);
    file.params = testsupport::random_matrix(2, 6, 2);
    return file;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("trajectory files round-trip bit for bit") {
    testsupport::TempDir dir;
    const auto path = dir.path / "traj.bin";
    const auto file = sample_trajectory();
    save_trajectory(path, file);
    const auto loaded = load_trajectory(path);

    CHECK(loaded.grid == file.grid);
    CHECK(testsupport::bitwise_equal(loaded.states, file.states));
    CHECK(testsupport::bitwise_equal(loaded.params, file.params));
    CHECK_NOTHROW(loaded.state_trajectory().validate());
    CHECK_NOTHROW(loaded.parameter_trajectory().validate());
}

TEST_CASE("either block of a trajectory file may be empty") {
    testsupport::TempDir dir;

    TrajectoryFile params_only;
    params_only.grid = TimeGrid{0.0, 0.1, 5};
    params_only.states = Eigen::MatrixXd(0, 5);
    params_only.params = testsupport::random_matrix(3, 5, 3);
    const auto mu_path = dir.path / "mu.bin";
    save_trajectory(mu_path, params_only);
    const auto mu_loaded = load_trajectory(mu_path);
    CHECK(mu_loaded.states.rows() == 0);
    CHECK(testsupport::bitwise_equal(mu_loaded.params, params_only.params));
    CHECK_NOTHROW(mu_loaded.parameter_trajectory().validate());
    CHECK_THROWS_AS(mu_loaded.state_trajectory(), FormatError);

    TrajectoryFile states_only;
    states_only.grid = TimeGrid{0.0, 0.1, 4};
    states_only.states = testsupport::random_matrix(2, 4, 4);
    states_only.params = Eigen::MatrixXd(0, 4);
    const auto z_path = dir.path / "z.bin";
    save_trajectory(z_path, states_only);
    const auto z_loaded = load_trajectory(z_path);
    CHECK(z_loaded.params.rows() == 0);
    CHECK_NOTHROW(z_loaded.state_trajectory().validate());
}

TEST_CASE("basis files round-trip and refuse centered bases") {
    testsupport::TempDir dir;
    reduction::ReducedBasis basis;
    basis.basis = testsupport::random_orthonormal(8, 3, 5);
    basis.singular_values = Eigen::VectorXd::LinSpaced(6, 6.0, 1.0);

    const auto path = dir.path / "basis.bin";
    save_basis(path, basis);
    const auto loaded = load_basis(path);
    CHECK(testsupport::bitwise_equal(loaded.basis, basis.basis));
    CHECK(testsupport::bitwise_equal(loaded.singular_values, basis.singular_values));
    CHECK_FALSE(loaded.centered());

    reduction::ReducedBasis centered = basis;
    centered.mean = Eigen::VectorXd::Ones(8);
    CHECK_THROWS_AS(save_basis(dir.path / "centered.bin", centered), ConfigError);
}

TEST_CASE("model files preserve every tensor and the normalization") {
    testsupport::TempDir dir;
    auto model = lstm::make_model({5, 3}, 4, 2, true, 6, 77);
    model.normalization.input_shift = testsupport::random_vector(4, 6);
    model.normalization.input_scale =
        (testsupport::random_vector(4, 7).cwiseAbs().array() + 0.1).matrix();
    model.normalization.target_shift = testsupport::random_vector(2, 8);
    model.normalization.target_scale =
        (testsupport::random_vector(2, 9).cwiseAbs().array() + 0.1).matrix();

    const auto path = dir.path / "model.bin";
    save_model(path, model);
    const auto loaded = load_model(path);

    CHECK(loaded.window_length == 6);
    CHECK(loaded.has_output_layer);
    REQUIRE(loaded.layers.size() == 2);
    for (std::size_t l = 0; l < 2; ++l) {
        CHECK(testsupport::bitwise_equal(loaded.layers[l].w_f, model.layers[l].w_f));
        CHECK(testsupport::bitwise_equal(loaded.layers[l].w_i, model.layers[l].w_i));
        CHECK(testsupport::bitwise_equal(loaded.layers[l].w_c, model.layers[l].w_c));
        CHECK(testsupport::bitwise_equal(loaded.layers[l].w_o, model.layers[l].w_o));
        CHECK(testsupport::bitwise_equal(loaded.layers[l].b_f, model.layers[l].b_f));
        CHECK(testsupport::bitwise_equal(loaded.layers[l].b_o, model.layers[l].b_o));
    }
    CHECK(testsupport::bitwise_equal(loaded.output_weight, model.output_weight));
    CHECK(testsupport::bitwise_equal(loaded.output_bias, model.output_bias));
    CHECK(testsupport::bitwise_equal(loaded.normalization.input_scale,
                                     model.normalization.input_scale));
    CHECK(testsupport::bitwise_equal(loaded.normalization.target_shift,
                                     model.normalization.target_shift));

    // The loaded network computes exactly what the saved one did.
    const Eigen::MatrixXd window = testsupport::random_matrix(4, 6, 10);
    CHECK(testsupport::bitwise_equal(lstm::forward_normalized(loaded, window, 6),
                                     lstm::forward_normalized(model, window, 6)));

    // A headless model round-trips too.
    auto plain = lstm::make_model({4, 2}, 3, 2, false, 2, 78);
    const auto plain_path = dir.path / "plain.bin";
    save_model(plain_path, plain);
    const auto plain_loaded = load_model(plain_path);
    CHECK_FALSE(plain_loaded.has_output_layer);
    CHECK(plain_loaded.output_size() == 2);
}

TEST_CASE("manifest files carry the split and the normalization") {
    testsupport::TempDir dir;
    DatasetManifest manifest;
    manifest.train_ids = {4, 0, 2};
    manifest.validation_ids = {1};
    manifest.test_ids = {3, 5};
    manifest.reduced_dim = 3;
    manifest.param_dim = 2;
    manifest.window_length = 7;
    manifest.normalization.input_shift = testsupport::random_vector(5, 11);
    manifest.normalization.input_scale =
        (testsupport::random_vector(5, 12).cwiseAbs().array() + 0.1).matrix();
    manifest.normalization.target_shift = testsupport::random_vector(3, 13);
    manifest.normalization.target_scale =
        (testsupport::random_vector(3, 14).cwiseAbs().array() + 0.1).matrix();

    const auto path = dir.path / "manifest.bin";
    save_manifest(path, manifest);
    const auto loaded = load_manifest(path);
    CHECK(loaded.train_ids == manifest.train_ids);
    CHECK(loaded.validation_ids == manifest.validation_ids);
    CHECK(loaded.test_ids == manifest.test_ids);
    CHECK(loaded.reduced_dim == 3);
    CHECK(loaded.param_dim == 2);
    CHECK(loaded.window_length == 7);
    CHECK(testsupport::bitwise_equal(loaded.normalization.input_shift,
                                     manifest.normalization.input_shift));
    CHECK(testsupport::bitwise_equal(loaded.normalization.target_scale,
                                     manifest.normalization.target_scale));
}

TEST_CASE("corrupted files fail with format errors") {
    testsupport::TempDir dir;
    const auto path = dir.path / "traj.bin";
    save_trajectory(path, sample_trajectory());
    const std::string good = slurp(path);

    // Flipped magic byte.
    std::string bad_magic = good;
    bad_magic[0] = static_cast<char>(bad_magic[0] ^ 0xFF);
    spit(dir.path / "magic.bin", bad_magic);
    CHECK_THROWS_AS(load_trajectory(dir.path / "magic.bin"), FormatError);

    // Unsupported version word.
    std::string bad_version = good;
    bad_version[8] = 99;
    spit(dir.path / "version.bin", bad_version);
    CHECK_THROWS_AS(load_trajectory(dir.path / "version.bin"), FormatError);

    // Payload cut short.
    spit(dir.path / "short.bin", good.substr(0, good.size() - 5));
    CHECK_THROWS_AS(load_trajectory(dir.path / "short.bin"), FormatError);

    // Junk appended after the payload.
    spit(dir.path / "long.bin", good + "xx");
    CHECK_THROWS_AS(load_trajectory(dir.path / "long.bin"), FormatError);

    // Wrong artifact type entirely.
    CHECK_THROWS_AS(load_model(path), FormatError);
    CHECK_THROWS_AS(load_basis(path), FormatError);
    CHECK_THROWS_AS(load_manifest(path), FormatError);

    // Missing file.
    CHECK_THROWS_AS(load_trajectory(dir.path / "absent.bin"), FormatError);

    // Saving refuses non-finite payloads outright.
    TrajectoryFile poisoned = sample_trajectory();
    poisoned.states(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(save_trajectory(dir.path / "nan.bin", poisoned), NumericError);

    // A NaN smuggled into the payload bytes is caught on load. The first
    // state double sits right after the 56-byte header.
    std::string nan_bytes = good;
    const unsigned char quiet_nan[8] = {0, 0, 0, 0, 0, 0, 0xF8, 0x7F};
    for (int i = 0; i < 8; ++i) nan_bytes[56 + i] = static_cast<char>(quiet_nan[i]);
    spit(dir.path / "nan_payload.bin", nan_bytes);
    CHECK_THROWS_AS(load_trajectory(dir.path / "nan_payload.bin"), FormatError);
}

TEST_CASE("doubles survive the decimal round trip") {
    for (double value : {0.1, -0.0, 1e300, 1e-300, 3.141592653589793,
                         -0.0031622766601686956, 123456789.123456789}) {
        CHECK(std::stod(format_double(value)) == value);
    }
}

TEST_CASE("csv writers emit headers and one row per record") {
    testsupport::TempDir dir;

    std::vector<lstm::EpochStats> history = {{0.5, 0.6}, {0.25, 0.3}};
    write_history_csv(dir.path / "history.csv", history);
    auto history_lines = lines_of(dir.path / "history.csv");
    REQUIRE(history_lines.size() == 3);
    CHECK(history_lines[0] == "epoch,train_loss,validation_loss");
    CHECK(history_lines[1].substr(0, 2) == "1,");
    CHECK(history_lines[2].substr(0, 2) == "2,");
    {
        std::stringstream row(history_lines[2]);
        std::string field;
        std::getline(row, field, ',');
        std::getline(row, field, ',');
        CHECK(std::stod(field) == 0.25);
    }

    metrics::ScoreTriplet triplet;
    triplet.reconstruction.grid = TimeGrid{0.0, 0.1, 3};
    triplet.reconstruction.values = Eigen::VectorXd::Constant(3, 1.0);
    triplet.regression = triplet.reconstruction;
    triplet.approximation = triplet.reconstruction;
    triplet.approximation.values(1) = std::numeric_limits<double>::quiet_NaN();
    write_scores_csv(dir.path / "scores.csv", triplet);
    auto score_lines = lines_of(dir.path / "scores.csv");
    REQUIRE(score_lines.size() == 4);
    CHECK(score_lines[0] == "t,s_rec,s_regr,s_approx");
    CHECK(score_lines[2].find("nan") != std::string::npos);

    write_rollout_csv(dir.path / "rollout.csv", TimeGrid{0.0, 0.5, 2},
                      testsupport::random_matrix(2, 2, 21));
    auto rollout_lines = lines_of(dir.path / "rollout.csv");
    REQUIRE(rollout_lines.size() == 3);
    CHECK(rollout_lines[0] == "t,zbar_1,zbar_2");
}

TEST_CASE("report csv appends a mean row for multiple simulations") {
    testsupport::TempDir dir;
    metrics::SimulationReport a;
    a.sim_id = 3;
    a.s_rec_mean = 0.99;
    a.s_regr_mean = 0.98;
    a.s_approx_mean = 0.97;
    a.s_approx_first_second = 0.96;
    a.e_dist_max = 0.1;
    a.realtime_ratio = 0.01;
    a.undefined_steps = 1;
    metrics::SimulationReport b = a;
    b.sim_id = 5;
    b.s_regr_mean = 0.96;
    b.undefined_steps = 2;

    write_report_csv(dir.path / "single.csv", {a});
    CHECK(lines_of(dir.path / "single.csv").size() == 2); // no mean row for one entry

    write_report_csv(dir.path / "pair.csv", {a, b});
    const auto lines = lines_of(dir.path / "pair.csv");
    REQUIRE(lines.size() == 4);
    CHECK(lines[0].find("sim_id") == 0);
    CHECK(lines[0].find("s_approx_first_second") != std::string::npos);
    CHECK(lines[3].substr(0, 5) == "mean,");
    {
        std::stringstream row(lines[3]);
        std::string field;
        std::getline(row, field, ','); // label
        std::getline(row, field, ','); // s_regr mean
        CHECK(std::stod(field) == doctest::Approx(0.97).epsilon(1e-15));
    }

    CHECK_THROWS_AS(write_table_csv(dir.path / "bad.csv", {"a", "b"}, {{"1"}}),
                    ArgumentError);
}

} // TEST_SUITE
