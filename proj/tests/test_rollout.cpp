#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <podlstm/dataset.hpp>
#include <podlstm/rollout.hpp>

#include "support.hpp"

using namespace podlstm;
using namespace podlstm::rollout;

namespace {

reduction::ReducedBasis orthonormal_basis(int full, int rank, std::uint64_t seed) {
    reduction::ReducedBasis basis;
    basis.basis = testsupport::random_orthonormal(full, rank, seed);
    basis.singular_values = Eigen::VectorXd::Ones(rank);
    return basis;
}

class ZeroStub : public DeltaPredictor {
public:
    explicit ZeroStub(int r) : r_(r) {}
    int reduced_dim() const override { return r_; }
    Eigen::VectorXd predict(const Eigen::MatrixXd&, int) override {
        return Eigen::VectorXd::Zero(r_);
    }

private:
    int r_;
};

// Records every window handed over and replays scripted increments.
class RecordingStub : public DeltaPredictor {
public:
    RecordingStub(int r, std::function<Eigen::VectorXd(int)> script)
        : r_(r), script_(std::move(script)) {}
    int reduced_dim() const override { return r_; }
    Eigen::VectorXd predict(const Eigen::MatrixXd& window, int valid_length) override {
        windows.push_back(window);
        valids.push_back(valid_length);
        return script_(static_cast<int>(windows.size()) - 1);
    }

    std::vector<Eigen::MatrixXd> windows;
    std::vector<int> valids;

private:
    int r_;
    std::function<Eigen::VectorXd(int)> script_;
};

} // namespace

TEST_SUITE("rollout") {

TEST_CASE("a single-sample grid never consults the predictor") {
    const auto basis = orthonormal_basis(6, 2, 1);
    RecordingStub stub(2, [](int) { return Eigen::VectorXd::Zero(2); });
    const TimeGrid grid{0.0, 0.1, 1};
    ParameterTrajectory mu{grid, Eigen::MatrixXd::Zero(1, 1)};
    const Eigen::VectorXd z1 = testsupport::random_vector(6, 2);

    const Eigen::MatrixXd reduced = rollout_reduced(basis, stub, 3, z1, mu);
    REQUIRE(reduced.cols() == 1);
    CHECK(stub.windows.empty());
    CHECK(testsupport::bitwise_equal(reduced.col(0), reduction::reduce(basis, z1)));
}

TEST_CASE("zero increments freeze the reduced state") {
    const auto basis = orthonormal_basis(7, 3, 3);
    ZeroStub stub(3);
    const TimeGrid grid{0.0, 0.1, 6};
    ParameterTrajectory mu{grid, testsupport::random_matrix(2, 6, 4)};
    const Eigen::VectorXd z1 = testsupport::random_vector(7, 5);

    const Eigen::MatrixXd reduced = rollout_reduced(basis, stub, 2, z1, mu);
    REQUIRE(reduced.cols() == 6);
    const Eigen::VectorXd zbar0 = reduction::reduce(basis, z1);
    for (int t = 0; t < 6; ++t)
        CHECK(testsupport::bitwise_equal(reduced.col(t), zbar0));
}

TEST_CASE("windows carry exactly the available history, newest last") {
    const int r = 2, ell = 1, n_w = 3, eta = 7;
    const auto basis = orthonormal_basis(5, r, 7);
    const TimeGrid grid{0.0, 0.05, eta};
    ParameterTrajectory mu{grid, testsupport::random_matrix(ell, eta, 8)};
    const Eigen::VectorXd z1 = testsupport::random_vector(5, 9);

    // Scripted increments, all distinct.
    auto script = [](int call) {
        Eigen::VectorXd d(2);
        d << 0.1 * (call + 1), -0.05 * (call + 1);
        return d;
    };
    RecordingStub stub(r, script);
    const Eigen::MatrixXd reduced = rollout_reduced(basis, stub, n_w, z1, mu);

    // Reference trajectory built by the same additive rule.
    Eigen::MatrixXd expected(r, eta);
    expected.col(0) = reduction::reduce(basis, z1);
    for (int t = 0; t + 1 < eta; ++t) expected.col(t + 1) = expected.col(t) + script(t);
    CHECK(testsupport::bitwise_equal(reduced, expected));

    REQUIRE(stub.windows.size() == eta - 1);
    for (int t = 0; t + 1 < eta; ++t) {
        const auto& window = stub.windows[static_cast<std::size_t>(t)];
        const int valid = stub.valids[static_cast<std::size_t>(t)];
        CHECK(valid == std::min(t + 1, n_w));
        REQUIRE(window.cols() == valid); // no padding: short windows early on
        REQUIRE(window.rows() == r + ell);
        for (int k = 0; k < valid; ++k) {
            const int source = t - (valid - 1 - k);
            CHECK(testsupport::bitwise_equal(window.col(k).topRows(r),
                                             expected.col(source)));
            CHECK(testsupport::bitwise_equal(window.col(k).bottomRows(ell),
                                             mu.values.col(source)));
        }
    }
}

TEST_CASE("rollout windows coincide with training windows on the true path") {
    // Feed the rollout the true increments; its windows must replicate what
    // build_windows would cut from the resulting trajectory.
    const int r = 2, ell = 1, n_w = 3, eta = 6;
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(r, r);
    reduction::ReducedBasis basis;
    basis.basis = identity;
    basis.singular_values = Eigen::VectorXd::Ones(r);

    const TimeGrid grid{0.0, 0.1, eta};
    ParameterTrajectory mu{grid, testsupport::random_matrix(ell, eta, 21)};
    const Eigen::MatrixXd truth = testsupport::random_matrix(r, eta, 22);

    auto script = [&truth](int call) {
        return Eigen::VectorXd(truth.col(call + 1) - truth.col(call));
    };
    RecordingStub stub(r, script);
    rollout_reduced(basis, stub, n_w, truth.col(0), mu);

    const auto data = dataset::build_windows({truth}, {mu}, n_w);
    REQUIRE(data.samples.size() == stub.windows.size());
    for (std::size_t k = 0; k < data.samples.size(); ++k) {
        CHECK(data.samples[k].valid_length == stub.valids[k]);
        // Here additions regenerate the exact stored doubles: increments were
        // formed from the very differences being re-accumulated.
        CHECK((data.samples[k].inputs - stub.windows[k]).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("initial states inside the span survive the round trip") {
    const auto basis = orthonormal_basis(9, 4, 31);
    ZeroStub stub(4);
    const TimeGrid grid{0.0, 0.1, 3};
    ParameterTrajectory mu{grid, Eigen::MatrixXd::Zero(1, 3)};

    const Eigen::VectorXd y = testsupport::random_vector(4, 32);
    const Eigen::VectorXd z1 = basis.basis * y;
    const Eigen::MatrixXd reduced = rollout_reduced(basis, stub, 2, z1, mu);
    CHECK((reduced.col(0) - y).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((reduction::reconstruct(basis, reduced.col(0)) - z1).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("exploding increments raise a numeric error naming the step") {
    const auto basis = orthonormal_basis(5, 2, 41);
    auto script = [](int call) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(2);
        if (call == 2) d.setConstant(std::numeric_limits<double>::infinity());
        return d;
    };
    RecordingStub stub(2, script);
    const TimeGrid grid{0.0, 0.1, 8};
    ParameterTrajectory mu{grid, Eigen::MatrixXd::Zero(1, 8)};

    try {
        rollout_reduced(basis, stub, 3, testsupport::random_vector(5, 42), mu);
        FAIL("expected divergence");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("diverged") != std::string::npos);
    }
}

TEST_CASE("shape mismatches are rejected") {
    const auto basis = orthonormal_basis(5, 2, 51);
    const TimeGrid grid{0.0, 0.1, 4};
    ParameterTrajectory mu{grid, Eigen::MatrixXd::Zero(1, 4)};
    const Eigen::VectorXd z1 = testsupport::random_vector(5, 52);

    ZeroStub wrong_rank(3);
    CHECK_THROWS_AS(rollout_reduced(basis, wrong_rank, 2, z1, mu), ArgumentError);

    RecordingStub wrong_delta(2, [](int) { return Eigen::VectorXd::Zero(3); });
    CHECK_THROWS_AS(rollout_reduced(basis, wrong_delta, 2, z1, mu), ArgumentError);

    ZeroStub ok(2);
    CHECK_THROWS_AS(rollout_reduced(basis, ok, 0, z1, mu), ArgumentError);
    CHECK_THROWS_AS(rollout_reduced(basis, ok, 2, testsupport::random_vector(4, 53), mu),
                    ArgumentError);
}

TEST_CASE("bundle validation") {
    SurrogateBundle bundle;
    bundle.basis = orthonormal_basis(6, 2, 61);
    bundle.model = lstm::make_model({4, 2}, 3, 2, false, 3, 62);
    CHECK_NOTHROW(bundle.validate());
    CHECK(bundle.reduced_dim() == 2);
    CHECK(bundle.window_length() == 3);

    SurrogateBundle wrong = bundle;
    wrong.model = lstm::make_model({4, 3}, 4, 3, false, 3, 63);
    CHECK_THROWS_AS(wrong.validate(), ArgumentError);

    SurrogateBundle centered = bundle;
    centered.basis.mean = Eigen::VectorXd::Zero(6);
    CHECK_THROWS_AS(centered.validate(), ArgumentError);

    // No room for parameter channels: input == output.
    SurrogateBundle cramped = bundle;
    cramped.model = lstm::make_model({4, 2}, 2, 2, false, 3, 64);
    CHECK_THROWS_AS(cramped.validate(), ArgumentError);
}

TEST_CASE("bundle rollout equals the explicit predictor loop") {
    SurrogateBundle bundle;
    bundle.basis = orthonormal_basis(8, 3, 71);
    bundle.model = lstm::make_model({5, 3}, 4, 3, false, 2, 72);
    bundle.model.normalization.input_shift = testsupport::random_vector(4, 73);
    bundle.model.normalization.input_scale =
        (testsupport::random_vector(4, 74).cwiseAbs().array() + 0.3).matrix();
    bundle.model.normalization.target_shift = 0.01 * testsupport::random_vector(3, 75);
    bundle.model.normalization.target_scale =
        (0.02 * testsupport::random_vector(3, 76).cwiseAbs().array() + 0.01).matrix();

    const TimeGrid grid{0.0, 0.1, 9};
    ParameterTrajectory mu{grid, testsupport::random_matrix(1, 9, 77)};
    const Eigen::VectorXd z1 = testsupport::random_vector(8, 78);

    const Eigen::MatrixXd via_bundle = rollout_reduced(bundle, z1, mu);
    LstmDeltaPredictor predictor(bundle.model);
    const Eigen::MatrixXd via_loop =
        rollout_reduced(bundle.basis, predictor, bundle.window_length(), z1, mu);
    CHECK(testsupport::bitwise_equal(via_bundle, via_loop));

    // The full-order rollout is the reconstruction of the reduced one.
    const StateTrajectory full = rollout_full(bundle, z1, mu);
    CHECK(full.grid == grid);
    CHECK(testsupport::bitwise_equal(full.states,
                                     reduction::reconstruct_all(bundle.basis, via_bundle)));

    // Channel mismatch: the model expects one parameter channel, not two.
    ParameterTrajectory wide{grid, testsupport::random_matrix(2, 9, 79)};
    CHECK_THROWS_AS(rollout_reduced(bundle, z1, wide), ArgumentError);
}

TEST_CASE("realtime measurements are positive and ordered") {
    SurrogateBundle bundle;
    bundle.basis = orthonormal_basis(10, 3, 81);
    bundle.model = lstm::make_model({6, 3}, 4, 3, false, 3, 82);
    const TimeGrid grid{0.0, 0.01, 50};
    ParameterTrajectory mu{grid, testsupport::random_matrix(1, 50, 83)};
    const Eigen::VectorXd z1 = Eigen::VectorXd::Zero(10);

    const auto stats = measure_realtime_ratio(bundle, z1, mu, 5);
    REQUIRE(stats.ratios.size() == 5);
    for (double ratio : stats.ratios) {
        CHECK(ratio > 0.0);
        CHECK(std::isfinite(ratio));
        CHECK(stats.min <= ratio);
    }
    auto sorted = stats.ratios;
    std::sort(sorted.begin(), sorted.end());
    CHECK(stats.min == sorted.front());
    CHECK(stats.median == sorted[2]);

    CHECK_THROWS_AS(measure_realtime_ratio(bundle, z1, mu, 0), ArgumentError);
    const TimeGrid tiny{0.0, 0.01, 1};
    ParameterTrajectory short_mu{tiny, Eigen::MatrixXd::Zero(1, 1)};
    CHECK_THROWS_AS(measure_realtime_ratio(bundle, z1, short_mu, 3), ArgumentError);
}

} // TEST_SUITE
