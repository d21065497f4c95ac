#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "podlstm/errors.hpp"
#include "podlstm/harness.hpp"

namespace {

// Exit codes: 0 success, 2 configuration or argument problems, 3 file format
// problems, 4 numeric failures, 1 anything else.
constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitFormat = 3;
constexpr int kExitNumeric = 4;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"POD plus windowed-LSTM surrogate toolkit for parametrized dynamics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string bundle_dir;
    int sim_id = -1;
    int repetitions = 3;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment configuration (JSON)")
            ->required();
        cmd->add_option("--out", out_dir, "output directory")->required();
    };

    CLI::App* generate =
        app.add_subcommand("generate", "write the excitation trajectories only");
    add_common(generate);

    CLI::App* offline = app.add_subcommand(
        "offline", "full pipeline: simulate, reduce, build dataset, train, persist");
    add_common(offline);

    CLI::App* online =
        app.add_subcommand("online", "roll the surrogate out; --sim-id replays a stored run");
    add_common(online);
    online->add_option("--bundle", bundle_dir, "directory with basis.bin and model.bin")
        ->required();
    online->add_option("--sim-id", sim_id, "stored simulation to replay and score");
    online->add_option("--repetitions", repetitions, "timing repetitions");

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "score every test simulation and write the report");
    add_common(evaluate);
    evaluate->add_option("--bundle", bundle_dir, "directory with the offline artifacts")
        ->required();
    evaluate->add_option("--repetitions", repetitions, "timing repetitions");

    CLI::App* benchmark = app.add_subcommand(
        "benchmark", "time the full-order model against a shape-matched surrogate");
    add_common(benchmark);
    benchmark->add_option("--bundle", bundle_dir,
                          "optional trained bundle to time instead of a synthesized one");
    benchmark->add_option("--repetitions", repetitions, "timing repetitions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const auto config = podlstm::harness::load_config(config_path);

        if (generate->parsed()) {
            podlstm::harness::run_generate(config, out_dir);
            std::cout << "wrote " << config.total_simulations() << " excitation files to "
                      << out_dir << '\n';
        } else if (offline->parsed()) {
            const auto result = podlstm::harness::run_offline(config, out_dir);
            std::cout << "offline pipeline finished: best validation loss "
                      << result.best_validation_loss << " at epoch " << (result.best_epoch + 1)
                      << " of " << result.history.size() << "; artifacts in " << out_dir
                      << '\n';
        } else if (online->parsed()) {
            podlstm::harness::OnlineOptions options;
            options.sim_id = sim_id;
            options.repetitions = repetitions;
            const auto result = podlstm::harness::run_online(config, bundle_dir, out_dir,
                                                             options);
            std::cout << "rollout finished: realtime ratio " << result.realtime_ratio
                      << "; outputs in " << out_dir << '\n';
            if (result.evaluated) {
                char line[160];
                std::snprintf(line, sizeof(line),
                              "sim %d: s_regr %.4f, s_approx %.4f (first second %.4f), "
                              "s_rec %.4f, e_dist_max %.5g",
                              result.report.sim_id, result.report.s_regr_mean,
                              result.report.s_approx_mean,
                              result.report.s_approx_first_second, result.report.s_rec_mean,
                              result.report.e_dist_max);
                std::cout << line << '\n';
            }
        } else if (evaluate->parsed()) {
            podlstm::harness::run_evaluate(config, bundle_dir, out_dir, repetitions);
            std::cout << "report written to " << (out_dir + "/report.csv") << '\n';
        } else if (benchmark->parsed()) {
            const std::filesystem::path bundle_path = bundle_dir;
            podlstm::harness::run_benchmark(config, out_dir, repetitions,
                                            bundle_dir.empty() ? nullptr : &bundle_path);
        }
        return kExitOk;
    } catch (const podlstm::ConfigError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const podlstm::ArgumentError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const podlstm::FormatError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitFormat;
    } catch (const podlstm::NumericError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitOther;
    }
}
