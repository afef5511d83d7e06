// Command-line front end: solve, sweep, oracle, coreset, report.

#include "cmdp/errors.hpp"
#include "cmdp/harness.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { ok = 0, failure = 1, config_error = 2, infeasible = 3, numerical = 4 };

template <class F> int guarded(F&& body) {
    try {
        body();
        return ok;
    } catch (const cmdp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const cmdp::InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const cmdp::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << " (slack " << e.slack() << ")\n";
        return infeasible;
    } catch (const cmdp::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained MDP primal-dual solvers and experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    auto* solve = app.add_subcommand("solve", "Run one experiment and write its iterate CSV");
    solve->add_option("config", config_path, "Experiment config (JSON)")->required();
    solve->add_option("--seed", seed, "Run seed (default: first entry of seeds)");
    solve->add_option("--out", out_path, "CSV path (default: <output>/run_seed<N>.csv)");

    int jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Run every hyperparameter cell over all seeds");
    sweep->add_option("config", config_path, "Sweep config (JSON)")->required();
    sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    auto* oracle = app.add_subcommand("oracle", "Print exact oracle quantities as JSON");
    oracle->add_option("config", config_path, "Experiment config (JSON)")->required();

    auto* coreset = app.add_subcommand("coreset", "Print the coreset as JSON");
    coreset->add_option("config", config_path, "Experiment config (JSON)")->required();

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Summarise sweep outputs below a directory");
    report->add_option("dir", report_dir, "Directory to scan")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    if (*solve) {
        return guarded([&] {
            const cmdp::ExperimentConfig cfg = cmdp::load_config(config_path);
            const std::uint64_t s = seed ? *seed : cfg.seeds.front();
            const std::filesystem::path csv =
                out_path.empty() ? std::filesystem::path(cfg.output) / ("run_seed" + std::to_string(s) + ".csv")
                                 : std::filesystem::path(out_path);
            const auto res = cmdp::run_experiment(cfg, s, csv);
            std::cout << "wrote " << res.csv.string() << " (" << res.log.records.size() << " iterations)\n";
            if (!res.log.records.empty()) {
                const auto& last = res.log.records.back();
                std::cout << "final OG " << last.og_running << ", CV " << last.cv_running << ", lambda "
                          << last.lambda << '\n';
            }
        });
    }
    if (*sweep) {
        return guarded([&] {
            const cmdp::ExperimentConfig cfg = cmdp::load_config(config_path);
            const auto res = cmdp::run_sweep(cfg, jobs);
            std::cout << "wrote " << res.summary_csv.string() << " (" << res.cells.size() << " cells)\n";
            std::cout << cmdp::report_directory(res.summary_csv.parent_path());
        });
    }
    if (*oracle) {
        return guarded([&] { std::cout << cmdp::oracle_report(cmdp::load_config(config_path)).dump(2) << '\n'; });
    }
    if (*coreset) {
        return guarded([&] { std::cout << cmdp::coreset_report(cmdp::load_config(config_path)).dump(2) << '\n'; });
    }
    return guarded([&] { std::cout << cmdp::report_directory(report_dir); });
}
