// wps: train, simulate, analyze and report on the warehouse picking simulator.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <iostream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "wps/analysis.hpp"
#include "wps/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Warehouse picking simulator"};
    app.require_subcommand(1);

    std::string config, qtable, runs, in_dir, out;
    unsigned jobs = 1;

    auto* train = app.add_subcommand("train", "Train a Q-table from a config");
    train->add_option("--config", config, "Experiment config (JSON)")->required();
    train->add_option("--out", out, "Output directory")->required();

    auto* simulate = app.add_subcommand("simulate", "Run the replicated simulation study");
    simulate->add_option("--config", config, "Experiment config (JSON)")->required();
    simulate->add_option("--qtable", qtable, "Q-table checkpoint")->required();
    simulate->add_option("--out", out, "Output directory")->required();
    simulate->add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)");

    auto* analyze = app.add_subcommand("analyze", "Aggregate a runs table");
    analyze->add_option("--runs", runs, "runs.csv")->required();
    analyze->add_option("--out", out, "Output directory")->required();

    auto* report = app.add_subcommand("report", "Render the markdown report");
    report->add_option("--in", in_dir, "Analysis directory")->required();
    report->add_option("--out", out, "Report file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*train) {
            auto res = wps::cmd_train(config, out);
            std::cout << "wrote " << res.qtable.string() << "\n";
        } else if (*simulate) {
            if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
            const auto runs = wps::cmd_simulate(config, qtable, out, jobs);
            std::cout << "wrote " << runs.string() << "\n";
        } else if (*analyze) {
            auto an = wps::cmd_analyze(runs, out);
            std::size_t passed = 0;
            for (const auto& r : an.comparison) passed += r.pass;
            std::cout << "wrote analysis to " << out << " (" << passed << "/" << an.comparison.size()
                      << " comparison rows pass)\n";
        } else if (*report) {
            wps::cmd_report(in_dir, out);
            std::cout << "wrote " << out << "\n";
        }
    } catch (const wps::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
