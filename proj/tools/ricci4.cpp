// Command line driver; subcommands are implemented in ricci4/cli.hpp.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ricci4/cli.hpp"

int main(int argc, char** argv) {
    namespace cli = ricci4::cli;

    CLI::App app{"curvature reports, normalized Ricci flow, and amplitude sweeps\n"
                 "for squashed and conformal profile metrics on the 4-sphere"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cli::tool_version);

    std::string profile_path, config_path, out_dir;
    std::vector<std::string> series_paths;
    uint64_t seed = 0;
    bool quiet = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", out_dir, "directory for output artifacts");
        sub->add_flag("--quiet", quiet, "suppress the stdout summary");
    };

    auto* check = app.add_subcommand("check", "static curvature report for one profile file");
    check->add_option("profile", profile_path, "profile file (columnar format)")->required();
    add_common(check);

    auto* flow = app.add_subcommand("flow", "run one flow and write series, snapshots, manifest");
    flow->add_option("--config", config_path, "key=value run configuration")->required();
    flow->add_option("--seed", seed, "seed for the random perturbation shape");
    add_common(flow);

    auto* sweep = app.add_subcommand("sweep", "one flow per amplitude, one verdict row each");
    sweep->add_option("--config", config_path, "key=value run configuration")->required();
    sweep->add_option("--seed", seed, "seed for the random perturbation shape");
    add_common(sweep);

    auto* plot = app.add_subcommand("plot", "log-scale SVG of functional series");
    plot->add_option("series", series_paths, "series CSV files")->required();
    add_common(plot);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        const bool benign = dynamic_cast<const CLI::CallForHelp*>(&e) != nullptr
                         || dynamic_cast<const CLI::CallForAllHelp*>(&e) != nullptr
                         || dynamic_cast<const CLI::CallForVersion*>(&e) != nullptr;
        return benign ? rc : cli::exit_input;
    }

    const cli::RunOptions opts{out_dir, seed, quiet};
    try {
        if (*check) return cli::cmd_check(profile_path, opts, std::cout, std::cerr);
        if (*flow) return cli::cmd_flow(config_path, opts, std::cout, std::cerr);
        if (*sweep) return cli::cmd_sweep(config_path, opts, std::cout, std::cerr);
        if (*plot) return cli::cmd_plot(series_paths, opts, std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::exit_input;
    }
    return cli::exit_input;
}
