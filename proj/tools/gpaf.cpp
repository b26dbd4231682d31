#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "gpaf/cli.hpp"

using namespace gpaf;
using namespace gpaf::cli;

int main(int argc, char **argv) {
    CLI::App app{"Gaussian-process adaptive filtering toolkit"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::string out_dir, config_path;
    std::optional<int> replicates;
    std::optional<unsigned> workers;
    bool inject_fault = false;
    std::optional<int> streams;

    auto *fig2 = app.add_subcommand("fig2", "posterior of a 1-D GP trained on 20 clustered samples");
    fig2->add_option("--out", out_dir, "output directory")->required();
    fig2->add_option("--seed", seed, "random seed (falls back to GPAF_SEED)");

    auto *track = app.add_subcommand("track", "nonlinear fading channel tracking experiment");
    track->add_option("--config", config_path, "JSON config")->required();
    track->add_option("--out", out_dir, "output directory (overrides output_dir)");
    track->add_option("--seed", seed, "random seed (overrides the config)");
    track->add_option("--replicates", replicates, "replicates per scenario")->check(CLI::PositiveNumber);
    track->add_option("--workers", workers, "worker threads (0 = hardware concurrency)");

    auto *hyper = app.add_subcommand("hyperopt", "multi-restart marginal likelihood optimization demo");
    hyper->add_option("--config", config_path, "JSON config")->required();
    hyper->add_option("--out", out_dir, "output directory (overrides output_dir)");
    hyper->add_option("--seed", seed, "random seed (overrides the config)");

    auto *check = app.add_subcommand("check", "equivalence suites and invariants");
    check->add_option("--out", out_dir, "also write check_report.csv here");
    check->add_option("--seed", seed, "random seed (falls back to GPAF_SEED)");
    check->add_option("--streams", streams, "random streams per suite")->check(CLI::PositiveNumber);
    check->add_flag("--inject-fault", inject_fault, "run the online model with lambda^2 to exercise the failure path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kIoError;
    }

    try {
        if (*fig2) return cmd_fig2(out_dir, resolve_seed(seed, std::nullopt), std::cout);
        if (*check) {
            EquivalenceOptions opt;
            opt.inject_fault = inject_fault;
            if (streams) opt.streams = *streams;
            std::optional<std::filesystem::path> dir;
            if (!out_dir.empty()) dir = out_dir;
            return cmd_check(opt, resolve_seed(seed, std::nullopt), dir, std::cout);
        }
        ExperimentConfig cfg = load_config(config_path);
        cfg.seed = resolve_seed(seed, cfg.seed);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (*track) {
            if (replicates) cfg.replicates = *replicates;
            if (workers) cfg.workers = *workers;
            return cmd_track(cfg, std::cout);
        }
        return cmd_hyperopt(cfg, std::cout);
    } catch (const IoError &e) {
        std::cerr << "gpaf: " << e.what() << '\n';
        return kIoError;
    } catch (const IllConditionedError &e) {
        std::cerr << "gpaf: numerical failure: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "gpaf: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument &e) {
        std::cerr << "gpaf: invalid input: " << e.what() << '\n';
        return kIoError;
    }
}
