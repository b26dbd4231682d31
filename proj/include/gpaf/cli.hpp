#pragma once

// Library side of the `gpaf` command-line tool. Every command is a plain
// function so that tests can drive it without spawning processes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpaf/channel_sim.hpp"
#include "gpaf/experiment.hpp"
#include "gpaf/gp_batch.hpp"

namespace gpaf::cli {

enum ExitCode : int { kOk = 0, kOracleFailure = 1, kIoError = 2, kNumericalError = 3 };

/// Unreadable config, unwritable output, malformed config contents.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One algorithm entry of a tracking config. Parameters left unset are tuned
/// on held-out streams before the replicates run.
struct AlgoEntry {
    Algo algo = Algo::Nlms;
    std::optional<AlgoParams> fixed;
};

struct HyperoptDemo {
    Index n = 200;
    Index dim = 1;
    double alpha1 = 1.0;
    double gamma = 2.0;
    double noise_std = 0.1;
    HyperOptOptions options{};
};

struct EquivalenceOptions {
    int streams = 50;
    bool inject_fault = false;  // forgetting applied with lambda^2 in the online model
};

struct ExperimentConfig {
    std::string scenario = "tracking_sim";  // fig2_demo | tracking_sim | hyperopt_demo | equivalence_suite
    std::vector<ChannelConfig> channels{ChannelConfig{}};
    std::vector<AlgoEntry> algos;
    int replicates = 10;
    std::filesystem::path output_dir = "out";
    std::optional<std::uint64_t> seed;  // see resolve_seed
    unsigned workers = 0;
    TuningOptions tuning{};
    HyperoptDemo hyperopt{};
    EquivalenceOptions equivalence{};
};

/// Parses JSON text. Unknown keys are rejected so typos do not pass silently.
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::filesystem::path &path);

/// Seed precedence: explicit flag, then the config file, then GPAF_SEED, then 1.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> from_config);

/// 17 significant digits, round-trippable.
std::string format_number(double v);

/// Writes a CSV file with a header row; throws IoError on failure.
void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const std::vector<std::vector<double>> &columns);

struct Fig2Result {
    Dataset train;
    Vector grid;
    Vector mean;
    Vector std_output;  // sigma_y
    Matrix samples;     // grid points x 5 posterior sample paths of the latent function
};

/// 20 noisy samples of a GP draw with k = exp(-2 |x - x'|^2), sigma_nu = 0.1,
/// inputs concentrated left of x = 1.5; posterior on a grid over [-3, 4].
Fig2Result fig2_posterior(std::uint64_t seed);
/// Writes fig2_posterior.csv and fig2_train.csv into dir.
int cmd_fig2(const std::filesystem::path &dir, std::uint64_t seed, std::ostream &log);

struct TrackOutcome {
    std::vector<std::pair<ChannelConfig, std::vector<AlgoSummary>>> summaries;
};
/// Tunes (where needed), runs replicates, writes curves/ and summary.csv.
int cmd_track(const ExperimentConfig &config, std::ostream &log, TrackOutcome *outcome = nullptr);

/// Synthetic GP data, multi-restart ML; writes hyperopt_trace.csv and hyperopt_result.csv.
int cmd_hyperopt(const ExperimentConfig &config, std::ostream &log, std::optional<HyperOptResult> *outcome = nullptr);

struct SuiteReport {
    std::string name;
    double max_error;
    double tolerance;
    bool passed;
};
/// Cross-module oracle suites and invariant checks.
std::vector<SuiteReport> run_equivalence_suites(const EquivalenceOptions &options, std::uint64_t seed);
/// Runs the suites, prints the report CSV, optionally writes it to dir.
int cmd_check(const EquivalenceOptions &options, std::uint64_t seed, const std::optional<std::filesystem::path> &dir,
              std::ostream &out);

}  // namespace gpaf::cli
