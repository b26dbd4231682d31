#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gpaf/cli.hpp"

using namespace gpaf;
using namespace gpaf::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("gpaf_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::string &text) {
    std::vector<std::string> out;
    std::stringstream s(text);
    for (std::string line; std::getline(s, line);) out.push_back(line);
    return out;
}

ExperimentConfig small_track_config(const fs::path &dir) {
    ExperimentConfig cfg = parse_config(R"({
        "scenario": "tracking_sim",
        "seed": 5,
        "replicates": 2,
        "channel": {"fdT": 0.001, "n_steps": 800},
        "algos": [
            {"name": "krlst", "lambda": 0.995, "alpha1": 0.2, "gamma": 0.1, "noise_var": 0.001, "dim": 5, "budget": 30},
            {"name": "nlms", "step_size": 0.3}
        ],
        "tuning": {"window": 200}
    })");
    cfg.output_dir = dir;
    return cfg;
}

}  // namespace

TEST_CASE("numbers carry 17 significant digits and round-trip") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(-2.5e-300) == "-2.5e-300");
    for (double v : {M_PI, 1.0 / 3.0, -7.123456789012345e10}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("write_csv emits a header row and rejects ragged columns") {
    const fs::path dir = scratch("csv");
    fs::create_directories(dir);
    write_csv(dir / "a.csv", {"x", "y"}, {{1.0, 2.0}, {0.5, 0.25}});
    CHECK(slurp(dir / "a.csv") == "x,y\n1,0.5\n2,0.25\n");
    CHECK_THROWS_AS(write_csv(dir / "b.csv", {"x", "y"}, {{1.0}, {1.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(write_csv(dir / "missing" / "c.csv", {"x"}, {{1.0}}), IoError);
    fs::remove_all(dir);
}

TEST_CASE("config parsing fills defaults and reads every section") {
    const ExperimentConfig d = parse_config("{}");
    CHECK(d.scenario == "tracking_sim");
    CHECK(d.replicates == 10);
    CHECK(d.algos.size() == 4);
    CHECK_FALSE(d.seed.has_value());

    const ExperimentConfig c = parse_config(R"({
        // comments are allowed
        "scenario": "tracking_sim", "seed": 2013, "replicates": 3, "output_dir": "runs/a", "workers": 2,
        "channels": [{"fdT": 1e-4, "snr_db": "inf", "n_steps": 1000}, {"fdT": 1e-3, "n_taps": 3}],
        "algos": ["nlms", {"name": "exrls", "forgetting": 0.99, "state_noise": 1e-4}, {"name": "qklms"}],
        "tuning": {"budget": 50, "evidence_steps": 2000},
        "hyperopt": {"n": 50, "restarts": 4},
        "equivalence": {"streams": 7, "inject_fault": true}
    })");
    CHECK(*c.seed == 2013);
    CHECK(c.output_dir == fs::path("runs/a"));
    REQUIRE(c.channels.size() == 2);
    CHECK(std::isinf(c.channels[0].snr_db));
    CHECK(c.channels[1].n_taps == 3);
    REQUIRE(c.algos.size() == 3);
    CHECK_FALSE(c.algos[0].fixed.has_value());
    REQUIRE(c.algos[1].fixed.has_value());
    CHECK(std::get<ExRlsParams>(*c.algos[1].fixed).forgetting == 0.99);
    CHECK_FALSE(c.algos[2].fixed.has_value());
    CHECK(c.tuning.budget == 50);
    CHECK(c.tuning.evidence_steps == 2000);
    CHECK(c.hyperopt.options.restarts == 4);
    CHECK(c.equivalence.streams == 7);
    CHECK(c.equivalence.inject_fault);
}

TEST_CASE("malformed configs are rejected as I/O errors") {
    CHECK_THROWS_AS(parse_config("{"), IoError);
    CHECK_THROWS_AS(parse_config(R"({"replicate": 3})"), IoError);
    CHECK_THROWS_AS(parse_config(R"({"replicates": 0})"), IoError);
    CHECK_THROWS_AS(parse_config(R"({"scenario": "other"})"), IoError);
    CHECK_THROWS_AS(parse_config(R"({"channel": {"fdT": -1}})"), IoError);
    CHECK_THROWS_AS(parse_config(R"({"algos": ["rls"]})"), IoError);
    CHECK_THROWS_AS(parse_config(R"({"algos": [{"name": "qklms", "step_size": 0.5}]})"), IoError);
    CHECK_THROWS_AS(parse_config(R"({"seed": "x"})"), IoError);
    CHECK_THROWS_AS(load_config("/nonexistent/gpaf.json"), IoError);
}

TEST_CASE("seed precedence: flag, config, environment, default") {
    ::unsetenv("GPAF_SEED");
    CHECK(resolve_seed(std::nullopt, std::nullopt) == 1);
    ::setenv("GPAF_SEED", "77", 1);
    CHECK(resolve_seed(std::nullopt, std::nullopt) == 77);
    CHECK(resolve_seed(std::nullopt, 9) == 9);
    CHECK(resolve_seed(3, 9) == 3);
    ::setenv("GPAF_SEED", "abc", 1);
    CHECK_THROWS_AS(resolve_seed(std::nullopt, std::nullopt), IoError);
    ::unsetenv("GPAF_SEED");
}

TEST_CASE("fig2: prior regime on the right, tight error bars where data is dense") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const Fig2Result r = fig2_posterior(seed);
        REQUIRE(r.train.size() == 20);
        CHECK(r.train.X.maxCoeff() <= 1.5);
        CHECK(r.grid.size() == 141);
        CHECK(r.grid(0) == -3.0);
        CHECK(r.grid(140) == doctest::Approx(4.0));
        const double prior_sd = std::sqrt(1.01);
        for (Index i = 0; i < r.grid.size(); ++i) {
            if (r.grid(i) > 3.0) {
                CHECK(std::abs(r.mean(i)) < 0.05);
                CHECK(r.std_output(i) >= 0.95 * prior_sd);
                CHECK(r.std_output(i) <= 1.05 * prior_sd);
            }
        }
        // the grid point with the most training inputs within 0.25
        Index best = 0, best_count = -1;
        for (Index i = 0; i < r.grid.size(); ++i) {
            Index count = 0;
            for (Index j = 0; j < 20; ++j) count += std::abs(r.train.X(j, 0) - r.grid(i)) < 0.25 ? 1 : 0;
            if (count > best_count) best = i, best_count = count;
        }
        CHECK(best_count >= 4);
        CHECK(std::abs(r.std_output(best) - 0.1) <= 0.25 * 0.1);
    }
}

TEST_CASE("fig2 writes the documented columns") {
    const fs::path dir = scratch("fig2");
    std::ostringstream log;
    CHECK(cmd_fig2(dir, 11, log) == kOk);
    const auto rows = lines_of(slurp(dir / "fig2_posterior.csv"));
    REQUIRE(rows.size() == 142);
    CHECK(rows[0] == "x,mean,lower,upper,sample_1,sample_2,sample_3,sample_4,sample_5");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        std::stringstream s(rows[i]);
        std::vector<double> v;
        for (std::string cell; std::getline(s, cell, ',');) v.push_back(std::stod(cell));
        REQUIRE(v.size() == 9);
        CHECK(v[2] <= v[1]);
        CHECK(v[1] <= v[3]);
    }
    const auto train = lines_of(slurp(dir / "fig2_train.csv"));
    CHECK(train.size() == 21);
    CHECK(train[0] == "x,y");
    // same seed, same bytes
    const std::string first = slurp(dir / "fig2_posterior.csv");
    CHECK(cmd_fig2(dir, 11, log) == kOk);
    CHECK(slurp(dir / "fig2_posterior.csv") == first);
    fs::remove_all(dir);
}

TEST_CASE("fig2 output into an unwritable location is an I/O error") {
    const fs::path file = scratch("blocker");
    std::ofstream(file) << "x";
    std::ostringstream log;
    CHECK_THROWS_AS(cmd_fig2(file / "sub", 1, log), IoError);
    fs::remove(file);
}

TEST_CASE("track writes curves and a summary, byte-identical for the same seed") {
    const fs::path a = scratch("track_a"), b = scratch("track_b");
    std::ostringstream log;
    TrackOutcome outcome;
    CHECK(cmd_track(small_track_config(a), log, &outcome) == kOk);
    CHECK(cmd_track(small_track_config(b), log) == kOk);
    for (const char *name : {"curves/fdT0p001_krlst_r0.csv", "curves/fdT0p001_nlms_r1.csv", "summary.csv"})
        CHECK(slurp(a / name) == slurp(b / name));
    const auto summary = lines_of(slurp(a / "summary.csv"));
    REQUIRE(summary.size() == 3);
    CHECK(summary[0] == "fdT,algo,mean_nmse_db,std_nmse_db,replicates");
    CHECK(summary[1].rfind("0.001,krlst,", 0) == 0);
    const auto curve = lines_of(slurp(a / "curves/fdT0p001_nlms_r0.csv"));
    CHECK(curve.size() == 801);
    CHECK(curve[0] == "step,nmse_db");
    REQUIRE(outcome.summaries.size() == 1);
    CHECK(outcome.summaries[0].second.size() == 2);
    CHECK(std::isfinite(outcome.summaries[0].second[0].mean_db));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("hyperopt recovers the noise level and never decreases the evidence") {
    ExperimentConfig cfg = parse_config(R"({"scenario": "hyperopt_demo", "seed": 4, "hyperopt": {"n": 150, "restarts": 3}})");
    cfg.output_dir = scratch("hyperopt");
    std::ostringstream log;
    std::optional<HyperOptResult> out;
    CHECK(cmd_hyperopt(cfg, log, &out) == kOk);
    REQUIRE(out.has_value());
    const HyperOptResult &result = *out;
    CHECK(result.restarts.size() == 3);
    for (const RestartTrace &t : result.restarts)
        if (!t.failed) CHECK(t.lml.back() >= t.lml.front());
    CHECK(std::abs(result.spec.params().log_alpha3 - std::log(0.01)) < 0.5);
    const auto trace = lines_of(slurp(cfg.output_dir / "hyperopt_trace.csv"));
    CHECK(trace[0] == "restart,iter,lml,log_alpha1,log_gamma1,log_alpha3");
    const auto res = lines_of(slurp(cfg.output_dir / "hyperopt_result.csv"));
    CHECK(res.size() == 5);  // header, 3 restarts, trailing comment
    fs::remove_all(cfg.output_dir);
}

TEST_CASE("check passes on defaults and flags the forgetting suite under an injected fault") {
    std::ostringstream out;
    CHECK(cmd_check({}, 1, std::nullopt, out) == kOk);
    const auto clean = lines_of(out.str());
    CHECK(clean[0] == "suite,max_error,tolerance,passed");
    CHECK(clean.size() == 10);

    EquivalenceOptions faulty;
    faulty.inject_fault = true;
    const auto reports = run_equivalence_suites(faulty, 1);
    for (const SuiteReport &r : reports) CHECK(r.passed == (r.name != "forgetting_vs_spatiotemporal"));
    std::ostringstream out2;
    const fs::path dir = scratch("check");
    CHECK(cmd_check(faulty, 1, dir, out2) == kOracleFailure);
    CHECK(slurp(dir / "check_report.csv") == out2.str());
    fs::remove_all(dir);
}
