#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <system_error>

#include "gpaf/cli.hpp"
#include "gpaf/linalg.hpp"

namespace gpaf::cli {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const fs::path &dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

std::vector<double> to_std(const Vector &v) { return {v.data(), v.data() + v.size()}; }

std::string scenario_label(const ChannelConfig &c) {
    std::string s = format_number(c.fdT);
    std::replace(s.begin(), s.end(), '.', 'p');
    return "fdT" + s;
}

// Spatial kernel of the demo: exp(-2 |x - x'|^2), noise std 0.1.
const KernelSpec &fig2_kernel() {
    static const KernelSpec spec = KernelSpec::rbf(1, 1.0, 2.0, 0.01);
    return spec;
}

}  // namespace

Fig2Result fig2_posterior(std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 0xf162));
    std::normal_distribution<double> normal(0.0, 1.0);
    const KernelSpec &spec = fig2_kernel();

    // inputs cluster around -1 and stay left of 1.5, so the right end of the
    // grid is far from every sample
    constexpr Index n = 20;
    Vector xs(n);
    for (Index i = 0; i < n; ++i) {
        double x;
        do x = -1.0 + 0.8 * normal(rng);
        while (x < -3.0 || x > 1.5);
        xs(i) = x;
    }
    std::sort(xs.data(), xs.data() + n);

    Fig2Result out;
    out.train.X = xs;
    // latent draw from the prior at the inputs, then noise
    const CholeskyFactor prior = CholeskyFactor::compute(signal_gram(spec, out.train.X));
    Vector z(n), e(n);
    for (Index i = 0; i < n; ++i) z(i) = normal(rng);
    for (Index i = 0; i < n; ++i) e(i) = normal(rng);
    out.train.y = prior.lower * z + 0.1 * e;

    const BatchGP gp = BatchGP::fit(out.train, spec);
    constexpr Index m = 141;
    out.grid = Vector::LinSpaced(m, -3.0, 4.0);
    out.mean.resize(m);
    out.std_output.resize(m);
    for (Index i = 0; i < m; ++i) {
        const PredictiveDistribution p = gp.predict(out.grid.segment(i, 1));
        out.mean(i) = p.mean;
        out.std_output(i) = std::sqrt(p.var_output);
    }

    // joint latent posterior on the grid: K** - K*n C^{-1} Kn*
    const Matrix G = out.grid;
    Matrix cross(m, n);
    for (Index i = 0; i < m; ++i) cross.row(i) = cross_cov(spec, out.train.X, G.row(i).transpose()).transpose();
    const Matrix v = gp.chol().triangularView<Eigen::Lower>().solve(cross.transpose());
    const Matrix post = signal_gram(spec, G) - v.transpose() * v;
    const CholeskyFactor post_chol = CholeskyFactor::compute(post);
    out.samples.resize(m, 5);
    for (Index s = 0; s < 5; ++s) {
        Vector w(m);
        for (Index i = 0; i < m; ++i) w(i) = normal(rng);
        out.samples.col(s) = out.mean + post_chol.lower * w;
    }
    return out;
}

int cmd_fig2(const fs::path &dir, std::uint64_t seed, std::ostream &log) {
    const Fig2Result r = fig2_posterior(seed);
    ensure_dir(dir);
    const Vector lower = r.mean - 2.0 * r.std_output;
    const Vector upper = r.mean + 2.0 * r.std_output;
    std::vector<std::string> header{"x", "mean", "lower", "upper"};
    std::vector<std::vector<double>> cols{to_std(r.grid), to_std(r.mean), to_std(lower), to_std(upper)};
    for (Index s = 0; s < r.samples.cols(); ++s) {
        header.push_back("sample_" + std::to_string(s + 1));
        cols.push_back(to_std(r.samples.col(s)));
    }
    write_csv(dir / "fig2_posterior.csv", header, cols);
    write_csv(dir / "fig2_train.csv", {"x", "y"}, {to_std(r.train.X.col(0)), to_std(r.train.y)});
    log << "wrote " << (dir / "fig2_posterior.csv").string() << " and " << (dir / "fig2_train.csv").string() << '\n';
    return kOk;
}

int cmd_track(const ExperimentConfig &config, std::ostream &log, TrackOutcome *outcome) {
    const std::uint64_t seed = config.seed.value_or(1);
    ensure_dir(config.output_dir);
    ensure_dir(config.output_dir / "curves");

    std::vector<double> s_fd, s_algo, s_mean, s_std, s_reps;
    std::ofstream params_out(config.output_dir / "params.txt");
    if (!params_out) throw IoError("cannot write " + (config.output_dir / "params.txt").string());

    for (ChannelConfig scenario : config.channels) {
        scenario.seed = seed;
        const std::string label = scenario_label(scenario);
        std::vector<AlgoParams> algos;
        for (const AlgoEntry &entry : config.algos) {
            const AlgoParams p = entry.fixed ? *entry.fixed : tune_algo(entry.algo, scenario, config.tuning);
            algos.push_back(p);
            params_out << label << ' ' << to_string(entry.algo) << ':';
            std::visit(
                [&](const auto &q) {
                    using P = std::decay_t<decltype(q)>;
                    if constexpr (std::is_same_v<P, KrlstParams>) {
                        params_out << " lambda=" << format_number(q.lambda) << " budget=" << q.budget
                                   << " log_params=";
                        const Vector th = q.spec.packed();
                        for (Index i = 0; i < th.size(); ++i) params_out << (i ? "," : "") << format_number(th(i));
                    } else if constexpr (std::is_same_v<P, NlmsParams>) {
                        params_out << " step_size=" << format_number(q.step_size);
                    } else if constexpr (std::is_same_v<P, ExRlsParams>) {
                        params_out << " forgetting=" << format_number(q.forgetting)
                                   << " state_noise=" << format_number(q.state_noise);
                    } else {
                        params_out << " step_size=" << format_number(q.step_size)
                                   << " quant_eps=" << format_number(q.quant_eps) << " gamma=" << format_number(q.gamma);
                    }
                },
                p);
            params_out << '\n';
        }
        log << label << ": running " << config.replicates << " replicates x " << algos.size() << " algorithms\n";
        const auto results =
            run_replicates(scenario, algos, config.replicates, config.tuning.window, config.workers);
        for (const ReplicateResult &r : results) {
            const fs::path path = config.output_dir / "curves" /
                                  (label + "_" + to_string(r.algo) + "_r" + std::to_string(r.replicate) + ".csv");
            std::vector<double> steps(r.curve.step.begin(), r.curve.step.end());
            write_csv(path, {"step", "nmse_db"}, {steps, r.curve.nmse_db});
        }
        const auto summary = summarize(results);
        for (const AlgoSummary &s : summary) {
            log << "  " << to_string(s.algo) << ": " << s.mean_db << " dB (std " << s.std_db << ")\n";
            s_fd.push_back(scenario.fdT);
            s_algo.push_back(static_cast<double>(s.algo));
            s_mean.push_back(s.mean_db);
            s_std.push_back(s.std_db);
            s_reps.push_back(s.replicates);
        }
        if (outcome) outcome->summaries.emplace_back(scenario, summary);
    }

    // algorithm names are text, so this file is written by hand
    std::ofstream out(config.output_dir / "summary.csv");
    if (!out) throw IoError("cannot write " + (config.output_dir / "summary.csv").string());
    out << "fdT,algo,mean_nmse_db,std_nmse_db,replicates\n";
    for (std::size_t i = 0; i < s_fd.size(); ++i)
        out << format_number(s_fd[i]) << ',' << to_string(static_cast<Algo>(static_cast<int>(s_algo[i]))) << ','
            << format_number(s_mean[i]) << ',' << format_number(s_std[i]) << ',' << s_reps[i] << '\n';
    if (!out) throw IoError("write failed for summary.csv");
    return kOk;
}

int cmd_hyperopt(const ExperimentConfig &config, std::ostream &log, std::optional<HyperOptResult> *outcome) {
    const HyperoptDemo &demo = config.hyperopt;
    const std::uint64_t seed = config.seed.value_or(1);
    std::mt19937_64 rng(derive_seed(seed, 0x4e70));
    std::normal_distribution<double> normal(0.0, 1.0);

    const KernelSpec truth =
        KernelSpec::rbf(demo.dim, demo.alpha1, demo.gamma, demo.noise_std * demo.noise_std);
    Dataset data;
    data.X.resize(demo.n, demo.dim);
    for (Index i = 0; i < demo.n; ++i)
        for (Index l = 0; l < demo.dim; ++l) data.X(i, l) = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    const CholeskyFactor prior = CholeskyFactor::compute(signal_gram(truth, data.X));
    Vector z(demo.n), e(demo.n);
    for (Index i = 0; i < demo.n; ++i) z(i) = normal(rng);
    for (Index i = 0; i < demo.n; ++i) e(i) = normal(rng);
    data.y = prior.lower * z + demo.noise_std * e;

    HyperOptOptions options = demo.options;
    options.seed = seed;
    const KernelSpec spec0 = KernelSpec::rbf(demo.dim, 1.0, 1.0, 1.0);
    const HyperOptResult result = optimize_hyperparams(data, spec0, options);

    ensure_dir(config.output_dir);
    const auto names = spec0.param_names();
    {
        std::ofstream out(config.output_dir / "hyperopt_trace.csv");
        if (!out) throw IoError("cannot write hyperopt_trace.csv");
        out << "restart,iter,lml";
        for (const auto &n : names) out << ',' << n;
        out << '\n';
        for (std::size_t r = 0; r < result.restarts.size(); ++r) {
            const RestartTrace &t = result.restarts[r];
            for (std::size_t it = 0; it < t.params.size(); ++it) {
                out << r << ',' << it << ',' << format_number(t.lml[it]);
                for (Index j = 0; j < t.params[it].size(); ++j) out << ',' << format_number(t.params[it](j));
                out << '\n';
            }
        }
    }
    {
        std::ofstream out(config.output_dir / "hyperopt_result.csv");
        if (!out) throw IoError("cannot write hyperopt_result.csv");
        out << "restart,initial_lml,final_lml,converged,failed\n";
        for (std::size_t r = 0; r < result.restarts.size(); ++r) {
            const RestartTrace &t = result.restarts[r];
            const double first = t.lml.empty() ? std::nan("") : t.lml.front();
            const double last = t.lml.empty() ? std::nan("") : t.lml.back();
            out << r << ',' << format_number(first) << ',' << format_number(last) << ',' << t.converged << ','
                << t.failed << '\n';
        }
        out << "# best lml " << format_number(result.lml) << " true log_alpha3 "
            << format_number(truth.params().log_alpha3) << " fitted " << format_number(result.spec.params().log_alpha3)
            << '\n';
    }
    log << "restarts: " << result.restarts.size() << ", best log marginal likelihood " << result.lml
        << ", fitted noise std " << std::sqrt(result.spec.noise_var()) << " (true " << demo.noise_std << ")\n";
    if (outcome) *outcome = result;
    return kOk;
}

int cmd_check(const EquivalenceOptions &options, std::uint64_t seed, const std::optional<fs::path> &dir,
              std::ostream &out) {
    const auto reports = run_equivalence_suites(options, seed);
    bool ok = true;
    std::vector<std::string> lines;
    lines.push_back("suite,max_error,tolerance,passed");
    for (const SuiteReport &r : reports) {
        ok = ok && r.passed;
        lines.push_back(r.name + ',' + format_number(r.max_error) + ',' + format_number(r.tolerance) + ',' +
                        (r.passed ? "1" : "0"));
    }
    for (const auto &l : lines) out << l << '\n';
    if (dir) {
        ensure_dir(*dir);
        std::ofstream f(*dir / "check_report.csv");
        if (!f) throw IoError("cannot write check_report.csv");
        for (const auto &l : lines) f << l << '\n';
    }
    return ok ? kOk : kOracleFailure;
}

}  // namespace gpaf::cli
