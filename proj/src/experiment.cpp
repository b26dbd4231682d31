#include "gpaf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "gpaf/gp_online.hpp"

namespace gpaf {

namespace {

constexpr std::uint64_t kHoldoutSalt = 1'000'001;
constexpr std::uint64_t kTuneSalt = 1'000'002;

// Mean squared one-step error over the second half of the stream.
double tail_mse(const Stream &s, const AlgoParams &params) {
    const Vector pred = run_predictions(s, params);
    const Index n = s.y.size();
    const Index h = n / 2;
    return (s.y.tail(n - h) - pred.tail(n - h)).squaredNorm() / static_cast<double>(n - h);
}

Index quantized_size(const Matrix &X, double eps) {
    std::vector<Vector> centers;
    for (Index i = 0; i < X.rows(); ++i) {
        const Vector x = X.row(i).transpose();
        bool covered = false;
        for (const auto &c : centers)
            if ((c - x).norm() <= eps) {
                covered = true;
                break;
            }
        if (!covered) centers.push_back(x);
    }
    return static_cast<Index>(centers.size());
}

}  // namespace

ChannelConfig holdout_config(const ChannelConfig &scenario, Index n_steps, std::uint64_t salt) {
    ChannelConfig cfg = scenario;
    cfg.n_steps = n_steps;
    cfg.seed = derive_seed(scenario.seed, salt);
    return cfg;
}

double krlst_predictive_loglik(const Stream &stream, const KrlstParams &params) {
    OnlineGP gp(params.spec, params.budget, params.duplicate_threshold);
    double total = 0.0;
    for (Index i = 0; i < stream.X.rows(); ++i) {
        const PredictiveDistribution p = gp.step(stream.X.row(i).transpose(), stream.y(i), i, params.lambda);
        const double e = stream.y(i) - p.mean;
        total += -0.5 * (std::log(2.0 * std::numbers::pi * p.var_output) + e * e / p.var_output);
    }
    return total;
}

KrlstParams tune_krlst(const ChannelConfig &scenario, const TuningOptions &opt) {
    const Stream holdout = generate_stream(holdout_config(scenario, opt.holdout_steps, kHoldoutSalt));
    Dataset data{holdout.X, holdout.y, {}};
    const double var_y = holdout.y.squaredNorm() / static_cast<double>(holdout.y.size());
    const KernelSpec spec0 =
        KernelSpec::rbf(holdout.X.cols(), var_y, 0.1, 0.01 * var_y).with_shared_length_scale(opt.shared_length_scale);
    HyperOptOptions hopt;
    hopt.restarts = opt.hyperopt_restarts;
    hopt.seed = scenario.seed;
    const HyperOptResult fitted = optimize_hyperparams(data, spec0, hopt);

    // The static fit absorbs channel drift into the noise term, so the noise
    // level and lambda are chosen jointly by the sequential evidence of the
    // tracker itself on a separate stream. Coordinates: (log a3, log10(1 - lambda)).
    const KernelSpec spatial = fitted.spec;
    const Stream tune = generate_stream(holdout_config(scenario, opt.evidence_steps, kTuneSalt));
    auto make = [&](double log_noise, double u) {
        return KrlstParams{spatial.with_noise_var(std::exp(log_noise)), 1.0 - std::pow(10.0, u), opt.budget};
    };
    auto score = [&](double log_noise, double u) {
        const double v = krlst_predictive_loglik(tune, make(log_noise, u));
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    };
    double best_n = 0.0, best_u = 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (double n : {-10.0, -8.0, -6.0, -4.0})
        for (double u : {-4.5, -3.5, -2.5, -1.5}) {
            const double s = score(n, u);
            if (s > best) {
                best = s;
                best_n = n;
                best_u = u;
            }
        }
    // compass search around the best grid cell
    double step = 1.0;
    while (step >= 0.125) {
        bool moved = false;
        const double dirs[4][2] = {{1, 0}, {-1, 0}, {0, 0.5}, {0, -0.5}};
        for (const auto &d : dirs) {
            const double n = best_n + step * d[0];
            const double u = std::min(best_u + step * d[1], -0.5);
            const double s = score(n, u);
            if (s > best) {
                best = s;
                best_n = n;
                best_u = u;
                moved = true;
                break;
            }
        }
        if (!moved) step *= 0.5;
    }
    return make(best_n, best_u);
}

NlmsParams tune_nlms(const Stream &tune, const TuningOptions &opt) {
    NlmsParams best{};
    double best_mse = std::numeric_limits<double>::infinity();
    for (double mu : opt.nlms_steps) {
        const NlmsParams p{mu, 1e-6};
        const double mse = tail_mse(tune, p);
        if (mse < best_mse) {
            best_mse = mse;
            best = p;
        }
    }
    return best;
}

ExRlsParams tune_exrls(const Stream &tune, const TuningOptions &opt) {
    ExRlsParams best{};
    double best_mse = std::numeric_limits<double>::infinity();
    for (double beta : opt.exrls_forgetting)
        for (double q : opt.exrls_state_noise) {
            const ExRlsParams p{beta, q, 1e4};
            const double mse = tail_mse(tune, p);
            if (mse < best_mse) {
                best_mse = mse;
                best = p;
            }
        }
    return best;
}

QklmsParams tune_qklms(const Stream &tune, const TuningOptions &opt) {
    // dictionary size is monotone non-increasing in the quantization size
    double lo = 0.0, hi = 1.0;
    while (quantized_size(tune.X, hi) > opt.budget) hi *= 2.0;
    for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (quantized_size(tune.X, mid) > opt.budget)
            lo = mid;
        else
            hi = mid;
    }
    QklmsParams best{};
    double best_mse = std::numeric_limits<double>::infinity();
    for (double mu : opt.qklms_steps)
        for (double g : opt.qklms_gammas) {
            const QklmsParams p{mu, hi, g};
            const double mse = tail_mse(tune, p);
            if (mse < best_mse) {
                best_mse = mse;
                best = p;
            }
        }
    return best;
}

AlgoParams tune_algo(Algo algo, const ChannelConfig &scenario, const TuningOptions &opt) {
    if (algo == Algo::Krlst) return tune_krlst(scenario, opt);
    const Stream tune = generate_stream(holdout_config(scenario, opt.tune_steps, kTuneSalt));
    switch (algo) {
        case Algo::Nlms: return tune_nlms(tune, opt);
        case Algo::ExRls: return tune_exrls(tune, opt);
        case Algo::Qklms: return tune_qklms(tune, opt);
        default: break;
    }
    throw std::invalid_argument("unknown algorithm");
}

std::vector<ReplicateResult> run_replicates(const ChannelConfig &scenario, const std::vector<AlgoParams> &algos,
                                            int replicates, Index window, unsigned workers) {
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    const std::size_t total = algos.size() * static_cast<std::size_t>(replicates);
    std::vector<ReplicateResult> results(total);
    std::vector<std::exception_ptr> errors(total);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t task = next++; task < total; task = next++) {
            const std::size_t a = task / static_cast<std::size_t>(replicates);
            const int r = static_cast<int>(task % static_cast<std::size_t>(replicates));
            try {
                ChannelConfig cfg = scenario;
                cfg.seed = derive_seed(scenario.seed, static_cast<std::uint64_t>(r));
                const Stream stream = generate_stream(cfg);
                const Vector pred = run_predictions(stream, algos[a]);
                ReplicateResult &out = results[task];
                out.replicate = r;
                out.algo = algo_of(algos[a]);
                out.curve.nmse_db = nmse_curve(stream.y, pred, window);
                out.curve.step.resize(out.curve.nmse_db.size());
                for (std::size_t i = 0; i < out.curve.step.size(); ++i) out.curve.step[i] = static_cast<long>(i);
                out.curve.algo = to_string(out.algo);
                out.curve.replicate = r;
                out.steady_state_db = steady_state_nmse(stream.y, pred, window);
                if (!std::isfinite(out.steady_state_db)) throw IllConditionedError("non-finite steady-state NMSE");
            } catch (const IllConditionedError &e) {
                errors[task] = std::make_exception_ptr(IllConditionedError(
                    std::string(to_string(algo_of(algos[a]))) + " replicate " + std::to_string(r) + ": " + e.what()));
            } catch (...) {
                errors[task] = std::current_exception();
            }
        }
    };

    unsigned n_workers = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
    n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, total));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto &t : pool) t.join();
    for (const auto &e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

std::vector<AlgoSummary> summarize(const std::vector<ReplicateResult> &results) {
    std::vector<AlgoSummary> out;
    for (Algo algo : {Algo::Krlst, Algo::Nlms, Algo::ExRls, Algo::Qklms}) {
        std::vector<double> v;
        for (const auto &r : results)
            if (r.algo == algo) v.push_back(r.steady_state_db);
        if (v.empty()) continue;
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        out.push_back({algo, mean, sd, static_cast<int>(v.size())});
    }
    return out;
}

}  // namespace gpaf
