#include "gpaf/channel_sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <type_traits>

#include "gpaf/baselines.hpp"
#include "gpaf/gp_online.hpp"

namespace gpaf {

void ChannelConfig::validate() const {
    if (n_taps < 1) throw std::invalid_argument("channel needs at least one tap");
    if (!(fdT > 0.0)) throw std::invalid_argument("normalized Doppler must be > 0");
    if (n_steps < 1) throw std::invalid_argument("stream needs at least one step");
    if (n_sinusoids < 1) throw std::invalid_argument("fading generator needs at least one sinusoid");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

enum StreamId : std::uint64_t { kTaps = 101, kSource = 202, kNoise = 303 };

}  // namespace

ChannelRealization gen_fading_taps(const ChannelConfig &cfg) {
    cfg.validate();
    constexpr double pi = std::numbers::pi;
    std::mt19937_64 rng(derive_seed(cfg.seed, kTaps));
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const Index M = cfg.n_sinusoids;
    const double amplitude = std::sqrt(2.0 / static_cast<double>(M) / static_cast<double>(cfg.n_taps));
    ChannelRealization out;
    out.taps.resize(cfg.n_steps, cfg.n_taps);
    Vector omega(M), phase(M);
    for (Index j = 0; j < cfg.n_taps; ++j) {
        const double theta = -pi + 2.0 * pi * uniform(rng);
        for (Index m = 0; m < M; ++m) {
            const double angle = (2.0 * pi * static_cast<double>(m + 1) - pi + theta) / (4.0 * static_cast<double>(M));
            omega(m) = 2.0 * pi * cfg.fdT * std::cos(angle);
            phase(m) = 2.0 * pi * uniform(rng);
        }
        for (Index n = 0; n < cfg.n_steps; ++n) {
            const double tn = static_cast<double>(n);
            double g = 0.0;
            for (Index m = 0; m < M; ++m) g += std::cos(omega(m) * tn + phase(m));
            out.taps(n, j) = amplitude * g;
        }
    }
    return out;
}

Stream synthesize_stream(const ChannelConfig &cfg, const ChannelRealization &channel) {
    cfg.validate();
    if (channel.taps.rows() != cfg.n_steps || channel.taps.cols() != cfg.n_taps)
        throw std::invalid_argument("channel realization does not match the configuration");
    const Index n = cfg.n_steps;
    const Index L = cfg.n_taps;

    std::mt19937_64 source_rng(derive_seed(cfg.seed, kSource));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector s(n);
    for (Index i = 0; i < n; ++i) s(i) = normal(source_rng);

    Stream out;
    out.X = Matrix::Zero(n, L);
    out.clean.resize(n);
    for (Index i = 0; i < n; ++i) {
        double c = 0.0;
        for (Index j = 0; j < L && j <= i; ++j) {
            out.X(i, j) = s(i - j);
            c += channel.taps(i, j) * std::tanh(s(i - j));
        }
        out.clean(i) = c;
    }

    out.y = out.clean;
    if (std::isfinite(cfg.snr_db)) {
        const double mean = out.clean.mean();
        const double var = (out.clean.array() - mean).square().sum() / static_cast<double>(n);
        out.noise_sigma = std::sqrt(var / std::pow(10.0, cfg.snr_db / 10.0));
        std::mt19937_64 noise_rng(derive_seed(cfg.seed, kNoise));
        for (Index i = 0; i < n; ++i) out.y(i) += out.noise_sigma * normal(noise_rng);
    }
    return out;
}

Stream generate_stream(const ChannelConfig &cfg) {
    return synthesize_stream(cfg, gen_fading_taps(cfg));
}

const char *to_string(Algo algo) {
    switch (algo) {
        case Algo::Krlst: return "krlst";
        case Algo::Nlms: return "nlms";
        case Algo::ExRls: return "exrls";
        case Algo::Qklms: return "qklms";
    }
    return "unknown";
}

Algo algo_from_string(const std::string &name) {
    if (name == "krlst") return Algo::Krlst;
    if (name == "nlms") return Algo::Nlms;
    if (name == "exrls") return Algo::ExRls;
    if (name == "qklms") return Algo::Qklms;
    throw std::invalid_argument("unknown algorithm: " + name);
}

Algo algo_of(const AlgoParams &params) {
    return static_cast<Algo>(params.index());
}

Vector run_predictions(const Stream &stream, const AlgoParams &params) {
    const Index n = stream.X.rows();
    const Index d = stream.X.cols();
    Vector pred(n);
    std::visit(
        [&](const auto &p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, KrlstParams>) {
                OnlineGP gp(p.spec, p.budget, p.duplicate_threshold);
                for (Index i = 0; i < n; ++i) pred(i) = gp.step(stream.X.row(i).transpose(), stream.y(i), i, p.lambda).mean;
            } else if constexpr (std::is_same_v<P, NlmsParams>) {
                Nlms f(d, p.step_size, p.eps);
                for (Index i = 0; i < n; ++i) pred(i) = f.step(stream.X.row(i).transpose(), stream.y(i));
            } else if constexpr (std::is_same_v<P, ExRlsParams>) {
                ExRls f(d, p.forgetting, p.state_noise, p.initial_variance);
                for (Index i = 0; i < n; ++i) pred(i) = f.step(stream.X.row(i).transpose(), stream.y(i));
            } else {
                Qklms f(d, p.step_size, p.quant_eps, p.gamma);
                for (Index i = 0; i < n; ++i) pred(i) = f.step(stream.X.row(i).transpose(), stream.y(i));
            }
        },
        params);
    return pred;
}

std::vector<double> nmse_curve(const Vector &y, const Vector &prediction, Index window) {
    if (y.size() != prediction.size()) throw std::invalid_argument("nmse_curve: length mismatch");
    if (window < 1) throw std::invalid_argument("nmse_curve: window must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(y.size()));
    // sliding sums over the trailing window
    double err = 0.0, pow = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
        const double e = y(i) - prediction(i);
        err += e * e;
        pow += y(i) * y(i);
        if (i >= window) {
            const double eo = y(i - window) - prediction(i - window);
            err -= eo * eo;
            pow -= y(i - window) * y(i - window);
        }
        out[static_cast<std::size_t>(i)] = 10.0 * std::log10(std::max(err, 0.0) / pow);
    }
    return out;
}

LearningCurve run_tracking(const Stream &stream, const AlgoParams &params, Index window, int replicate) {
    const Vector pred = run_predictions(stream, params);
    LearningCurve curve;
    curve.nmse_db = nmse_curve(stream.y, pred, window);
    curve.step.resize(curve.nmse_db.size());
    for (std::size_t i = 0; i < curve.step.size(); ++i) curve.step[i] = static_cast<long>(i);
    curve.algo = to_string(algo_of(params));
    curve.replicate = replicate;
    return curve;
}

double steady_state_nmse(const Vector &y, const Vector &prediction, Index window) {
    const Index n = y.size();
    const Index w = std::min(window, n);
    const double err = (y.tail(w) - prediction.tail(w)).squaredNorm();
    return 10.0 * std::log10(err / y.tail(w).squaredNorm());
}

}  // namespace gpaf
