#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "gpaf/channel_sim.hpp"
#include "gpaf/experiment.hpp"

using namespace gpaf;

namespace {

// Bessel J0 from its power series; accurate for the arguments used here.
double bessel_j0(double x) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 60; ++k) {
        term *= -(x * x) / (4.0 * k * k);
        sum += term;
    }
    return sum;
}

// Tap autocorrelation at `lag`, normalized by lag 0 and averaged over taps.
double tap_autocorrelation(const Matrix &taps, Index lag) {
    const Index n = taps.rows();
    double total = 0.0;
    for (Index j = 0; j < taps.cols(); ++j) {
        const auto g = taps.col(j);
        const double r0 = g.squaredNorm() / static_cast<double>(n);
        const double r = g.head(n - lag).dot(g.tail(n - lag)) / static_cast<double>(n - lag);
        total += r / r0;
    }
    return total / static_cast<double>(taps.cols());
}

double variance(const Vector &v) {
    return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("J0 series reference values") {
    CHECK(bessel_j0(0.0) == 1.0);
    CHECK(bessel_j0(2.0 * M_PI * 0.1) == doctest::Approx(0.9037).epsilon(1e-4));
    CHECK(std::abs(bessel_j0(2.404825557695773)) < 1e-12);
}

TEST_CASE("config validation") {
    ChannelConfig cfg;
    cfg.n_taps = 0;
    CHECK_THROWS_AS(gen_fading_taps(cfg), std::invalid_argument);
    cfg = {};
    cfg.fdT = 0.0;
    CHECK_THROWS_AS(gen_fading_taps(cfg), std::invalid_argument);
    cfg = {};
    cfg.n_steps = 0;
    CHECK_THROWS_AS(gen_fading_taps(cfg), std::invalid_argument);
}

TEST_CASE("tap power is normalized to one over all taps") {
    ChannelConfig cfg;
    cfg.n_steps = 200000;
    cfg.fdT = 1e-3;
    const Matrix taps = gen_fading_taps(cfg).taps;
    for (Index j = 0; j < cfg.n_taps; ++j) {
        const double v = taps.col(j).squaredNorm() / static_cast<double>(cfg.n_steps);
        CHECK(v == doctest::Approx(1.0 / cfg.n_taps).epsilon(0.2));
    }
}

TEST_CASE("slow fading matches J0 at lag 1000") {
    ChannelConfig cfg;
    cfg.n_steps = 200000;
    cfg.fdT = 1e-4;
    cfg.seed = 7;
    const Matrix taps = gen_fading_taps(cfg).taps;
    CHECK(std::abs(tap_autocorrelation(taps, 1000) - bessel_j0(2 * M_PI * 0.1)) < 0.05);
}

TEST_CASE("fast fading decorrelates at the first J0 zero") {
    ChannelConfig cfg;
    cfg.n_steps = 200000;
    cfg.fdT = 1e-3;
    cfg.seed = 7;
    const Matrix taps = gen_fading_taps(cfg).taps;
    const Index first_zero = static_cast<Index>(std::round(2.404825557695773 / (2 * M_PI * cfg.fdT)));
    CHECK(first_zero == 383);
    double worst = 0.0;
    for (Index lag = 0; lag <= first_zero; lag += 8)
        worst = std::max(worst, std::abs(tap_autocorrelation(taps, lag) - bessel_j0(2 * M_PI * cfg.fdT * lag)));
    CHECK(worst < 0.05);
    // the empirical curve crosses zero near the Bessel root
    Index crossing = 0;
    while (tap_autocorrelation(taps, crossing) > 0.0) ++crossing;
    CHECK(std::abs(static_cast<double>(crossing) - 383.0) < 40.0);
}

TEST_CASE("streams are bit-reproducible and seeds are independent") {
    ChannelConfig cfg;
    cfg.n_steps = 2000;
    cfg.seed = 42;
    const Stream a = generate_stream(cfg), b = generate_stream(cfg);
    CHECK((a.y - b.y).norm() == 0.0);
    CHECK((a.X - b.X).norm() == 0.0);
    cfg.seed = 43;
    CHECK((generate_stream(cfg).y - a.y).norm() > 0.0);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("regressors are zero-padded sliding windows") {
    ChannelConfig cfg;
    cfg.n_steps = 50;
    const Stream s = generate_stream(cfg);
    CHECK(s.X(0, 1) == 0.0);
    CHECK(s.X(2, 3) == 0.0);
    for (Index i = 5; i < 50; ++i)
        for (Index j = 1; j < cfg.n_taps; ++j) CHECK(s.X(i, j) == s.X(i - j, 0));
}

TEST_CASE("infinite SNR disables the noise") {
    ChannelConfig cfg;
    cfg.n_steps = 1000;
    cfg.snr_db = std::numeric_limits<double>::infinity();
    const Stream s = generate_stream(cfg);
    CHECK((s.y - s.clean).norm() == 0.0);
}

TEST_CASE("a single unit tap is the memoryless nonlinearity") {
    ChannelConfig cfg;
    cfg.n_steps = 1000;
    ChannelRealization ch;
    ch.taps = Matrix::Zero(cfg.n_steps, cfg.n_taps);
    ch.taps.col(0).setOnes();
    const Stream s = synthesize_stream(cfg, ch);
    for (Index i = 0; i < cfg.n_steps; ++i) CHECK(s.clean(i) == std::tanh(s.X(i, 0)));
    CHECK(s.noise_sigma > 0.0);
    ChannelRealization wrong;
    wrong.taps = Matrix::Zero(10, cfg.n_taps);
    CHECK_THROWS_AS(synthesize_stream(cfg, wrong), std::invalid_argument);
}

TEST_CASE("measured SNR matches the configuration") {
    for (double snr : {10.0, 30.0}) {
        ChannelConfig cfg;
        cfg.snr_db = snr;
        cfg.n_steps = 10000;
        const Stream s = generate_stream(cfg);
        const double measured = 10 * std::log10(variance(s.clean) / variance(s.y - s.clean));
        CHECK(std::abs(measured - snr) < 0.2);
    }
}

TEST_CASE("NMSE of the zero predictor is 0 dB") {
    ChannelConfig cfg;
    cfg.n_steps = 3000;
    const Stream s = generate_stream(cfg);
    const Vector zero = Vector::Zero(s.y.size());
    CHECK(std::abs(steady_state_nmse(s.y, zero)) < 1e-12);
    for (double v : nmse_curve(s.y, zero, 500)) CHECK(std::abs(v) < 1e-9);
    CHECK_THROWS_AS(nmse_curve(s.y, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("NMSE curve matches a direct windowed computation") {
    std::mt19937_64 rng(61);
    std::normal_distribution<double> n(0, 1);
    Vector y(800), p(800);
    for (Index i = 0; i < 800; ++i) {
        y(i) = n(rng);
        p(i) = y(i) + 0.1 * n(rng);
    }
    const auto curve = nmse_curve(y, p, 100);
    for (Index i : {0, 50, 99, 100, 500, 799}) {
        const Index start = std::max<Index>(0, i - 99);
        const Index len = i - start + 1;
        const double direct = 10 * std::log10((y.segment(start, len) - p.segment(start, len)).squaredNorm() /
                                              y.segment(start, len).squaredNorm());
        CHECK(curve[static_cast<std::size_t>(i)] == doctest::Approx(direct).epsilon(1e-9));
    }
    CHECK(steady_state_nmse(y, p, 100) == doctest::Approx(curve.back()).epsilon(1e-9));
}

TEST_CASE("algorithm names round-trip") {
    for (Algo a : {Algo::Krlst, Algo::Nlms, Algo::ExRls, Algo::Qklms}) CHECK(algo_from_string(to_string(a)) == a);
    CHECK_THROWS_AS(algo_from_string("lms"), std::invalid_argument);
}

TEST_CASE("run_tracking labels its curve") {
    ChannelConfig cfg;
    cfg.n_steps = 1000;
    const Stream s = generate_stream(cfg);
    const LearningCurve c = run_tracking(s, NlmsParams{0.5, 1e-6}, 200, 3);
    CHECK(c.algo == "nlms");
    CHECK(c.replicate == 3);
    CHECK(c.step.size() == c.nmse_db.size());
    CHECK(c.nmse_db.size() == 1000);
    for (double v : c.nmse_db) CHECK(std::isfinite(v));
}

TEST_CASE("replicates are deterministic and independent of the worker count") {
    ChannelConfig cfg;
    cfg.n_steps = 1500;
    const std::vector<AlgoParams> algos{NlmsParams{0.5, 1e-6}, QklmsParams{0.5, 1.0, 0.5}};
    const auto a = run_replicates(cfg, algos, 3, 500, 1);
    const auto b = run_replicates(cfg, algos, 3, 500, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].replicate == b[i].replicate);
        CHECK(a[i].steady_state_db == b[i].steady_state_db);
    }
    CHECK_THROWS_AS(run_replicates(cfg, algos, 0), std::invalid_argument);
}
