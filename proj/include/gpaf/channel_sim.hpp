#pragma once

// Nonlinear fading channel: Gaussian source -> tanh saturation -> time-varying
// FIR channel with Rayleigh-faded taps -> AWGN. Plus the harness that runs an
// adaptive filter over a stream and records its NMSE learning curve.

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "gpaf/kernels.hpp"
#include "gpaf/types.hpp"

namespace gpaf {

struct ChannelConfig {
    Index n_taps = 5;
    double fdT = 1e-4;    // normalized Doppler
    double snr_db = 30.0; // +infinity disables the noise
    Index n_steps = 10000;
    std::uint64_t seed = 1;
    Index n_sinusoids = 64;

    void validate() const;
};

/// Per-step tap gains, one row per time step.
struct ChannelRealization {
    Matrix taps;
};

struct Stream {
    Matrix X;      // row i = [s_i, s_{i-1}, ..., s_{i-L+1}], zero-padded at the start
    Vector y;      // noisy output
    Vector clean;  // noiseless output
    double noise_sigma = 0.0;
};

/// Mixes a base seed with an index into an independent 64-bit seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Each tap is an independent sum of n_sinusoids cosines whose Doppler shifts
/// fdT cos(a_m) sample the arcsine (Jakes) spectrum on stratified angles
/// a_m = (2 pi m - pi + theta) / (4 M) with random offset theta and random
/// phases. Tap variance is 1 / n_taps, autocorrelation approx J0(2 pi fdT lag).
ChannelRealization gen_fading_taps(const ChannelConfig &cfg);

Stream synthesize_stream(const ChannelConfig &cfg, const ChannelRealization &channel);

/// gen_fading_taps + synthesize_stream.
Stream generate_stream(const ChannelConfig &cfg);

enum class Algo { Krlst, Nlms, ExRls, Qklms };
const char *to_string(Algo algo);
Algo algo_from_string(const std::string &name);

struct KrlstParams {
    KernelSpec spec;
    double lambda = 1.0;
    Index budget = 100;
    double duplicate_threshold = 1e-12;
};
struct NlmsParams {
    double step_size = 0.5;
    double eps = 1e-6;
};
struct ExRlsParams {
    double forgetting = 0.999;
    double state_noise = 1e-4;
    double initial_variance = 1e4;
};
struct QklmsParams {
    double step_size = 0.5;
    double quant_eps = 1.0;
    double gamma = 0.5;
};
using AlgoParams = std::variant<KrlstParams, NlmsParams, ExRlsParams, QklmsParams>;

Algo algo_of(const AlgoParams &params);

struct LearningCurve {
    std::vector<long> step;
    std::vector<double> nmse_db;
    std::string algo;
    int replicate = 0;
};

/// One-step-ahead predictions: prediction i uses only samples before i.
Vector run_predictions(const Stream &stream, const AlgoParams &params);

/// 10 log10( sum_w e^2 / sum_w y^2 ) over a trailing window (shorter at the start).
std::vector<double> nmse_curve(const Vector &y, const Vector &prediction, Index window = 500);

LearningCurve run_tracking(const Stream &stream, const AlgoParams &params, Index window = 500, int replicate = 0);

/// NMSE over the last `window` steps, in dB.
double steady_state_nmse(const Vector &y, const Vector &prediction, Index window = 500);

}  // namespace gpaf
