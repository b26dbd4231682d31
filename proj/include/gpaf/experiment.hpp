#pragma once

// Tracking experiment driver: tunes every algorithm on held-out streams, then
// runs independent replicates and summarizes steady-state NMSE.

#include <cstdint>
#include <map>
#include <vector>

#include "gpaf/channel_sim.hpp"
#include "gpaf/gp_batch.hpp"

namespace gpaf {

struct TuningOptions {
    Index holdout_steps = 500;     // samples for Type-II ML of the KRLS-T kernel
    Index tune_steps = 10000;      // held-out stream for the baseline grids
    Index evidence_steps = 5000;   // held-out stream for the KRLS-T noise level and lambda
    Index budget = 100;
    Index window = 500;
    int hyperopt_restarts = 3;
    bool shared_length_scale = true;  // one RBF width for all regressor taps
    std::vector<double> nlms_steps{0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};
    std::vector<double> exrls_forgetting{0.99, 0.995, 0.998, 0.999, 0.9995, 1.0};
    std::vector<double> exrls_state_noise{0.0, 1e-6, 1e-5, 1e-4, 1e-3};
    std::vector<double> qklms_steps{0.1, 0.2, 0.3, 0.5, 0.8};
    std::vector<double> qklms_gammas{0.05, 0.1, 0.2, 0.5, 1.0};
};

/// Held-out streams share the scenario but draw from seeds disjoint from the replicates.
ChannelConfig holdout_config(const ChannelConfig &scenario, Index n_steps, std::uint64_t salt);

/// Spatial kernel by Type-II ML on a short held-out stream; noise level and
/// lambda by maximizing the sequential predictive log-likelihood of KRLS-T on a
/// longer one.
KrlstParams tune_krlst(const ChannelConfig &scenario, const TuningOptions &opt);

/// Sum of log N(y_i; mean_i, var_output_i) over one-step-ahead KRLS-T predictions.
double krlst_predictive_loglik(const Stream &stream, const KrlstParams &params);

NlmsParams tune_nlms(const Stream &tune, const TuningOptions &opt);
ExRlsParams tune_exrls(const Stream &tune, const TuningOptions &opt);
/// Quantization size is set so the dictionary ends near `budget` centers.
QklmsParams tune_qklms(const Stream &tune, const TuningOptions &opt);

AlgoParams tune_algo(Algo algo, const ChannelConfig &scenario, const TuningOptions &opt);

struct ReplicateResult {
    int replicate = 0;
    Algo algo = Algo::Krlst;
    LearningCurve curve;
    double steady_state_db = 0.0;
};

struct AlgoSummary {
    Algo algo;
    double mean_db;
    double std_db;
    int replicates;
};

/// Runs `replicates` streams (seeds derived from scenario.seed) for each
/// algorithm with fixed, pre-tuned parameters. Results are sorted by
/// (algorithm order, replicate). workers = 0 uses the hardware concurrency.
std::vector<ReplicateResult> run_replicates(const ChannelConfig &scenario, const std::vector<AlgoParams> &algos,
                                            int replicates, Index window = 500, unsigned workers = 0);

std::vector<AlgoSummary> summarize(const std::vector<ReplicateResult> &results);

}  // namespace gpaf
