#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "gpaf/gp_batch.hpp"

namespace gpaf {

namespace {

constexpr double kParamBound = 20.0;  // |log theta| cap, keeps exp() finite
constexpr double kMaxStep = 3.0;      // largest move per iteration in log domain
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 40;

struct Objective {
    const Dataset &data;
    const KernelSpec &base;

    // Returns false when the covariance cannot be factorized at theta.
    bool operator()(const Vector &theta, double &value, Vector &grad) const {
        try {
            LmlEvaluation e = lml_with_gradient(data, base.with_packed(theta));
            if (!std::isfinite(e.value) || !e.gradient.allFinite()) return false;
            value = e.value;
            grad = std::move(e.gradient);
            return true;
        } catch (const IllConditionedError &) {
            return false;
        }
    }
};

RestartTrace ascend(const Objective &objective, Vector theta, const HyperOptOptions &opt) {
    RestartTrace trace;
    trace.initial = theta;
    double f = 0.0;
    Vector g;
    if (!objective(theta, f, g)) {
        trace.failed = true;
        return trace;
    }
    trace.params.push_back(theta);
    trace.lml.push_back(f);

    const Index p = theta.size();
    Matrix H = Matrix::Identity(p, p);  // inverse curvature of -LML
    bool fresh_h = true;
    for (int iter = 0; iter < opt.max_iters; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
            trace.converged = true;
            break;
        }
        Vector d = opt.quasi_newton ? Vector(H * g) : g;
        if (g.dot(d) <= 0.0) {
            H.setIdentity();
            fresh_h = true;
            d = g;
        }
        const double dmax = d.lpNorm<Eigen::Infinity>();
        if (dmax > kMaxStep) d *= kMaxStep / dmax;
        const double slope = g.dot(d);

        double step = 1.0;
        double fn = 0.0;
        Vector gn;
        Vector trial;
        bool accepted = false;
        for (int k = 0; k < kMaxBacktracks; ++k, step *= 0.5) {
            trial = (theta + step * d).cwiseMax(-kParamBound).cwiseMin(kParamBound);
            if (objective(trial, fn, gn) && fn >= f + kArmijo * step * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!fresh_h) {
                H.setIdentity();
                fresh_h = true;
                continue;
            }
            if (trace.params.size() == 1) trace.failed = true;
            break;
        }

        const Vector s = trial - theta;
        const Vector yv = g - gn;  // change of the gradient of -LML
        const double sy = s.dot(yv);
        if (opt.quasi_newton && sy > 1e-12 * s.norm() * yv.norm()) {
            const double rho = 1.0 / sy;
            const Matrix I = Matrix::Identity(p, p);
            H = (I - rho * s * yv.transpose()) * H * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
            fresh_h = false;
        }
        const double change = fn - f;
        theta = trial;
        f = fn;
        g = gn;
        trace.params.push_back(theta);
        trace.lml.push_back(f);
        if (std::abs(change) < opt.tol * (1.0 + std::abs(f)) || g.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
            trace.converged = true;
            break;
        }
    }
    return trace;
}

}  // namespace

HyperOptResult optimize_hyperparams(const Dataset &data, const KernelSpec &spec0, const HyperOptOptions &options) {
    data.validate();
    if (data.size() < 2) throw std::invalid_argument("hyperparameter optimization needs at least two samples");
    if (options.restarts < 1) throw std::invalid_argument("restarts must be >= 1");

    const double lml0 = log_marginal_likelihood(data, spec0);
    HyperOptResult result{spec0, lml0, lml0, false, {}};
    if (options.max_iters <= 0) return result;

    const Objective objective{data, spec0};
    double best = lml0;
    Vector best_theta = spec0.packed();
    for (int r = 0; r < options.restarts; ++r) {
        Vector start = spec0.packed();
        if (r > 0) {
            std::seed_seq seq{static_cast<std::uint64_t>(options.seed), static_cast<std::uint64_t>(r)};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> draw(options.init_low, options.init_high);
            for (Index j = 0; j < start.size(); ++j) start(j) = draw(rng);
        }
        RestartTrace trace = ascend(objective, start, options);
        if (!trace.lml.empty() && trace.lml.back() > best) {
            best = trace.lml.back();
            best_theta = trace.params.back();
        }
        result.restarts.push_back(std::move(trace));
    }
    if (best > lml0) {
        result.spec = spec0.with_packed(best_theta);
        result.lml = best;
        result.improved = true;
    }
    return result;
}

}  // namespace gpaf
