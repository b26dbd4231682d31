#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "gpaf/cli.hpp"
#include "json.hpp"

namespace gpaf::cli {

namespace {

using nlohmann::json;

void allow_keys(const json &obj, const std::string &where, std::initializer_list<const char *> keys) {
    if (!obj.is_object()) throw IoError(where + ": expected an object");
    for (const auto &item : obj.items()) {
        bool known = false;
        for (const char *k : keys) known = known || item.key() == k;
        if (!known) throw IoError(where + ": unknown key '" + item.key() + "'");
    }
}

template <class T>
void read(const json &obj, const char *key, T &out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

double read_snr(const json &v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        throw IoError("snr_db: expected a number or \"inf\"");
    }
    return v.get<double>();
}

ChannelConfig parse_channel(const json &j) {
    allow_keys(j, "channel", {"n_taps", "fdT", "snr_db", "n_steps", "n_sinusoids"});
    ChannelConfig c;
    read(j, "n_taps", c.n_taps);
    read(j, "fdT", c.fdT);
    if (j.contains("snr_db")) c.snr_db = read_snr(j.at("snr_db"));
    read(j, "n_steps", c.n_steps);
    read(j, "n_sinusoids", c.n_sinusoids);
    try {
        c.validate();
    } catch (const std::invalid_argument &e) {
        throw IoError(std::string("channel: ") + e.what());
    }
    return c;
}

// Fixed parameters when every required key is present, tuned when none is.
std::optional<AlgoParams> parse_fixed(Algo algo, const json &j) {
    auto count = [&](std::initializer_list<const char *> keys) {
        int n = 0;
        for (const char *k : keys) n += j.contains(k) ? 1 : 0;
        return n;
    };
    auto require_all = [&](std::initializer_list<const char *> keys) -> bool {
        const int n = count(keys);
        if (n == 0) return false;
        if (n != static_cast<int>(keys.size()))
            throw IoError(std::string(to_string(algo)) + ": give all of its parameters or none");
        return true;
    };
    switch (algo) {
        case Algo::Nlms: {
            if (!require_all({"step_size"})) return std::nullopt;
            NlmsParams p;
            read(j, "step_size", p.step_size);
            read(j, "eps", p.eps);
            return p;
        }
        case Algo::ExRls: {
            if (!require_all({"forgetting", "state_noise"})) return std::nullopt;
            ExRlsParams p;
            read(j, "forgetting", p.forgetting);
            read(j, "state_noise", p.state_noise);
            read(j, "initial_variance", p.initial_variance);
            return p;
        }
        case Algo::Qklms: {
            if (!require_all({"step_size", "quant_eps", "gamma"})) return std::nullopt;
            QklmsParams p;
            read(j, "step_size", p.step_size);
            read(j, "quant_eps", p.quant_eps);
            read(j, "gamma", p.gamma);
            return p;
        }
        case Algo::Krlst: {
            if (!require_all({"lambda", "alpha1", "gamma", "noise_var", "dim"})) return std::nullopt;
            KrlstParams p{KernelSpec::rbf(j.at("dim").get<Index>(), j.at("alpha1").get<double>(),
                                          j.at("gamma").get<double>(), j.at("noise_var").get<double>())
                              .with_shared_length_scale(true)};
            read(j, "lambda", p.lambda);
            read(j, "budget", p.budget);
            return p;
        }
    }
    return std::nullopt;
}

AlgoEntry parse_algo(const json &j) {
    AlgoEntry e;
    if (j.is_string()) {
        e.algo = algo_from_string(j.get<std::string>());
        return e;
    }
    allow_keys(j, "algos[]",
               {"name", "step_size", "eps", "forgetting", "state_noise", "initial_variance", "quant_eps", "gamma",
                "lambda", "alpha1", "noise_var", "dim", "budget"});
    if (!j.contains("name")) throw IoError("algos[]: missing 'name'");
    e.algo = algo_from_string(j.at("name").get<std::string>());
    e.fixed = parse_fixed(e.algo, j);
    return e;
}

}  // namespace

ExperimentConfig parse_config(const std::string &text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error &e) {
        throw IoError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        allow_keys(root, "config",
                   {"scenario", "seed", "replicates", "output_dir", "workers", "channel", "channels", "algos",
                    "tuning", "hyperopt", "equivalence"});
        read(root, "scenario", cfg.scenario);
        if (cfg.scenario != "fig2_demo" && cfg.scenario != "tracking_sim" && cfg.scenario != "hyperopt_demo" &&
            cfg.scenario != "equivalence_suite")
            throw IoError("unknown scenario '" + cfg.scenario + "'");
        if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();
        read(root, "replicates", cfg.replicates);
        if (cfg.replicates < 1) throw IoError("replicates must be >= 1");
        if (root.contains("output_dir")) cfg.output_dir = root.at("output_dir").get<std::string>();
        read(root, "workers", cfg.workers);
        if (root.contains("channel") && root.contains("channels")) throw IoError("give either 'channel' or 'channels'");
        if (root.contains("channel")) cfg.channels = {parse_channel(root.at("channel"))};
        if (root.contains("channels")) {
            cfg.channels.clear();
            for (const auto &c : root.at("channels")) cfg.channels.push_back(parse_channel(c));
            if (cfg.channels.empty()) throw IoError("channels must not be empty");
        }
        if (root.contains("algos"))
            for (const auto &a : root.at("algos")) cfg.algos.push_back(parse_algo(a));
        if (cfg.algos.empty())
            for (Algo a : {Algo::Krlst, Algo::Nlms, Algo::ExRls, Algo::Qklms}) cfg.algos.push_back({a, std::nullopt});
        if (root.contains("tuning")) {
            const json &t = root.at("tuning");
            allow_keys(t, "tuning",
                       {"holdout_steps", "tune_steps", "evidence_steps", "budget", "window", "hyperopt_restarts"});
            read(t, "holdout_steps", cfg.tuning.holdout_steps);
            read(t, "tune_steps", cfg.tuning.tune_steps);
            read(t, "evidence_steps", cfg.tuning.evidence_steps);
            read(t, "budget", cfg.tuning.budget);
            read(t, "window", cfg.tuning.window);
            read(t, "hyperopt_restarts", cfg.tuning.hyperopt_restarts);
        }
        if (root.contains("hyperopt")) {
            const json &h = root.at("hyperopt");
            allow_keys(h, "hyperopt",
                       {"n", "dim", "alpha1", "gamma", "noise_std", "restarts", "max_iters", "tol", "grad_tol"});
            read(h, "n", cfg.hyperopt.n);
            read(h, "dim", cfg.hyperopt.dim);
            read(h, "alpha1", cfg.hyperopt.alpha1);
            read(h, "gamma", cfg.hyperopt.gamma);
            read(h, "noise_std", cfg.hyperopt.noise_std);
            read(h, "restarts", cfg.hyperopt.options.restarts);
            read(h, "max_iters", cfg.hyperopt.options.max_iters);
            read(h, "tol", cfg.hyperopt.options.tol);
            read(h, "grad_tol", cfg.hyperopt.options.grad_tol);
            if (cfg.hyperopt.n < 2 || cfg.hyperopt.dim < 1 || cfg.hyperopt.options.restarts < 1)
                throw IoError("hyperopt: need n >= 2, dim >= 1, restarts >= 1");
        }
        if (root.contains("equivalence")) {
            const json &e = root.at("equivalence");
            allow_keys(e, "equivalence", {"streams", "inject_fault"});
            read(e, "streams", cfg.equivalence.streams);
            read(e, "inject_fault", cfg.equivalence.inject_fault);
        }
    } catch (const json::exception &e) {
        throw IoError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw IoError(std::string("config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> from_config) {
    if (flag) return *flag;
    if (from_config) return *from_config;
    if (const char *env = std::getenv("GPAF_SEED"); env && *env) {
        char *end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return v;
        throw IoError(std::string("GPAF_SEED is not an unsigned integer: ") + env);
    }
    return 1;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const std::vector<std::vector<double>> &columns) {
    if (header.size() != columns.size()) throw std::invalid_argument("write_csv: header/column mismatch");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (const auto &c : columns)
        if (c.size() != rows) throw std::invalid_argument("write_csv: ragged columns");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << format_number(columns[j][i]);
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace gpaf::cli
