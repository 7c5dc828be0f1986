#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbcsched/channel.hpp"
#include "dbcsched/coding.hpp"
#include "dbcsched/simulator.hpp"
#include "dbcsched/stability.hpp"

namespace dbcsched {

inline constexpr const char* kConfigSchema = "dbcsched/1";

struct PolicySpec {
    bool automatic = false;
    std::vector<double> target_ea;            // for automatic synthesis
    std::map<Schedule, double> explicit_probs;
};

struct ArrivalConfig {
    std::vector<ArrivalSpec> pmfs;             // explicit per-receiver pmfs
    std::optional<std::vector<double>> psi_fraction; // Bernoulli means as fractions of psi_j
};

struct SimParams {
    std::int64_t horizon = 100000;
    std::uint64_t seed = 1;
    std::int64_t stride = 1;
    double bandwidth_w = 1.0;
    bool saturate = false;
    bool record_drift = false;
};

struct ExperimentConfig {
    DegradedBroadcastChannel channel;
    CodingConfig coding;
    std::int64_t k_max = 1;
    PolicySpec policy;
    ArrivalConfig arrivals;
    SimParams sim;
    std::vector<std::vector<double>> beta_queries;
    nlohmann::json raw; // echoed into output headers
};

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ValidationError(path, "unknown key '" + it.key() + "'");
}

inline std::vector<double> as_doubles(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array()) throw ValidationError(path, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ValidationError(path, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline StochasticMatrix as_matrix(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ValidationError(path, "expected a nested array matrix");
    std::size_t cols = 0;
    std::vector<double> probs;
    for (const auto& row : j) {
        std::vector<double> r = as_doubles(row, path);
        if (cols == 0) cols = r.size();
        else if (cols != r.size()) throw ValidationError(path, "ragged matrix rows");
        probs.insert(probs.end(), r.begin(), r.end());
    }
    StochasticMatrix m(j.size(), cols, std::move(probs));
    try {
        m.validate();
    } catch (const InvalidParameter& e) {
        throw ValidationError(path, e.what());
    }
    return m;
}

inline DegradedBroadcastChannel parse_channel(const nlohmann::json& j) {
    require_keys(j, "channel", {"bsc_cascade", "top_input", "prefixes", "base", "degraders"});
    DegradedBroadcastChannel ch;
    if (j.contains("bsc_cascade")) {
        const auto& c = j["bsc_cascade"];
        require_keys(c, "channel.bsc_cascade", {"eps", "prefix_eps", "prefixes"});
        if (!c.contains("eps")) throw ValidationError("channel.bsc_cascade.eps", "missing");
        std::vector<double> eps = as_doubles(c["eps"], "channel.bsc_cascade.eps");
        std::vector<StochasticMatrix> prefixes;
        if (c.contains("prefixes")) {
            for (std::size_t i = 0; i < c["prefixes"].size(); ++i)
                prefixes.push_back(as_matrix(c["prefixes"][i], "channel.bsc_cascade.prefixes"));
        } else if (c.contains("prefix_eps")) {
            for (double pe : as_doubles(c["prefix_eps"], "channel.bsc_cascade.prefix_eps"))
                prefixes.push_back(StochasticMatrix::bsc(pe));
        }
        std::vector<double> top = j.contains("top_input")
            ? as_doubles(j["top_input"], "channel.top_input")
            : std::vector<double>(2, 0.5);
        try {
            return build_bsc_cascade(eps, prefixes, top);
        } catch (const InvalidParameter& e) {
            throw ValidationError("channel.bsc_cascade", e.what());
        }
    }
    if (!j.contains("top_input") || !j.contains("base"))
        throw ValidationError("channel", "explicit channel needs top_input and base");
    ch.top_input = as_doubles(j["top_input"], "channel.top_input");
    ch.base = as_matrix(j["base"], "channel.base");
    if (j.contains("prefixes"))
        for (std::size_t i = 0; i < j["prefixes"].size(); ++i)
            ch.prefixes.push_back(as_matrix(j["prefixes"][i], "channel.prefixes"));
    if (j.contains("degraders"))
        for (std::size_t i = 0; i < j["degraders"].size(); ++i)
            ch.degraders.push_back(as_matrix(j["degraders"][i], "channel.degraders"));
    ch.num_receivers = ch.degraders.size() + 1;
    try {
        ch.validate();
    } catch (const InvalidParameter& e) {
        throw ValidationError("channel", e.what());
    }
    return ch;
}

inline PolicySpec parse_policy(const nlohmann::json& j, std::size_t big_j, std::int64_t k_max) {
    PolicySpec spec;
    if (j.is_string()) {
        if (j.get<std::string>() != "auto")
            throw ValidationError("policy", "string form must be \"auto\"");
        spec.automatic = true;
        return spec;
    }
    require_keys(j, "policy", {"auto", "target_ea", "entries"});
    if (j.contains("auto") || j.contains("target_ea")) {
        spec.automatic = true;
        if (j.contains("target_ea")) {
            spec.target_ea = as_doubles(j["target_ea"], "policy.target_ea");
            if (spec.target_ea.size() != big_j)
                throw ValidationError("policy.target_ea", "expected one entry per receiver");
        }
        return spec;
    }
    if (!j.contains("entries")) throw ValidationError("policy", "need \"entries\" or \"auto\"");
    double sum = 0.0;
    for (const auto& e : j["entries"]) {
        require_keys(e, "policy.entries", {"s", "p"});
        std::vector<double> sd = as_doubles(e["s"], "policy.entries.s");
        Schedule s;
        for (double v : sd) {
            if (v < 0 || v != std::floor(v))
                throw ValidationError("policy.entries.s", "schedule entries must be nonnegative integers");
            s.s.push_back(static_cast<std::int64_t>(v));
        }
        if (s.s.size() != big_j)
            throw ValidationError("policy.entries.s", "schedule length must equal receiver count");
        if (s.total() > k_max)
            throw ValidationError("policy", "schedule " + s.to_string() + " exceeds K");
        double p = e["p"].get<double>();
        if (p < 0.0) throw ValidationError("policy", "negative probability");
        spec.explicit_probs[s] += p;
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw ValidationError("policy", "probabilities must sum to 1");
    return spec;
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    detail::require_keys(j, "(root)",
                         {"schema", "channel", "coding", "K", "policy", "arrivals", "sim",
                          "beta_queries"});
    if (!j.contains("schema") || j["schema"] != kConfigSchema)
        throw ValidationError("schema", std::string("expected \"") + kConfigSchema + "\"");
    ExperimentConfig cfg;
    cfg.raw = j;
    if (!j.contains("channel")) throw ValidationError("channel", "missing");
    cfg.channel = detail::parse_channel(j["channel"]);
    std::size_t big_j = cfg.channel.num_receivers;

    if (!j.contains("coding")) throw ValidationError("coding", "missing");
    const auto& cj = j["coding"];
    detail::require_keys(cj, "coding", {"M", "p_e", "rho"});
    if (!cj.contains("M") || !cj.contains("p_e"))
        throw ValidationError("coding", "need M and p_e");
    for (const auto& v : cj["M"]) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 2)
            throw ValidationError("coding.M", "alphabet sizes must be integers >= 2");
        cfg.coding.m.push_back(v.get<std::uint64_t>());
    }
    cfg.coding.p_e = detail::as_doubles(cj["p_e"], "coding.p_e");
    cfg.coding.rho = cj.value("rho", 1.0);
    if (cfg.coding.m.size() != big_j || cfg.coding.p_e.size() != big_j)
        throw ValidationError("coding", "M and p_e must have one entry per receiver");
    try {
        cfg.coding.validate();
    } catch (const InvalidParameter& e) {
        throw ValidationError("coding", e.what());
    }

    cfg.k_max = j.value("K", 1);
    if (cfg.k_max < 1) throw ValidationError("K", "must be >= 1");

    if (j.contains("policy")) cfg.policy = detail::parse_policy(j["policy"], big_j, cfg.k_max);
    else cfg.policy.automatic = true;

    if (j.contains("arrivals")) {
        const auto& aj = j["arrivals"];
        if (aj.is_array()) {
            for (std::size_t i = 0; i < aj.size(); ++i) {
                detail::require_keys(aj[i], "arrivals", {"pmf"});
                ArrivalSpec spec{detail::as_doubles(aj[i]["pmf"], "arrivals.pmf")};
                try {
                    spec.validate();
                } catch (const InvalidParameter& e) {
                    throw ValidationError("arrivals.pmf", e.what());
                }
                cfg.arrivals.pmfs.push_back(std::move(spec));
            }
            if (cfg.arrivals.pmfs.size() != big_j)
                throw ValidationError("arrivals", "expected one spec per receiver");
        } else {
            detail::require_keys(aj, "arrivals", {"psi_fraction"});
            cfg.arrivals.psi_fraction = detail::as_doubles(aj["psi_fraction"], "arrivals.psi_fraction");
            if (cfg.arrivals.psi_fraction->size() != big_j)
                throw ValidationError("arrivals.psi_fraction", "expected one entry per receiver");
        }
    }

    if (j.contains("sim")) {
        const auto& sj = j["sim"];
        detail::require_keys(sj, "sim",
                             {"horizon", "seed", "stride", "W", "saturate", "record_drift"});
        cfg.sim.horizon = sj.value("horizon", cfg.sim.horizon);
        cfg.sim.seed = sj.value("seed", cfg.sim.seed);
        cfg.sim.stride = sj.value("stride", cfg.sim.stride);
        cfg.sim.bandwidth_w = sj.value("W", cfg.sim.bandwidth_w);
        cfg.sim.saturate = sj.value("saturate", cfg.sim.saturate);
        cfg.sim.record_drift = sj.value("record_drift", cfg.sim.record_drift);
        if (cfg.sim.horizon < 1) throw ValidationError("sim.horizon", "must be >= 1");
    }

    if (j.contains("beta_queries"))
        for (const auto& b : j["beta_queries"]) {
            auto beta = detail::as_doubles(b, "beta_queries");
            if (beta.size() != big_j)
                throw ValidationError("beta_queries", "expected one entry per receiver");
            cfg.beta_queries.push_back(std::move(beta));
        }

    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config parse failure: ") + e.what());
    }
    return parse_config(j);
}

/// Fully wired experiment: channel through exponents, schedule table, policy,
/// splitting, and arrival means.
struct Experiment {
    ExperimentConfig cfg;
    ExponentTable exponents;
    ScheduleTable table;
    Policy policy;
    SplittingMatrix mu;
    ServiceRateVector psi;
    std::vector<double> ea;        // per-receiver arrival means
    std::vector<double> ea_js;     // per-class arrival means
    std::vector<ArrivalSpec> arrival_specs;
};

inline Experiment build_experiment(const ExperimentConfig& cfg) {
    Experiment ex;
    ex.cfg = cfg;
    ex.exponents = exponent_table(cfg.channel, cfg.coding.rho);
    ex.table = build_schedule_table(cfg.channel.num_receivers, cfg.k_max, cfg.coding, ex.exponents);

    if (cfg.policy.automatic) {
        std::vector<double> target = cfg.policy.target_ea;
        if (target.empty()) target.assign(cfg.channel.num_receivers, 0.0);
        ex.policy = synthesize_policy(target, ex.table);
    } else {
        ex.policy.probs = cfg.policy.explicit_probs;
        ex.policy.validate();
    }
    ex.psi = service_rates(ex.policy, ex.table);

    if (cfg.arrivals.psi_fraction) {
        for (std::size_t jr = 0; jr < cfg.channel.num_receivers; ++jr)
            ex.arrival_specs.push_back(
                ArrivalSpec::bernoulli((*cfg.arrivals.psi_fraction)[jr] * ex.psi.psi[jr]));
    } else if (!cfg.arrivals.pmfs.empty()) {
        ex.arrival_specs = cfg.arrivals.pmfs;
    } else {
        for (std::size_t jr = 0; jr < cfg.channel.num_receivers; ++jr)
            ex.arrival_specs.push_back(ArrivalSpec{{1.0}}); // no arrivals
    }
    for (const auto& a : ex.arrival_specs) ex.ea.push_back(a.mean());
    ex.mu = splitting(ex.policy, ex.table, &ex.ea);
    ex.ea_js = class_arrival_means(ex.ea, ex.mu, ex.table);
    return ex;
}

inline SimConfig make_sim_config(const Experiment& ex) {
    SimConfig sim;
    sim.policy = ex.policy;
    sim.mu = ex.mu;
    sim.table = ex.table;
    sim.arrivals = ex.arrival_specs;
    sim.horizon = ex.cfg.sim.horizon;
    sim.seed = ex.cfg.sim.seed;
    sim.stride = ex.cfg.sim.stride;
    sim.bandwidth_w = ex.cfg.sim.bandwidth_w;
    sim.saturate = ex.cfg.sim.saturate;
    sim.record_drift = ex.cfg.sim.record_drift;
    sim.ea_js = ex.ea_js;
    return sim;
}

} // namespace dbcsched
