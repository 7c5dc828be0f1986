// Command-line front end: computes exponent tables, codeword lengths, rate
// regions, runs slotted-time simulations, and verifies the analytic
// properties the library is built on.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "dbcsched/config.hpp"
#include "dbcsched/simulator.hpp"

namespace {

using namespace dbcsched;

void write_header(std::ostream& out, const Experiment& ex) {
    out << "# schema: " << kConfigSchema << "\n";
    out << "# config: " << ex.cfg.raw.dump() << "\n";
    out << "# seed: " << ex.cfg.sim.seed << "\n";
    out << "# rho: " << ex.cfg.coding.rho << "\n";
}

int cmd_exponents(const Experiment& ex, const std::string& out_dir, bool sweep) {
    std::ofstream out(out_dir + "/exponents.csv");
    write_header(out, ex);
    out << "k,j,rho,E_o\n";
    for (std::size_t k = 1; k <= ex.table.num_receivers; ++k)
        for (std::size_t j = 1; j <= k; ++j)
            out << k << "," << j << "," << ex.exponents.rho << ","
                << ex.exponents.at(k, j) << "\n";
    std::cout << "wrote " << out_dir << "/exponents.csv\n";
    if (sweep) {
        RhoSweepResult r = rho_sweep(ex.cfg.channel);
        std::ofstream sw(out_dir + "/rho_sweep.csv");
        write_header(sw, ex);
        sw << "rho,min_E_o\n";
        for (const auto& p : r.points) sw << p.rho << "," << p.min_exponent << "\n";
        std::cout << "wrote " << out_dir << "/rho_sweep.csv (best rho " << r.best_rho
                  << "; lengths and stability keep the configured rho)\n";
    }
    return 0;
}

int cmd_lengths(const Experiment& ex, const std::string& out_dir) {
    std::ofstream out(out_dir + "/lengths.csv");
    write_header(out, ex);
    out << "schedule";
    for (std::size_t j = 1; j <= ex.table.num_receivers; ++j) out << ",N_" << j;
    out << ",N";
    for (std::size_t j = 1; j <= ex.table.num_receivers; ++j)
        out << ",lower_" << j << ",upper_" << j;
    for (std::size_t k = 1; k <= ex.table.num_receivers; ++k) out << ",R_" << k;
    out << "\n";
    for (std::size_t i = 0; i < ex.table.schedules.size(); ++i) {
        const Schedule& s = ex.table.schedules[i];
        const ScheduleEntry& e = ex.table.entries[i];
        out << '"' << s.to_string() << '"';
        for (auto n : e.n_rx) out << "," << n;
        out << "," << e.n;
        for (std::size_t j = 1; j <= ex.table.num_receivers; ++j) {
            if (s.total() == 0) { out << ",0,0"; continue; }
            LengthBounds b = length_bounds(s, j, ex.cfg.coding, ex.exponents);
            out << "," << b.lower << "," << b.upper;
        }
        for (double r : e.rates) out << "," << r;
        out << "\n";
    }
    std::cout << "wrote " << out_dir << "/lengths.csv\n";
    return 0;
}

int cmd_region(const Experiment& ex, const std::string& out_dir) {
    std::ofstream out(out_dir + "/region.csv");
    write_header(out, ex);
    out << "kind,schedule_or_beta";
    for (std::size_t j = 1; j <= ex.table.num_receivers; ++j) out << ",v_" << j;
    out << ",contained,slack,synthesizable\n";
    for (const auto& s : ex.table.schedules) {
        if (s.total() == 0) continue;
        out << "vertex,\"" << s.to_string() << '"';
        for (std::size_t j = 1; j <= ex.table.num_receivers; ++j)
            out << "," << ex.table.service_share(s, j);
        out << ",,,\n";
    }
    for (const auto& beta : ex.cfg.beta_queries) {
        OuterBoundResult r = outer_bound_contains(beta, ex.table);
        bool synth = false;
        try {
            synthesize_policy(beta, ex.table);
            synth = true;
        } catch (const Infeasible&) {
        }
        out << "query,\"(";
        for (std::size_t j = 0; j < beta.size(); ++j) out << (j ? "," : "") << beta[j];
        out << ")\"";
        for (std::size_t j = 0; j < beta.size(); ++j) out << "," << beta[j];
        out << "," << (r.contained ? 1 : 0) << "," << r.slack << "," << (synth ? 1 : 0) << "\n";
    }
    std::cout << "wrote " << out_dir << "/region.csv\n";
    return 0;
}

int cmd_simulate(const Experiment& ex, const std::string& out_dir) {
    SimConfig sim = make_sim_config(ex);
    SimTrace trace = run(sim);
    std::ofstream out(out_dir + "/trace.csv");
    write_header(out, ex);
    out << "# horizon: " << trace.horizon << " stride: " << trace.stride << "\n";
    out << "slot,c_alpha";
    for (std::size_t i = 0; i < ex.table.schedules.size(); ++i)
        for (std::size_t j = 1; j <= ex.table.num_receivers; ++j) {
            if (ex.table.schedules[i].total() == 0) continue;
            out << ",fresh_" << j << "_" << ex.table.schedules[i].to_string();
        }
    for (std::size_t i = 0; i < ex.table.schedules.size(); ++i)
        for (std::size_t j = 1; j <= ex.table.num_receivers; ++j) {
            if (ex.table.schedules[i].total() == 0) continue;
            out << ",dep_" << j << "_" << ex.table.schedules[i].to_string();
        }
    out << "\n";
    for (std::size_t t = 0; t < trace.slots.size(); ++t) {
        out << trace.slots[t] << "," << trace.c_alpha[t];
        for (std::size_t i = 0; i < ex.table.schedules.size(); ++i)
            for (std::size_t j = 1; j <= ex.table.num_receivers; ++j) {
                if (ex.table.schedules[i].total() == 0) continue;
                out << "," << trace.fresh_samples[t][i * ex.table.num_receivers + (j - 1)];
            }
        for (std::size_t i = 0; i < ex.table.schedules.size(); ++i)
            for (std::size_t j = 1; j <= ex.table.num_receivers; ++j) {
                if (ex.table.schedules[i].total() == 0) continue;
                out << "," << trace.departure_samples[t][i * ex.table.num_receivers + (j - 1)];
            }
        out << "\n";
    }
    std::cout << "wrote " << out_dir << "/trace.csv\n";
    try {
        StabilityEstimate est = estimate_stability(trace);
        const char* verdict = est.verdict == StabilityVerdict::Stable ? "Stable"
                            : est.verdict == StabilityVerdict::Unstable ? "Unstable"
                                                                        : "Inconclusive";
        std::cout << "verdict: " << verdict << " slope: " << est.slope << "\n";
    } catch (const TraceTooShort&) {
        std::cout << "verdict: trace too short for a stability estimate\n";
    }
    return 0;
}

bool report(const char* name, bool ok) {
    std::printf("%-28s %s\n", name, ok ? "PASS" : "FAIL");
    return ok;
}

int cmd_verify(const Experiment& ex, const std::string&) {
    bool all = true;

    // exponent ordering on the configured channel
    {
        bool ok = true;
        for (std::size_t k = 1; k <= ex.table.num_receivers && ok; ++k)
            for (std::size_t j = 1; j <= k && ok; ++j)
                ok = ex.exponents.at(k, j) >= ex.exponents.at(k, k) - 1e-9;
        all &= report("exponent ordering", ok);
    }

    // analytic sandwich bounds on every tabulated schedule
    {
        bool ok = true;
        for (const auto& s : ex.table.schedules) {
            if (s.total() == 0) continue;
            for (std::size_t j = 1; j <= ex.table.num_receivers && ok; ++j) {
                std::int64_t n = ex.table.at(s).n_rx[j - 1];
                if (n == 0) continue;
                LengthBounds b = length_bounds(s, j, ex.cfg.coding, ex.exponents);
                ok = b.lower <= n && n <= b.upper;
            }
            if (!ok) break;
        }
        all &= report("length sandwich bounds", ok);
    }

    // length monotonicity over all sub-schedules
    {
        bool ok = true;
        for (const auto& s : ex.table.schedules) {
            if (s.total() == 0) continue;
            for (const auto& sub : subsets(s)) {
                for (std::size_t j = 1; j <= ex.table.num_receivers && ok; ++j)
                    ok = codeword_length_rx(sub, j, ex.cfg.coding, ex.exponents)
                         <= ex.table.at(s).n_rx[j - 1];
                if (!ok) break;
            }
            if (!ok) break;
        }
        all &= report("subset length monotonicity", ok);
    }

    // Region identity on 200 sampled arrival vectors
    {
        bool ok = true;
        std::mt19937_64 rng(ex.cfg.sim.seed);
        std::vector<double> box(ex.table.num_receivers, 0.0);
        for (const auto& s : ex.table.schedules)
            for (std::size_t j = 1; j <= ex.table.num_receivers; ++j)
                box[j - 1] = std::max(box[j - 1], ex.table.service_share(s, j));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int i = 0; i < 200 && ok; ++i) {
            std::vector<double> beta(ex.table.num_receivers);
            for (std::size_t j = 0; j < beta.size(); ++j) beta[j] = unif(rng) * box[j];
            OuterBoundResult r = outer_bound_contains(beta, ex.table);
            bool synth = false;
            try {
                synthesize_policy(beta, ex.table);
                synth = true;
            } catch (const Infeasible&) {
            }
            ok = synth == (r.slack > 1e-9);
        }
        all &= report("region identity", ok);
    }

    // Saturation throughput against p(s) s_j / N(s)
    {
        SimConfig sim = make_sim_config(ex);
        sim.saturate = true;
        sim.record_drift = false;
        sim.horizon = std::max<std::int64_t>(sim.horizon, 1000000);
        sim.stride = std::max<std::int64_t>(sim.stride, 100);
        SimTrace trace = run(sim);
        bool ok = true;
        for (std::size_t i = 0; i < ex.table.schedules.size() && ok; ++i) {
            const Schedule& s = ex.table.schedules[i];
            double p = ex.policy.prob(s);
            if (p == 0.0 || s.total() == 0) continue;
            for (std::size_t j = 1; j <= ex.table.num_receivers && ok; ++j) {
                if (s.s[j - 1] == 0) continue;
                double expect = p * ex.table.service_share(s, j);
                double got = static_cast<double>(
                                 trace.departures_total[i * ex.table.num_receivers + (j - 1)])
                           / static_cast<double>(sim.horizon);
                ok = std::abs(got - expect) <= 0.02 * expect;
            }
        }
        all &= report("saturation throughput", ok);
    }

    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scheduled message communication over degraded broadcast channels"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    std::int64_t horizon_override = 0;
    bool horizon_given = false;

    app.add_option("--config", config_path, "experiment configuration file")->required();
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed_override, "override configured RNG seed");
    auto* horizon_opt = app.add_option("--horizon", horizon_override, "override configured horizon");

    auto* c_exp = app.add_subcommand("exponents", "emit the exponent table as CSV");
    bool rho_sweep_flag = false;
    c_exp->add_flag("--rho-sweep", rho_sweep_flag,
                    "also sweep rho over a grid and report the exponent margin");
    auto* c_len = app.add_subcommand("lengths", "emit per-schedule codeword lengths and rates");
    auto* c_reg = app.add_subcommand("region", "emit rate vectors and membership answers");
    auto* c_sim = app.add_subcommand("simulate", "run the slotted-time simulation");
    auto* c_ver = app.add_subcommand("verify", "run the analytic property suite");

    CLI11_PARSE(app, argc, argv);
    seed_given = seed_opt->count() > 0;
    horizon_given = horizon_opt->count() > 0;

    try {
        ExperimentConfig cfg = dbcsched::load_config(config_path);
        if (seed_given) cfg.sim.seed = seed_override;
        if (horizon_given) cfg.sim.horizon = horizon_override;
        std::filesystem::create_directories(out_dir);
        Experiment ex = build_experiment(cfg);
        if (c_exp->parsed()) return cmd_exponents(ex, out_dir, rho_sweep_flag);
        if (c_len->parsed()) return cmd_lengths(ex, out_dir);
        if (c_reg->parsed()) return cmd_region(ex, out_dir);
        if (c_sim->parsed()) return cmd_simulate(ex, out_dir);
        if (c_ver->parsed()) return cmd_verify(ex, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
