#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "dbcsched/coding.hpp"
#include "dbcsched/errors.hpp"
#include "dbcsched/simplex.hpp"
#include "dbcsched/state.hpp"

namespace dbcsched {

/// State-independent scheduling policy: a probability measure on S_K.
struct Policy {
    std::map<Schedule, double> probs;

    void validate() const {
        double sum = 0.0;
        for (const auto& [s, p] : probs) {
            if (p < 0.0) throw InvalidParameter("policy: negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw InvalidParameter("policy: probabilities do not sum to 1");
    }

    double prob(const Schedule& s) const {
        auto it = probs.find(s);
        return it == probs.end() ? 0.0 : it->second;
    }
};

struct ServiceRateVector {
    std::vector<double> psi; // messages/slot per receiver
};

/// psi_j = sum over supported s with s_j > 0 of p(s) s_j / N(s).
inline ServiceRateVector service_rates(const Policy& pol, const ScheduleTable& tbl) {
    ServiceRateVector out;
    out.psi.assign(tbl.num_receivers, 0.0);
    for (const auto& [s, p] : pol.probs) {
        if (p == 0.0) continue;
        const ScheduleEntry& e = tbl.at(s); // throws MissingLength when not tabulated
        if (s.total() == 0) continue;
        for (std::size_t j = 1; j <= tbl.num_receivers; ++j)
            if (s.s[j - 1] > 0)
                out.psi[j - 1] += p * static_cast<double>(s.s[j - 1]) / static_cast<double>(e.n);
    }
    return out;
}

struct OuterBoundResult {
    bool contained = false;
    double slack = 0.0;                 // max over measures of min_j (Psi_j - beta_j)
    std::map<Schedule, double> witness; // maximizing measure when contained
};

namespace detail {

// max t s.t. sum_s pi(s) v_j(s) >= beta_j + t for all j, sum pi = 1, pi >= 0.
inline OuterBoundResult max_slack_measure(const std::vector<double>& beta, const ScheduleTable& tbl) {
    if (beta.size() != tbl.num_receivers)
        throw InvalidParameter("outer bound: beta dimension mismatch");
    for (double b : beta)
        if (b < 0.0) throw InvalidParameter("outer bound: beta must be nonnegative");
    const std::size_t n = tbl.schedules.size();
    const std::size_t big_j = tbl.num_receivers;
    // variables: pi_0..pi_{n-1}, t_plus, t_minus
    std::vector<double> obj(n + 2, 0.0);
    obj[n] = 1.0;
    obj[n + 1] = -1.0;
    std::vector<std::vector<double>> a;
    std::vector<LpRelation> rel;
    std::vector<double> rhs;
    for (std::size_t j = 1; j <= big_j; ++j) {
        std::vector<double> row(n + 2, 0.0);
        for (std::size_t i = 0; i < n; ++i) row[i] = tbl.service_share(tbl.schedules[i], j);
        row[n] = -1.0;
        row[n + 1] = 1.0;
        a.push_back(std::move(row));
        rel.push_back(LpRelation::GreaterEqual);
        rhs.push_back(beta[j - 1]);
    }
    std::vector<double> norm(n + 2, 0.0);
    std::fill(norm.begin(), norm.begin() + n, 1.0);
    a.push_back(std::move(norm));
    rel.push_back(LpRelation::Equal);
    rhs.push_back(1.0);
    LpResult lp = solve_lp(obj, a, rel, rhs);
    OuterBoundResult out;
    if (lp.status != LpStatus::Optimal) return out; // beta >= 0 makes this unreachable
    out.slack = lp.objective;
    out.contained = lp.objective >= -1e-9;
    if (out.contained) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (lp.x[i] > 1e-12) total += lp.x[i];
        for (std::size_t i = 0; i < n; ++i)
            if (lp.x[i] > 1e-12) out.witness[tbl.schedules[i]] = lp.x[i] / total;
    }
    return out;
}

} // namespace detail

/// Membership in the outer bound R_out (non-strict), with a witness measure.
inline OuterBoundResult outer_bound_contains(const std::vector<double>& beta, const ScheduleTable& tbl) {
    return detail::max_slack_measure(beta, tbl);
}

/// Builds a state-independent policy whose service rates strictly dominate EA.
/// Throws Infeasible when EA is not interior to R_out (max slack <= 1e-9).
inline Policy synthesize_policy(const std::vector<double>& ea, const ScheduleTable& tbl) {
    bool all_zero = std::all_of(ea.begin(), ea.end(), [](double v) { return v == 0.0; });
    if (all_zero) {
        Policy pol;
        std::size_t nonzero = 0;
        for (const auto& s : tbl.schedules)
            if (s.total() > 0) ++nonzero;
        for (const auto& s : tbl.schedules)
            if (s.total() > 0) pol.probs[s] = 1.0 / static_cast<double>(nonzero);
        pol.validate();
        return pol;
    }
    OuterBoundResult r = detail::max_slack_measure(ea, tbl);
    if (r.slack <= 1e-9)
        throw Infeasible("synthesize_policy: arrival vector not in the interior of the outer bound");
    Policy pol;
    pol.probs = r.witness;
    pol.validate();
    return pol;
}

/// Splitting probabilities mu_js = p(s) s_j/N(s) / sum_{s'} p(s') s'_j/N(s').
/// Receivers with zero service denominator get empty rows; when `ea` is given
/// such a receiver with positive arrivals raises UnservedReceiver.
struct SplittingMatrix {
    std::vector<std::map<Schedule, double>> mu; // one row per receiver (index j-1)
};

inline SplittingMatrix splitting(const Policy& pol, const ScheduleTable& tbl,
                                 const std::vector<double>* ea = nullptr) {
    SplittingMatrix out;
    out.mu.resize(tbl.num_receivers);
    ServiceRateVector psi = service_rates(pol, tbl);
    for (std::size_t j = 1; j <= tbl.num_receivers; ++j) {
        if (psi.psi[j - 1] <= 0.0) {
            if (ea && (*ea)[j - 1] > 0.0)
                throw UnservedReceiver("splitting: receiver with arrivals but no serving schedule");
            continue;
        }
        for (const auto& [s, p] : pol.probs) {
            if (p == 0.0 || s.total() == 0 || s.s[j - 1] == 0) continue;
            double share = p * static_cast<double>(s.s[j - 1]) / static_cast<double>(tbl.at(s).n);
            out.mu[j - 1][s] = share / psi.psi[j - 1];
        }
    }
    return out;
}

/// Per-class mean arrivals EA_js = EA_j mu_js, in ScheduleTable index order.
inline std::vector<double> class_arrival_means(const std::vector<double>& ea,
                                               const SplittingMatrix& mu,
                                               const ScheduleTable& tbl) {
    std::vector<double> out(tbl.schedules.size() * tbl.num_receivers, 0.0);
    for (std::size_t j = 1; j <= tbl.num_receivers; ++j)
        for (const auto& [s, m] : mu.mu[j - 1])
            out[tbl.index.at(s) * tbl.num_receivers + (j - 1)] = ea[j - 1] * m;
    return out;
}

/// Class workload c_js = N(s) n_js + s_j t_s, summed into c(alpha) = 1 + sum c_js.
inline double class_workload(const SystemState& state, const ScheduleTable& tbl,
                             std::size_t sched_idx, std::size_t j) {
    const Schedule& s = tbl.schedules[sched_idx];
    double c = static_cast<double>(tbl.entries[sched_idx].n)
             * static_cast<double>(state.fresh_count(sched_idx, j));
    if (state.ongoing[sched_idx].has_value())
        c += static_cast<double>(s.s[j - 1]) * static_cast<double>(state.ongoing[sched_idx]->t);
    return c;
}

struct LyapunovValue {
    double v = 0.0; // quadratic Lyapunov function V(alpha)
    double c = 1.0; // regularity cost c(alpha) = 1 + sum c_js
};

/// V(alpha) = sum_js c_js^2 / (2 (p(s) s_j - EA_js N(s))).
/// Throws NotInDriftRegion when a class with nonzero workload has a
/// nonpositive drift denominator.
inline LyapunovValue lyapunov_v(const SystemState& state, const Policy& pol,
                                const ScheduleTable& tbl, const std::vector<double>& ea_js) {
    LyapunovValue out;
    for (std::size_t i = 0; i < tbl.schedules.size(); ++i) {
        const Schedule& s = tbl.schedules[i];
        if (s.total() == 0) continue;
        double p = pol.prob(s);
        double n = static_cast<double>(tbl.entries[i].n);
        for (std::size_t j = 1; j <= tbl.num_receivers; ++j) {
            double c_js = class_workload(state, tbl, i, j);
            out.c += c_js;
            if (c_js == 0.0) continue;
            double denom = p * static_cast<double>(s.s[j - 1]) - ea_js[i * tbl.num_receivers + (j - 1)] * n;
            if (denom <= 0.0)
                throw NotInDriftRegion("lyapunov_v: class outside the negative-drift region");
            out.v += c_js * c_js / (2.0 * denom);
        }
    }
    return out;
}

enum class ClassVerdict { Stable, Transient, Boundary };

struct Classification {
    std::vector<ClassVerdict> per_class; // schedule-major, same indexing as ea_js
    ClassVerdict overall = ClassVerdict::Stable;
};

/// Per-class drift classification: Stable when EA_js < p(s) s_j/N(s),
/// Transient when strictly above, Boundary at equality within 1e-12.
/// Classes with no arrivals are trivially stable.
inline Classification classify(const std::vector<double>& ea_js, const Policy& pol,
                               const ScheduleTable& tbl) {
    Classification out;
    out.per_class.assign(tbl.schedules.size() * tbl.num_receivers, ClassVerdict::Stable);
    bool any_transient = false, any_boundary = false;
    for (std::size_t i = 0; i < tbl.schedules.size(); ++i) {
        const Schedule& s = tbl.schedules[i];
        double p = pol.prob(s);
        for (std::size_t j = 1; j <= tbl.num_receivers; ++j) {
            std::size_t idx = i * tbl.num_receivers + (j - 1);
            double ea = ea_js[idx];
            if (ea == 0.0) continue;
            double bound = (s.total() == 0 || s.s[j - 1] == 0)
                               ? 0.0
                               : p * static_cast<double>(s.s[j - 1]) / static_cast<double>(tbl.entries[i].n);
            if (ea > bound + 1e-12) {
                out.per_class[idx] = ClassVerdict::Transient;
                any_transient = true;
            } else if (ea > bound - 1e-12) {
                out.per_class[idx] = ClassVerdict::Boundary;
                any_boundary = true;
            }
        }
    }
    out.overall = any_transient ? ClassVerdict::Transient
                : any_boundary ? ClassVerdict::Boundary
                               : ClassVerdict::Stable;
    return out;
}

/// Fixed-schedule nat-rate stability test: EA~_j < s_j ln M_j / N(s) for every
/// served receiver, and zero nat arrivals for unserved receivers.
inline bool nat_rate_check(const Schedule& s, const std::vector<double>& ea_nats,
                           const CodingConfig& cfg, const ScheduleTable& tbl) {
    if (s.total() == 0) throw InvalidSchedule("nat_rate_check: all-zero schedule");
    const ScheduleEntry& e = tbl.at(s);
    for (std::size_t j = 1; j <= tbl.num_receivers; ++j) {
        if (s.s[j - 1] > 0) {
            double cap = static_cast<double>(s.s[j - 1]) * std::log(static_cast<double>(cfg.m[j - 1]))
                       / static_cast<double>(e.n);
            if (!(ea_nats[j - 1] < cap)) return false;
        } else if (ea_nats[j - 1] != 0.0) {
            return false;
        }
    }
    return true;
}

} // namespace dbcsched
