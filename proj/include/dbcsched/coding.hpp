#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "dbcsched/errors.hpp"
#include "dbcsched/exponents.hpp"
#include "dbcsched/schedule.hpp"

namespace dbcsched {

struct CodingConfig {
    std::vector<std::uint64_t> m;   // message alphabet sizes M_j
    std::vector<double> p_e;        // tolerable decoding error probabilities
    double rho = 1.0;

    void validate() const {
        if (m.empty() || m.size() != p_e.size())
            throw InvalidParameter("coding config: M and p_e sizes must match");
        for (std::uint64_t mk : m)
            if (mk < 2) throw InvalidParameter("coding config: every M_j must be >= 2");
        for (double p : p_e)
            if (!(p > 0.0 && p < 1.0))
                throw InvalidParameter("coding config: p_e must lie in (0,1)");
        if (!(rho > 0.0 && rho <= 1.0))
            throw InvalidParameter("coding config: rho outside (0,1]");
    }
};

/// Random-coding union bound for receiver j under schedule s at blocklength N:
///   sum over k in {j..J} with s_k > 0 of exp(-(N E_{o,X_k,Y_j} - rho s_k ln M_k)).
/// Components with s_k = 0 place no codeword in the superposition and are
/// excluded. May exceed 1; it is a bound, not a probability.
inline double chi(const Schedule& s, std::int64_t n, std::size_t j,
                  const CodingConfig& cfg, const ExponentTable& tab) {
    if (n < 1) throw InvalidParameter("chi: N must be >= 1");
    if (j < 1 || j > tab.num_receivers) throw IndexOutOfRange("chi: receiver index outside 1..J");
    double total = 0.0;
    for (std::size_t k = j; k <= tab.num_receivers; ++k) {
        if (s.s[k - 1] == 0) continue;
        double exponent = static_cast<double>(n) * tab.at(k, j)
                        - cfg.rho * static_cast<double>(s.s[k - 1]) * std::log(static_cast<double>(cfg.m[k - 1]));
        total += std::exp(-exponent);
    }
    return total;
}

namespace detail {

// ceil to the next positive multiple of q: min(n >= 1 : x <= n q) * q
inline double ceil_to_multiple(double x, double q) {
    double n = std::ceil(x / q);
    if (n < 1.0) n = 1.0;
    // guard against x marginally above a multiple due to round-off in the division
    while ((n - 1.0) * q >= x && n > 1.0) n -= 1.0;
    return n * q;
}

inline std::vector<std::size_t> active_sources(const Schedule& s, std::size_t j, std::size_t big_j) {
    std::vector<std::size_t> out;
    for (std::size_t k = j; k <= big_j; ++k)
        if (s.s[k - 1] > 0) out.push_back(k);
    return out;
}

} // namespace detail

struct LengthBounds {
    std::int64_t lower = 0;
    std::int64_t upper = 0;
};

/// Sandwich bounds on N_j(s): the lower bound requires each single term of chi
/// to meet p_ej, the upper requires each term to meet p_ej/a_j where a_j is
/// the number of active components at receiver j.
inline LengthBounds length_bounds(const Schedule& s, std::size_t j,
                                   const CodingConfig& cfg, const ExponentTable& tab) {
    auto active = detail::active_sources(s, j, tab.num_receivers);
    if (active.empty()) return {0, 0};
    double lower = 0.0, upper = 0.0;
    double a_j = static_cast<double>(active.size());
    for (std::size_t k : active) {
        double eo = tab.at(k, j);
        if (eo <= 1e-12)
            throw Infeasible("length_bounds: vanishing exponent for an active component");
        double need = cfg.rho * static_cast<double>(s.s[k - 1]) * std::log(static_cast<double>(cfg.m[k - 1]));
        lower = std::max(lower, detail::ceil_to_multiple(-std::log(cfg.p_e[j - 1]) + need, eo) / eo);
        upper = std::max(upper, detail::ceil_to_multiple(-std::log(cfg.p_e[j - 1] / a_j) + need, eo) / eo);
    }
    return {static_cast<std::int64_t>(std::llround(lower)), static_cast<std::int64_t>(std::llround(upper))};
}

/// Smallest N >= 1 with chi(s, N, j) <= p_ej; 0 when receiver j has no active
/// component. Bisection between the sandwich bounds, then a local scan to
/// confirm minimality.
inline std::int64_t codeword_length_rx(const Schedule& s, std::size_t j,
                                       const CodingConfig& cfg, const ExponentTable& tab) {
    auto active = detail::active_sources(s, j, tab.num_receivers);
    if (active.empty()) return 0;
    LengthBounds b = length_bounds(s, j, cfg, tab);
    double target = cfg.p_e[j - 1];
    std::int64_t lo = b.lower, hi = b.upper;
    while (chi(s, hi, j, cfg, tab) > target) hi *= 2; // belt and braces; the upper bound should suffice
    while (lo < hi) {
        std::int64_t mid = lo + (hi - lo) / 2;
        if (chi(s, mid, j, cfg, tab) <= target) hi = mid; else lo = mid + 1;
    }
    while (lo > 1 && chi(s, lo - 1, j, cfg, tab) <= target) --lo;
    return lo;
}

/// N(s) = max_j N_j(s); the smallest blocklength meeting every receiver's
/// error target simultaneously.
inline std::int64_t codeword_length(const Schedule& s, const CodingConfig& cfg,
                                    const ExponentTable& tab) {
    if (s.total() == 0) throw InvalidSchedule("codeword_length: all-zero schedule");
    std::int64_t n = 0;
    for (std::size_t j = 1; j <= tab.num_receivers; ++j)
        n = std::max(n, codeword_length_rx(s, j, cfg, tab));
    return n;
}

struct ScheduleEntry {
    std::vector<std::int64_t> n_rx;  // N_j(s) per receiver
    std::int64_t n = 0;              // N(s)
    std::vector<double> rates;       // R_k(s) = s_k ln M_k / N(s), zeros when N(s) = 0
};

/// Precomputed lengths and rates for every schedule in S_K.
struct ScheduleTable {
    std::size_t num_receivers = 0;
    std::int64_t k_max = 0;
    std::vector<Schedule> schedules;       // enumeration order
    std::map<Schedule, std::size_t> index; // schedule -> position in `schedules`
    std::vector<ScheduleEntry> entries;

    const ScheduleEntry& at(const Schedule& s) const {
        auto it = index.find(s);
        if (it == index.end()) throw MissingLength("schedule table: schedule not tabulated");
        return entries[it->second];
    }

    /// Per-slot service share v_j(s) = s_j / N(s), 0 when s_j = 0.
    double service_share(const Schedule& s, std::size_t j) const {
        const ScheduleEntry& e = at(s);
        if (s.s[j - 1] == 0 || e.n == 0) return 0.0;
        return static_cast<double>(s.s[j - 1]) / static_cast<double>(e.n);
    }
};

inline ScheduleTable build_schedule_table(std::size_t j_receivers, std::int64_t k_max,
                                          const CodingConfig& cfg, const ExponentTable& tab) {
    cfg.validate();
    if (j_receivers != tab.num_receivers)
        throw InvalidParameter("schedule table: receiver count mismatch with exponent table");
    if (cfg.rho != tab.rho)
        throw InvalidParameter("schedule table: rho mismatch between coding config and exponent table");
    ScheduleTable tbl;
    tbl.num_receivers = j_receivers;
    tbl.k_max = k_max;
    tbl.schedules = enumerate_schedules(j_receivers, k_max);
    tbl.entries.resize(tbl.schedules.size());
    for (std::size_t i = 0; i < tbl.schedules.size(); ++i) {
        const Schedule& s = tbl.schedules[i];
        tbl.index[s] = i;
        ScheduleEntry& e = tbl.entries[i];
        e.n_rx.assign(j_receivers, 0);
        e.rates.assign(j_receivers, 0.0);
        if (s.total() == 0) continue;
        for (std::size_t j = 1; j <= j_receivers; ++j)
            e.n_rx[j - 1] = codeword_length_rx(s, j, cfg, tab);
        e.n = *std::max_element(e.n_rx.begin(), e.n_rx.end());
        for (std::size_t k = 1; k <= j_receivers; ++k)
            if (e.n > 0)
                e.rates[k - 1] = static_cast<double>(s.s[k - 1])
                               * std::log(static_cast<double>(cfg.m[k - 1]))
                               / static_cast<double>(e.n);
    }
    return tbl;
}

} // namespace dbcsched
