#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "dbcsched/channel.hpp"
#include "dbcsched/errors.hpp"
#include "dbcsched/schedule.hpp"

namespace dbcsched {

namespace detail {

// Inner Gallager sum over y for one conditional input law:
//   sum_y ( sum_x q(x) w(y|x)^{1/(1+rho)} )^{1+rho}
inline double gallager_inner(const std::vector<double>& q, const StochasticMatrix& w, double rho) {
    double total = 0.0;
    for (std::size_t y = 0; y < w.cols; ++y) {
        double acc = 0.0;
        for (std::size_t x = 0; x < w.rows; ++x) {
            if (q[x] == 0.0) continue;
            acc += q[x] * std::pow(w(x, y), 1.0 / (1.0 + rho));
        }
        total += std::pow(acc, 1.0 + rho);
    }
    return total;
}

} // namespace detail

/// Random-coding exponent E_{o,X_k,Y_j}(rho) in nats.
///
/// For k < J the outer sum runs over all tuples (x_J,...,x_{k+1}) weighted by
/// q_J and the prefix laws, with inner input law q_k(.|x_{k+1}) over the
/// effective channel X_k -> Y_j. For k = J the marginal q_J is used directly.
/// Values below 1e-12 are clamped to 0.
inline double e0(const DegradedBroadcastChannel& ch, std::size_t k, std::size_t j, double rho) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw InvalidParameter("e0: rho outside [0,1]");
    if (j < 1 || k > ch.num_receivers || j > k)
        throw InvalidParameter("e0: need 1 <= j <= k <= J");
    StochasticMatrix w = effective_channel(ch, k, j);
    double total = 0.0;
    std::size_t big_j = ch.num_receivers;
    if (k == big_j) {
        total = detail::gallager_inner(ch.top_input, w, rho);
    } else {
        // Odometer over (x_J, ..., x_{k+1}); levels J down to k+1.
        std::size_t depth = big_j - k;
        std::vector<std::size_t> idx(depth, 0);
        std::vector<std::size_t> sizes(depth);
        for (std::size_t d = 0; d < depth; ++d) sizes[d] = ch.input_alphabet(big_j - d);
        const StochasticMatrix& qk = ch.prefix(k);
        std::vector<double> inner_q(qk.cols);
        bool done = false;
        while (!done) {
            double weight = ch.top_input[idx[0]];
            for (std::size_t d = 1; d < depth; ++d)
                weight *= ch.prefix(big_j - d)(idx[d - 1], idx[d]);
            if (weight > 0.0) {
                std::size_t x_next = idx[depth - 1]; // value of x_{k+1}
                for (std::size_t x = 0; x < qk.cols; ++x) inner_q[x] = qk(x_next, x);
                total += weight * detail::gallager_inner(inner_q, w, rho);
            }
            done = true;
            for (std::size_t d = depth; d-- > 0;) {
                if (++idx[d] < sizes[d]) { done = false; break; }
                idx[d] = 0;
            }
        }
    }
    double value = -std::log(total);
    return value < 1e-12 ? 0.0 : value;
}

/// Upper-triangular cache of E_{o,X_k,Y_j}(rho) for all j <= k.
struct ExponentTable {
    double rho = 1.0;
    std::size_t num_receivers = 0;
    std::vector<double> values; // row-major J x J, entry (k,j) valid for j <= k

    double at(std::size_t k, std::size_t j) const {
        if (j < 1 || k > num_receivers || j > k)
            throw IndexOutOfRange("exponent table: need 1 <= j <= k <= J");
        return values[(k - 1) * num_receivers + (j - 1)];
    }
};

inline ExponentTable exponent_table(const DegradedBroadcastChannel& ch, double rho) {
    if (!(rho > 0.0 && rho <= 1.0))
        throw InvalidParameter("exponent_table: rho outside (0,1]");
    ExponentTable tab;
    tab.rho = rho;
    tab.num_receivers = ch.num_receivers;
    tab.values.assign(ch.num_receivers * ch.num_receivers, 0.0);
    for (std::size_t k = 1; k <= ch.num_receivers; ++k)
        for (std::size_t j = 1; j <= k; ++j)
            tab.values[(k - 1) * ch.num_receivers + (j - 1)] = e0(ch, k, j, rho);
    // E_{o,X_k,Y_j} >= E_{o,X_k,Y_k}: decoding at a less degraded receiver
    // can only improve the exponent.
    for (std::size_t k = 1; k <= ch.num_receivers; ++k)
        for (std::size_t j = 1; j <= k; ++j)
            if (tab.at(k, j) < tab.at(k, k) - 1e-9)
                throw DegenerateChannel("exponent table: degradation ordering violated");
    return tab;
}

struct RhoSweepPoint {
    double rho = 0.0;
    double min_exponent = 0.0; // min over (k,j) pairs of E_o at this rho
};

struct RhoSweepResult {
    std::vector<RhoSweepPoint> points;
    double best_rho = 0.0; // argmax of the minimum exponent over the grid
};

/// Sweeps rho over the grid {0.05, 0.10, ..., 1.0} and reports, per grid
/// point, the smallest exponent across all (k,j) pairs. Advisory only: all
/// downstream length and stability math uses one fixed configured rho.
inline RhoSweepResult rho_sweep(const DegradedBroadcastChannel& ch, std::size_t steps = 20) {
    if (steps < 1) throw InvalidParameter("rho_sweep: need at least one grid point");
    RhoSweepResult out;
    double best = -1.0;
    for (std::size_t i = 0; i < steps; ++i) {
        double rho = steps == 1 ? 1.0
                                : 0.05 + (1.0 - 0.05) * static_cast<double>(i)
                                             / static_cast<double>(steps - 1);
        double min_e = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k <= ch.num_receivers; ++k)
            for (std::size_t j = 1; j <= k; ++j)
                min_e = std::min(min_e, e0(ch, k, j, rho));
        out.points.push_back({rho, min_e});
        if (min_e > best) {
            best = min_e;
            out.best_rho = rho;
        }
    }
    return out;
}

/// Asymptotic per-schedule rate, common-alphabet regime (all M_j = M -> inf):
/// min over receivers j and sources k >= j with s_k > 0 of (s_i/s_k) E_{o,X_k,Y_j}/rho.
inline double asymptotic_rate_r1(const ExponentTable& tab, const Schedule& s, std::size_t i) {
    if (s.total() == 0) throw InvalidSchedule("asymptotic_rate_r1: all-zero schedule");
    if (i < 1 || i > tab.num_receivers)
        throw IndexOutOfRange("asymptotic_rate_r1: receiver index outside 1..J");
    if (s.s[i - 1] == 0) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j <= tab.num_receivers; ++j)
        for (std::size_t k = j; k <= tab.num_receivers; ++k) {
            if (s.s[k - 1] == 0) continue;
            double cand = (static_cast<double>(s.s[i - 1]) / s.s[k - 1]) * tab.at(k, j) / tab.rho;
            best = std::min(best, cand);
        }
    return best;
}

/// Asymptotic rate, common-multiplicity regime (all s_j = t -> inf):
/// min over j <= k of (ln M_i / ln M_k) E_{o,X_k,Y_j}/rho.
inline double asymptotic_rate_r2(const ExponentTable& tab, const std::vector<std::uint64_t>& m,
                                 std::size_t i) {
    if (m.size() != tab.num_receivers)
        throw InvalidParameter("asymptotic_rate_r2: alphabet vector size mismatch");
    for (std::uint64_t mk : m)
        if (mk < 2) throw InvalidParameter("asymptotic_rate_r2: every M_k must be >= 2");
    if (i < 1 || i > tab.num_receivers)
        throw IndexOutOfRange("asymptotic_rate_r2: receiver index outside 1..J");
    double best = std::numeric_limits<double>::infinity();
    double log_mi = std::log(static_cast<double>(m[i - 1]));
    for (std::size_t j = 1; j <= tab.num_receivers; ++j)
        for (std::size_t k = j; k <= tab.num_receivers; ++k) {
            double cand = (log_mi / std::log(static_cast<double>(m[k - 1]))) * tab.at(k, j) / tab.rho;
            best = std::min(best, cand);
        }
    return best;
}

} // namespace dbcsched
