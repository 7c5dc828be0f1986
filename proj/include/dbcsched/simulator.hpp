#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "dbcsched/coding.hpp"
#include "dbcsched/errors.hpp"
#include "dbcsched/stability.hpp"
#include "dbcsched/state.hpp"

namespace dbcsched {

/// Seeded uniform stream. All simulator randomness flows through this one
/// generator in a fixed, documented consumption order: per slot, first one
/// draw per receiver for the batch size, then one draw per arriving message
/// for its class assignment (receivers in index order, messages in arrival
/// order), then one draw for the schedule selection. Saturated runs skip the
/// arrival draws entirely.
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1p-53;
    }

    /// Samples an index from an (unnormalized tail tolerated) cdf walk.
    std::size_t sample(const std::vector<double>& pmf) {
        double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < pmf.size(); ++i) {
            acc += pmf[i];
            if (u < acc) return i;
        }
        return pmf.size() - 1;
    }

private:
    std::mt19937_64 engine_;
};

/// Batch-size distribution for one receiver, pmf over {0,...,max_batch}.
struct ArrivalSpec {
    std::vector<double> pmf;

    void validate() const { validate_pmf(pmf); }

    double mean() const {
        double m = 0.0;
        for (std::size_t k = 0; k < pmf.size(); ++k) m += static_cast<double>(k) * pmf[k];
        return m;
    }

    double second_moment() const {
        double m = 0.0;
        for (std::size_t k = 0; k < pmf.size(); ++k)
            m += static_cast<double>(k) * static_cast<double>(k) * pmf[k];
        return m;
    }

    static ArrivalSpec bernoulli(double mean) {
        if (!(mean >= 0.0 && mean <= 1.0))
            throw InvalidParameter("arrival spec: bernoulli mean outside [0,1]");
        return ArrivalSpec{{1.0 - mean, mean}};
    }
};

struct SimConfig {
    Policy policy;
    SplittingMatrix mu;
    ScheduleTable table;
    std::vector<ArrivalSpec> arrivals;   // per receiver; ignored when saturate
    std::int64_t horizon = 0;
    std::uint64_t seed = 1;
    std::int64_t stride = 1;             // sampling stride for the c(alpha) series
    double bandwidth_w = 1.0;            // Hz, reporting only
    bool saturate = false;               // always-backlogged classes
    bool record_drift = false;           // record per-slot Lyapunov drift samples
    std::vector<double> ea_js;           // per-class means, needed when record_drift

    // Cached flattened policy / splitting tables, filled by prepare().
    std::vector<double> sched_pmf;                  // p(s) per table index
    std::vector<std::vector<double>> class_pmf;     // per receiver: pmf over table indices
    std::vector<double> class_mean;                 // EA_js per class (schedule-major)

    void prepare() {
        policy.validate();
        sched_pmf.assign(table.schedules.size(), 0.0);
        for (const auto& [s, p] : policy.probs) sched_pmf[table.index.at(s)] = p;
        class_pmf.assign(table.num_receivers, {});
        for (std::size_t j = 1; j <= table.num_receivers; ++j) {
            std::vector<double> row(table.schedules.size(), 0.0);
            for (const auto& [s, m] : mu.mu[j - 1]) row[table.index.at(s)] = m;
            class_pmf[j - 1] = std::move(row);
        }
        if (!saturate) {
            if (arrivals.size() != table.num_receivers)
                throw InvalidParameter("sim config: one arrival spec per receiver required");
            for (const auto& a : arrivals) a.validate();
        }
        class_mean = ea_js.empty()
            ? std::vector<double>(table.schedules.size() * table.num_receivers, 0.0)
            : ea_js;
        if (horizon < 0) throw InvalidParameter("sim config: horizon must be >= 0");
        if (stride < 1) throw InvalidParameter("sim config: stride must be >= 1");
    }
};

struct SimTrace {
    std::uint64_t seed = 0;
    std::int64_t horizon = 0;
    std::int64_t stride = 1;
    std::size_t num_receivers = 0;
    std::size_t num_classes = 0;

    std::vector<std::int64_t> slots;     // sampled slot numbers
    std::vector<double> c_alpha;         // c(alpha) at sampled slots
    std::vector<std::vector<std::int64_t>> fresh_samples;     // per sample: per-class fresh
    std::vector<std::vector<std::int64_t>> departure_samples; // per sample: per-class cumulative

    std::vector<std::int64_t> arrivals_total;   // per class, end of run
    std::vector<std::int64_t> departures_total; // per class, end of run

    std::vector<std::pair<double, double>> drift_samples; // (c before, V after - V before)
};

namespace detail {

struct StepCounters {
    std::vector<std::int64_t>* arrivals = nullptr;   // per class
    std::vector<std::int64_t>* departures = nullptr; // per class
};

inline void apply_step(SystemState& state, SimRng& rng, const SimConfig& cfg,
                       const StepCounters& counters) {
    const std::size_t big_j = cfg.table.num_receivers;
    // 1) arrivals, each split independently into a class (j, s)
    if (cfg.saturate) {
        for (std::size_t i = 0; i < cfg.table.schedules.size(); ++i) {
            if (cfg.sched_pmf[i] == 0.0) continue;
            const Schedule& s = cfg.table.schedules[i];
            for (std::size_t j = 1; j <= big_j; ++j) {
                std::int64_t want = s.s[j - 1];
                std::int64_t have = state.fresh_count(i, j);
                if (have < want) {
                    if (counters.arrivals)
                        (*counters.arrivals)[i * big_j + (j - 1)] += want - have;
                    state.fresh_count(i, j) = want;
                }
            }
        }
    } else {
        for (std::size_t j = 1; j <= big_j; ++j) {
            std::int64_t batch = static_cast<std::int64_t>(rng.sample(cfg.arrivals[j - 1].pmf));
            for (std::int64_t b = 0; b < batch; ++b) {
                std::size_t i = rng.sample(cfg.class_pmf[j - 1]);
                state.fresh_count(i, j) += 1;
                if (counters.arrivals) (*counters.arrivals)[i * big_j + (j - 1)] += 1;
            }
        }
    }
    // 2) state-independent schedule draw
    std::size_t drawn = rng.sample(cfg.sched_pmf);
    const Schedule& s = cfg.table.schedules[drawn];
    if (s.total() == 0) return;
    // 3a) continue an ongoing transmission of the drawn schedule
    if (state.ongoing[drawn].has_value()) {
        OngoingTransmission& tx = *state.ongoing[drawn];
        if (--tx.t == 0) {
            if (counters.departures)
                for (std::size_t j = 1; j <= big_j; ++j)
                    (*counters.departures)[drawn * big_j + (j - 1)] += tx.x[j - 1];
            state.ongoing[drawn].reset();
        }
        return;
    }
    // 3b) start a new joint message from whatever fresh messages are available
    bool any_fresh = false;
    for (std::size_t j = 1; j <= big_j; ++j)
        if (s.s[j - 1] > 0 && state.fresh_count(drawn, j) > 0) { any_fresh = true; break; }
    if (!any_fresh) return; // 3c) nothing to schedule
    OngoingTransmission tx;
    tx.x.assign(big_j, 0);
    for (std::size_t j = 1; j <= big_j; ++j) {
        std::int64_t take = std::min(state.fresh_count(drawn, j), s.s[j - 1]);
        tx.x[j - 1] = take;
        state.fresh_count(drawn, j) -= take;
    }
    std::int64_t n = cfg.table.entries[drawn].n;
    if (n <= 1) { // single-slot codeword departs immediately
        if (counters.departures)
            for (std::size_t j = 1; j <= big_j; ++j)
                (*counters.departures)[drawn * big_j + (j - 1)] += tx.x[j - 1];
        return;
    }
    tx.t = n - 1; // the starting slot consumes one of the N(s) transmission slots
    state.ongoing[drawn] = std::move(tx);
}

} // namespace detail

/// One slot transition of the Markov chain (arrivals, schedule draw, service).
inline SystemState step(const SystemState& state, SimRng& rng, const SimConfig& cfg) {
    SystemState next = state;
    detail::apply_step(next, rng, cfg, {});
    return next;
}

inline double cost_c(const SystemState& state, const ScheduleTable& tbl) {
    double c = 1.0;
    for (std::size_t i = 0; i < tbl.schedules.size(); ++i)
        for (std::size_t j = 1; j <= tbl.num_receivers; ++j)
            c += class_workload(state, tbl, i, j);
    return c;
}

/// Runs the chain from the empty state for `horizon` slots; deterministic
/// given the seed. Initial state may be overridden for drain experiments.
inline SimTrace run(const SimConfig& cfg_in, const SystemState* initial = nullptr) {
    SimConfig cfg = cfg_in;
    cfg.prepare();
    const std::size_t n_classes = cfg.table.schedules.size() * cfg.table.num_receivers;
    SimTrace trace;
    trace.seed = cfg.seed;
    trace.horizon = cfg.horizon;
    trace.stride = cfg.stride;
    trace.num_receivers = cfg.table.num_receivers;
    trace.num_classes = n_classes;
    trace.arrivals_total.assign(n_classes, 0);
    trace.departures_total.assign(n_classes, 0);

    SystemState state = initial ? *initial
                                : SystemState(cfg.table.num_receivers, cfg.table.schedules.size());
    SimRng rng(cfg.seed);
    detail::StepCounters counters{&trace.arrivals_total, &trace.departures_total};

    double v_prev = 0.0;
    if (cfg.record_drift)
        v_prev = lyapunov_v(state, cfg.policy, cfg.table, cfg.class_mean).v;

    for (std::int64_t slot = 0; slot < cfg.horizon; ++slot) {
        double c_before = 0.0;
        if (cfg.record_drift) c_before = cost_c(state, cfg.table);
        detail::apply_step(state, rng, cfg, counters);
        if (cfg.record_drift) {
            double v_now = lyapunov_v(state, cfg.policy, cfg.table, cfg.class_mean).v;
            trace.drift_samples.emplace_back(c_before, v_now - v_prev);
            v_prev = v_now;
        }
        if ((slot + 1) % cfg.stride == 0 || slot + 1 == cfg.horizon) {
            trace.slots.push_back(slot + 1);
            trace.c_alpha.push_back(cost_c(state, cfg.table));
            trace.fresh_samples.push_back(state.fresh);
            trace.departure_samples.push_back(trace.departures_total);
        }
    }
    return trace;
}

enum class StabilityVerdict { Stable, Unstable, Inconclusive };

struct StabilityEstimate {
    StabilityVerdict verdict = StabilityVerdict::Inconclusive;
    double slope = 0.0; // c(alpha) units per slot, second half of the trace
};

/// Least-squares slope of c(alpha) over the second half of the trace.
/// Stable when the slope is at most eps_s and the second-half mean stays
/// within 20% of the third-quarter mean; Unstable when slope >= 5 eps_s.
inline StabilityEstimate estimate_stability(const SimTrace& trace, double eps_s = 1e-3) {
    const std::size_t n = trace.c_alpha.size();
    if (n < 10000) throw TraceTooShort("estimate_stability: need at least 10^4 samples");
    std::size_t half = n / 2;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double count = static_cast<double>(n - half);
    for (std::size_t i = half; i < n; ++i) {
        double x = static_cast<double>(trace.slots[i]);
        double y = trace.c_alpha[i];
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double denom = count * sxx - sx * sx;
    double slope = denom != 0.0 ? (count * sxy - sx * sy) / denom : 0.0;
    double mean_h2 = sy / count;
    double mean_q3 = 0.0;
    std::size_t q3_end = (3 * n) / 4;
    for (std::size_t i = half; i < q3_end; ++i) mean_q3 += trace.c_alpha[i];
    mean_q3 /= static_cast<double>(q3_end - half);

    StabilityEstimate out;
    out.slope = slope;
    if (slope >= 5.0 * eps_s) out.verdict = StabilityVerdict::Unstable;
    else if (slope <= eps_s && std::abs(mean_h2 - mean_q3) <= 0.2 * mean_q3)
        out.verdict = StabilityVerdict::Stable;
    return out;
}

struct DriftBucket {
    double c_lo = 0.0, c_hi = 0.0;
    std::int64_t count = 0;
    double mean_drift = 0.0;        // empirical mean of V(next) - V(state)
    double mean_drift_plus_c = 0.0; // empirical mean of V(next) - V(state) + c(state)
};

struct DriftReport {
    std::vector<DriftBucket> buckets;
    double c_percentile_90 = 0.0;
};

/// Groups recorded drift samples into equal-count buckets ordered by c(state)
/// and reports per-bucket means of V(next) - V(state) and of
/// V(next) - V(state) + c(state). With the quadratic Lyapunov function the
/// drift mean equals b - c(state) for a constant b set by the arrival second
/// moments, so on a stable run the drift mean turns negative past a finite
/// threshold bucket while the drift-plus-c mean stays bounded by b. Equal-count
/// buckets keep the tail estimates from degenerating into single-sample noise.
inline DriftReport empirical_drift_check(const SimTrace& trace, std::size_t n_buckets = 32) {
    if (trace.drift_samples.empty())
        throw InvalidParameter("empirical_drift_check: trace has no drift samples");
    std::vector<std::pair<double, double>> samples = trace.drift_samples;
    std::sort(samples.begin(), samples.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t n = samples.size();
    n_buckets = std::min(n_buckets, n);
    DriftReport report;
    std::size_t begin = 0;
    for (std::size_t b = 0; b < n_buckets; ++b) {
        std::size_t end = (n * (b + 1)) / n_buckets;
        if (end <= begin) continue;
        DriftBucket bucket;
        bucket.c_lo = samples[begin].first;
        bucket.c_hi = samples[end - 1].first;
        bucket.count = static_cast<std::int64_t>(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            bucket.mean_drift += samples[i].second;
            bucket.mean_drift_plus_c += samples[i].second + samples[i].first;
        }
        bucket.mean_drift /= static_cast<double>(bucket.count);
        bucket.mean_drift_plus_c /= static_cast<double>(bucket.count);
        report.buckets.push_back(bucket);
        begin = end;
    }
    report.c_percentile_90 = samples[(n * 9) / 10].first;
    return report;
}

} // namespace dbcsched
