#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dbcsched/errors.hpp"
#include "dbcsched/stochastic_matrix.hpp"

namespace dbcsched {

/// Finite-alphabet degraded broadcast channel with J receivers.
///
/// The generating chain is X_J -> X_{J-1} -> ... -> X_1 -> Y_1 -> ... -> Y_J.
/// `top_input` is the distribution of X_J, `prefixes` hold the conditional
/// input laws q_{J-1}(x_{J-1}|x_J) down to q_1(x_1|x_2), `base` is the
/// physical channel X_1 -> Y_1, and `degraders` map Y_1 -> Y_2 up to
/// Y_{J-1} -> Y_J. Receiver indices are 1-based throughout.
struct DegradedBroadcastChannel {
    std::size_t num_receivers = 0;              // J
    std::vector<double> top_input;              // law of X_J
    std::vector<StochasticMatrix> prefixes;     // [0] = q_{J-1}, ..., [J-2] = q_1
    StochasticMatrix base;                      // p(y_1|x_1)
    std::vector<StochasticMatrix> degraders;    // [0] = p_2, ..., [J-2] = p_J

    /// q_l(x_l|x_{l+1}) for 1 <= l <= J-1.
    const StochasticMatrix& prefix(std::size_t l) const {
        if (l < 1 || l >= num_receivers)
            throw IndexOutOfRange("prefix index outside 1..J-1");
        return prefixes[num_receivers - 1 - l];
    }

    /// p_l(y_l|y_{l-1}) for 2 <= l <= J.
    const StochasticMatrix& degrader(std::size_t l) const {
        if (l < 2 || l > num_receivers)
            throw IndexOutOfRange("degrader index outside 2..J");
        return degraders[l - 2];
    }

    /// Alphabet size of X_k.
    std::size_t input_alphabet(std::size_t k) const {
        if (k < 1 || k > num_receivers)
            throw IndexOutOfRange("receiver index outside 1..J");
        if (k == num_receivers) return top_input.size();
        return prefix(k).cols;
    }

    void validate() const {
        if (num_receivers < 1) throw InvalidParameter("channel: J must be >= 1");
        if (prefixes.size() != num_receivers - 1)
            throw InvalidParameter("channel: expected J-1 prefix matrices");
        if (degraders.size() != num_receivers - 1)
            throw InvalidParameter("channel: expected J-1 degrading matrices");
        validate_pmf(top_input);
        std::size_t expect = top_input.size();
        for (std::size_t i = 0; i < prefixes.size(); ++i) {
            prefixes[i].validate();
            if (prefixes[i].rows != expect)
                throw InvalidParameter("channel: prefix chain dimension mismatch");
            expect = prefixes[i].cols;
        }
        base.validate();
        if (base.rows != expect)
            throw InvalidParameter("channel: base input dimension mismatch");
        expect = base.cols;
        for (std::size_t i = 0; i < degraders.size(); ++i) {
            degraders[i].validate();
            if (degraders[i].rows != expect)
                throw InvalidParameter("channel: degrading chain dimension mismatch");
            expect = degraders[i].cols;
        }
    }
};

/// Transition law of the effective channel X_k -> Y_j, obtained by chaining
/// the prefixes q_{k-1},...,q_1, the base channel, and degraders p_2,...,p_j.
inline StochasticMatrix effective_channel(const DegradedBroadcastChannel& ch,
                                          std::size_t k, std::size_t j) {
    if (k < 1 || k > ch.num_receivers || j < 1 || j > ch.num_receivers)
        throw IndexOutOfRange("effective_channel: receiver index outside 1..J");
    StochasticMatrix m = (k >= 2) ? ch.prefix(k - 1) : ch.base;
    if (k >= 2) {
        for (std::size_t l = k - 1; l >= 2; --l) m = m.compose(ch.prefix(l - 1));
        m = m.compose(ch.base);
    }
    for (std::size_t l = 2; l <= j; ++l) m = m.compose(ch.degrader(l));
    return m;
}

/// Marginal law of X_k, pushing top_input through q_{J-1},...,q_k.
inline std::vector<double> marginal_input(const DegradedBroadcastChannel& ch, std::size_t k) {
    if (k < 1 || k > ch.num_receivers)
        throw IndexOutOfRange("marginal_input: receiver index outside 1..J");
    std::vector<double> v = ch.top_input;
    for (std::size_t l = ch.num_receivers - 1; l + 1 > k; --l)
        v = push_forward(v, ch.prefix(l));
    return v;
}

/// I(X;Y) in nats for input law `input` and channel `w`, with 0 ln 0 := 0.
inline double mutual_information(const std::vector<double>& input, const StochasticMatrix& w) {
    std::vector<double> out = push_forward(input, w);
    double mi = 0.0;
    for (std::size_t x = 0; x < w.rows; ++x) {
        if (input[x] == 0.0) continue;
        for (std::size_t y = 0; y < w.cols; ++y) {
            double p = w(x, y);
            if (p <= 0.0 || out[y] <= 0.0) continue;
            mi += input[x] * p * std::log(p / out[y]);
        }
    }
    return mi < 0.0 ? 0.0 : mi;
}

/// I(X_k; Y_j | X_{k+1}) in nats; for k = J this is I(X_J; Y_j).
inline double conditional_mutual_information(const DegradedBroadcastChannel& ch,
                                             std::size_t k, std::size_t j) {
    StochasticMatrix w = effective_channel(ch, k, j);
    if (k == ch.num_receivers)
        return mutual_information(marginal_input(ch, k), w);
    std::vector<double> cond = marginal_input(ch, k + 1);
    const StochasticMatrix& q = ch.prefix(k);
    double mi = 0.0;
    for (std::size_t u = 0; u < cond.size(); ++u) {
        if (cond[u] == 0.0) continue;
        std::vector<double> row(q.cols);
        for (std::size_t x = 0; x < q.cols; ++x) row[x] = q(u, x);
        mi += cond[u] * mutual_information(row, w);
    }
    return mi;
}

struct MutualInfoVector {
    std::vector<double> values; // entry j-1 holds I(X_j;Y_j|X_{j+1}), entry J-1 holds I(X_J;Y_J)
};

inline MutualInfoVector mutual_information_vector(const DegradedBroadcastChannel& ch) {
    MutualInfoVector out;
    out.values.resize(ch.num_receivers);
    for (std::size_t j = 1; j <= ch.num_receivers; ++j)
        out.values[j - 1] = conditional_mutual_information(ch, j, j);
    return out;
}

/// Canonical binary test channel: base BSC(eps[0]), degrader l = BSC(eps[l-1]).
inline DegradedBroadcastChannel build_bsc_cascade(const std::vector<double>& eps,
                                                  const std::vector<StochasticMatrix>& prefixes,
                                                  const std::vector<double>& top_input) {
    if (eps.empty()) throw InvalidParameter("bsc_cascade: need at least one epsilon");
    for (double e : eps)
        if (!(e >= 0.0 && e <= 0.5))
            throw InvalidParameter("bsc_cascade: epsilon outside [0, 1/2]");
    if (prefixes.size() != eps.size() - 1)
        throw InvalidParameter("bsc_cascade: expected J-1 prefix matrices");
    DegradedBroadcastChannel ch;
    ch.num_receivers = eps.size();
    ch.top_input = top_input;
    ch.prefixes = prefixes;
    ch.base = StochasticMatrix::bsc(eps[0]);
    for (std::size_t l = 1; l < eps.size(); ++l)
        ch.degraders.push_back(StochasticMatrix::bsc(eps[l]));
    ch.validate();
    return ch;
}

} // namespace dbcsched
