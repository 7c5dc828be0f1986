#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dbcsched/errors.hpp"

namespace dbcsched {

/// Row-stochastic transition matrix: rows index input letters, columns
/// index output letters, entries are P(output | input).
struct StochasticMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> probs; // row-major

    StochasticMatrix() = default;
    StochasticMatrix(std::size_t r, std::size_t c, std::vector<double> p)
        : rows(r), cols(c), probs(std::move(p)) {}

    double operator()(std::size_t i, std::size_t j) const { return probs[i * cols + j]; }
    double& operator()(std::size_t i, std::size_t j) { return probs[i * cols + j]; }

    void validate(double row_tol = 1e-12) const {
        if (rows == 0 || cols == 0 || probs.size() != rows * cols)
            throw InvalidParameter("stochastic matrix: bad dimensions");
        for (std::size_t i = 0; i < rows; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
                double p = (*this)(i, j);
                if (!(p >= 0.0 && p <= 1.0))
                    throw InvalidParameter("stochastic matrix: entry outside [0,1]");
                sum += p;
            }
            if (std::abs(sum - 1.0) > row_tol)
                throw InvalidParameter("stochastic matrix: row does not sum to 1");
        }
    }

    /// Chains this transition law with `next` (this applied first).
    StochasticMatrix compose(const StochasticMatrix& next) const {
        if (cols != next.rows)
            throw InvalidParameter("stochastic matrix: composition dimension mismatch");
        StochasticMatrix out(rows, next.cols, std::vector<double>(rows * next.cols, 0.0));
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t m = 0; m < cols; ++m) {
                double p = (*this)(i, m);
                if (p == 0.0) continue;
                for (std::size_t j = 0; j < next.cols; ++j)
                    out(i, j) += p * next(m, j);
            }
        return out;
    }

    static StochasticMatrix identity(std::size_t n) {
        StochasticMatrix m(n, n, std::vector<double>(n * n, 0.0));
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    /// Binary symmetric channel with crossover probability eps.
    static StochasticMatrix bsc(double eps) {
        if (!(eps >= 0.0 && eps <= 1.0))
            throw InvalidParameter("bsc: crossover probability outside [0,1]");
        return StochasticMatrix(2, 2, {1.0 - eps, eps, eps, 1.0 - eps});
    }
};

inline void validate_pmf(const std::vector<double>& p, double tol = 1e-12) {
    if (p.empty()) throw InvalidParameter("probability vector: empty");
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0))
            throw InvalidParameter("probability vector: entry outside [0,1]");
        sum += v;
    }
    if (std::abs(sum - 1.0) > tol)
        throw InvalidParameter("probability vector: does not sum to 1");
}

/// Distribution of the output when `input` is pushed through `m`.
inline std::vector<double> push_forward(const std::vector<double>& input, const StochasticMatrix& m) {
    if (input.size() != m.rows)
        throw InvalidParameter("push_forward: dimension mismatch");
    std::vector<double> out(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (input[i] == 0.0) continue;
        for (std::size_t j = 0; j < m.cols; ++j)
            out[j] += input[i] * m(i, j);
    }
    return out;
}

} // namespace dbcsched
