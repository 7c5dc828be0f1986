#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "dbcsched/channel.hpp"
#include "dbcsched/coding.hpp"

namespace dbcsched::testutil {

inline std::vector<double> random_pmf(std::mt19937_64& rng, std::size_t n, double sharpness = 1.0) {
    std::uniform_real_distribution<double> unif(0.01, 1.0);
    std::vector<double> p(n);
    double sum = 0.0;
    for (auto& v : p) {
        v = std::pow(unif(rng), sharpness);
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return p;
}

inline StochasticMatrix random_stochastic(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                          double sharpness = 1.0) {
    std::vector<double> probs;
    for (std::size_t i = 0; i < rows; ++i) {
        auto row = random_pmf(rng, cols, sharpness);
        probs.insert(probs.end(), row.begin(), row.end());
    }
    return StochasticMatrix(rows, cols, std::move(probs));
}

// A near-diagonal row-stochastic matrix; keeps composed channels informative.
inline StochasticMatrix noisy_identity(std::mt19937_64& rng, std::size_t n, double off_mass) {
    std::vector<double> probs(n * n, 0.0);
    std::uniform_real_distribution<double> unif(0.5, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> noise(n);
        double sum = 0.0;
        for (auto& v : noise) {
            v = unif(rng);
            sum += v;
        }
        for (std::size_t j = 0; j < n; ++j)
            probs[i * n + j] = (i == j ? 1.0 - off_mass : 0.0) + off_mass * noise[j] / sum;
    }
    return StochasticMatrix(n, n, std::move(probs));
}

/// Random degraded broadcast chain with square alphabets throughout.
inline DegradedBroadcastChannel random_channel(std::mt19937_64& rng, std::size_t big_j,
                                               std::size_t alphabet, bool informative = false) {
    DegradedBroadcastChannel ch;
    ch.num_receivers = big_j;
    ch.top_input = random_pmf(rng, alphabet);
    for (std::size_t l = 0; l + 1 < big_j; ++l)
        ch.prefixes.push_back(informative ? noisy_identity(rng, alphabet, 0.3)
                                          : random_stochastic(rng, alphabet, alphabet));
    ch.base = informative ? noisy_identity(rng, alphabet, 0.15)
                          : random_stochastic(rng, alphabet, alphabet);
    for (std::size_t l = 0; l + 1 < big_j; ++l)
        ch.degraders.push_back(informative ? noisy_identity(rng, alphabet, 0.1)
                                           : random_stochastic(rng, alphabet, alphabet));
    ch.validate();
    return ch;
}

/// The J=2 BSC cascade used throughout the tests: base BSC(0.1), degrader
/// BSC(0.05), cloud prefix BSC(0.25), uniform top input.
inline DegradedBroadcastChannel reference_channel() {
    return build_bsc_cascade({0.1, 0.05}, {StochasticMatrix::bsc(0.25)}, {0.5, 0.5});
}

inline CodingConfig reference_coding(double rho = 1.0) {
    CodingConfig cfg;
    cfg.m = {2, 2};
    cfg.p_e = {1e-3, 1e-3};
    cfg.rho = rho;
    return cfg;
}

inline double binary_entropy(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

} // namespace dbcsched::testutil
