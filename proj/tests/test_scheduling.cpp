#include <doctest.h>

#include <cmath>
#include <set>

#include "dbcsched/coding.hpp"
#include "test_util.hpp"

using namespace dbcsched;
namespace tu = dbcsched::testutil;

namespace {

// independent brute-force oracle: scan N = 1, 2, 3, ... until chi meets the target
std::int64_t scan_length(const Schedule& s, std::size_t j, const CodingConfig& cfg,
                         const ExponentTable& tab) {
    if (detail::active_sources(s, j, tab.num_receivers).empty()) return 0;
    for (std::int64_t n = 1;; ++n)
        if (chi(s, n, j, cfg, tab) <= cfg.p_e[j - 1]) return n;
}

std::int64_t binom(std::int64_t n, std::int64_t k) {
    std::int64_t r = 1;
    for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace

TEST_CASE("schedule enumeration") {
    SUBCASE("J=1, K=2") {
        auto v = enumerate_schedules(1, 2);
        REQUIRE(v.size() == 3);
        CHECK(v[0] == Schedule({0}));
        CHECK(v[1] == Schedule({1}));
        CHECK(v[2] == Schedule({2}));
    }
    SUBCASE("J=2, K=1 has the three small schedules") {
        auto v = enumerate_schedules(2, 1);
        std::set<Schedule> got(v.begin(), v.end());
        CHECK(got == std::set<Schedule>{Schedule({0, 0}), Schedule({1, 0}), Schedule({0, 1})});
    }
    SUBCASE("counts follow stars and bars") {
        for (std::size_t j = 1; j <= 3; ++j)
            for (std::int64_t k = 1; k <= 4; ++k) {
                auto v = enumerate_schedules(j, k);
                CHECK(static_cast<std::int64_t>(v.size()) == binom(k + static_cast<std::int64_t>(j), static_cast<std::int64_t>(j)));
                CHECK(std::is_sorted(v.begin(), v.end())); // lexicographic, no repeats
                CHECK(std::adjacent_find(v.begin(), v.end()) == v.end());
            }
    }
    CHECK_THROWS_AS(enumerate_schedules(0, 1), InvalidParameter);
    CHECK_THROWS_AS(enumerate_schedules(2, 0), InvalidParameter);
}

TEST_CASE("schedule subsets") {
    CHECK(subsets(Schedule({1, 0})) == std::vector<Schedule>{Schedule({1, 0})});
    CHECK(subsets(Schedule({1, 1})).size() == 3);
    CHECK(subsets(Schedule({2, 1})).size() == 5); // (2+1)(1+1) - 1
    CHECK_THROWS_AS(subsets(Schedule({0, 0})), InvalidSchedule);
}

TEST_CASE("chi bound") {
    auto ch = tu::reference_channel();
    auto cfg = tu::reference_coding();
    auto tab = exponent_table(ch, cfg.rho);

    SUBCASE("empty active set gives zero") {
        CHECK(chi(Schedule({1, 0}), 10, 2, cfg, tab) == 0.0);
    }

    SUBCASE("single term reduces to one exponential") {
        Schedule s({1, 0});
        double eo = tab.at(1, 1);
        for (std::int64_t n : {1, 5, 40})
            CHECK(chi(s, n, 1, cfg, tab)
                  == doctest::Approx(std::exp(-(n * eo - cfg.rho * std::log(2.0)))));
    }

    SUBCASE("two-term sum matches brute-force evaluation") {
        Schedule s({1, 1});
        // oracle: assemble the sum directly from the table entries
        double expect = std::exp(-(50.0 * tab.at(1, 1) - std::log(2.0)))
                      + std::exp(-(50.0 * tab.at(2, 1) - std::log(2.0)));
        CHECK(chi(s, 50, 1, cfg, tab) == doctest::Approx(expect).epsilon(1e-12));
    }

    SUBCASE("strictly decreasing in N on active schedules") {
        Schedule s({2, 1});
        for (std::size_t j = 1; j <= 2; ++j) {
            double prev = chi(s, 1, j, cfg, tab);
            for (std::int64_t n = 2; n <= 200; ++n) {
                double cur = chi(s, n, j, cfg, tab);
                CHECK(cur < prev);
                prev = cur;
            }
        }
    }
}

TEST_CASE("ceil-to-multiple helper") {
    CHECK(detail::ceil_to_multiple(2.5, 1.0) == doctest::Approx(3.0));
    CHECK(detail::ceil_to_multiple(3.0, 1.0) == doctest::Approx(3.0));
    CHECK(detail::ceil_to_multiple(0.2, 0.5) == doctest::Approx(0.5));
}

TEST_CASE("codeword lengths against the scan oracle") {
    auto ch = tu::reference_channel();
    auto cfg = tu::reference_coding();
    auto tab = exponent_table(ch, cfg.rho);

    SUBCASE("empty active set") {
        CHECK(codeword_length_rx(Schedule({1, 0}), 2, cfg, tab) == 0);
    }

    SUBCASE("single active term has the one-term inversion") {
        Schedule s({1, 0});
        double eo = tab.at(1, 1);
        auto expect = static_cast<std::int64_t>(
            std::ceil((-std::log(cfg.p_e[0]) + cfg.rho * std::log(2.0)) / eo));
        CHECK(codeword_length_rx(s, 1, cfg, tab) == expect);
        auto b = length_bounds(s, 1, cfg, tab);
        CHECK(b.lower == expect);
        CHECK(b.upper == expect);
    }

    SUBCASE("every schedule in S_3: scan oracle, sandwich, monotonicity") {
        auto schedules = enumerate_schedules(2, 3);
        for (const auto& s : schedules) {
            if (s.total() == 0) continue;
            for (std::size_t j = 1; j <= 2; ++j) {
                std::int64_t n = codeword_length_rx(s, j, cfg, tab);
                CHECK(n == scan_length(s, j, cfg, tab));
                if (n > 0) {
                    auto b = length_bounds(s, j, cfg, tab);
                    CHECK(b.lower <= n);
                    CHECK(n <= b.upper);
                }
                for (const auto& sub : subsets(s))
                    CHECK(codeword_length_rx(sub, j, cfg, tab) <= n);
            }
        }
    }

    SUBCASE("N(s) is the max and meets every receiver's target") {
        Schedule s({1, 1});
        std::int64_t n = codeword_length(s, cfg, tab);
        CHECK(n == std::max(codeword_length_rx(s, 1, cfg, tab), codeword_length_rx(s, 2, cfg, tab)));
        for (std::size_t j = 1; j <= 2; ++j) CHECK(chi(s, n, j, cfg, tab) <= cfg.p_e[j - 1]);
        CHECK_THROWS_AS(codeword_length(Schedule({0, 0}), cfg, tab), InvalidSchedule);
    }

    SUBCASE("vanishing exponent is infeasible") {
        DegradedBroadcastChannel flat;
        flat.num_receivers = 1;
        flat.top_input = {0.5, 0.5};
        flat.base = StochasticMatrix(2, 2, {0.5, 0.5, 0.5, 0.5});
        auto ftab = exponent_table(flat, 1.0);
        CodingConfig fcfg;
        fcfg.m = {2};
        fcfg.p_e = {1e-3};
        CHECK_THROWS_AS(codeword_length_rx(Schedule({1}), 1, fcfg, ftab), Infeasible);
    }
}

TEST_CASE("schedule table") {
    auto ch = tu::reference_channel();
    auto cfg = tu::reference_coding();
    auto tab = exponent_table(ch, cfg.rho);
    auto tbl = build_schedule_table(2, 3, cfg, tab);

    CHECK(tbl.schedules.size() == 10); // binom(5,2)

    SUBCASE("rate consistency: R_k(s) N(s) = s_k ln M_k") {
        for (std::size_t i = 0; i < tbl.schedules.size(); ++i) {
            const auto& s = tbl.schedules[i];
            const auto& e = tbl.entries[i];
            if (e.n == 0) continue;
            for (std::size_t k = 1; k <= 2; ++k)
                CHECK(e.rates[k - 1] * static_cast<double>(e.n)
                      == doctest::Approx(static_cast<double>(s.s[k - 1]) * std::log(2.0))
                             .epsilon(1e-12));
        }
    }

    SUBCASE("N(s) = max_j N_j(s)") {
        for (const auto& e : tbl.entries)
            CHECK(e.n == *std::max_element(e.n_rx.begin(), e.n_rx.end()));
    }

    SUBCASE("untabulated schedule raises") {
        CHECK_THROWS_AS(tbl.at(Schedule({4, 0})), MissingLength);
    }
}
