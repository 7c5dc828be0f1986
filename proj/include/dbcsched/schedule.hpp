#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "dbcsched/errors.hpp"

namespace dbcsched {

/// A schedule assigns a nonnegative message count to each receiver.
struct Schedule {
    std::vector<std::int64_t> s;

    Schedule() = default;
    explicit Schedule(std::vector<std::int64_t> counts) : s(std::move(counts)) {}

    std::int64_t total() const { return std::accumulate(s.begin(), s.end(), std::int64_t{0}); }
    std::size_t num_receivers() const { return s.size(); }

    auto operator<=>(const Schedule&) const = default;

    std::string to_string() const {
        std::string out = "(";
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(s[i]);
        }
        return out + ")";
    }
};

/// All schedules with sum(s_j) <= K, in lexicographic order.
/// Count is binomial(K+J, J).
inline std::vector<Schedule> enumerate_schedules(std::size_t j_receivers, std::int64_t k_max) {
    if (j_receivers < 1) throw InvalidParameter("enumerate_schedules: J must be >= 1");
    if (k_max < 1) throw InvalidParameter("enumerate_schedules: K must be >= 1");
    std::vector<Schedule> out;
    Schedule cur(std::vector<std::int64_t>(j_receivers, 0));
    // odometer in lexicographic order with budget constraint
    while (true) {
        out.push_back(cur);
        std::size_t d = j_receivers;
        while (d-- > 0) {
            ++cur.s[d];
            if (cur.total() <= k_max) break;
            cur.s[d] = 0;
            if (d == 0) return out;
        }
    }
}

/// All nonzero componentwise-dominated sub-schedules of s.
/// Count is prod(s_j + 1) - 1.
inline std::vector<Schedule> subsets(const Schedule& s) {
    if (s.total() == 0) throw InvalidSchedule("subsets: all-zero schedule");
    std::vector<Schedule> out;
    Schedule cur(std::vector<std::int64_t>(s.s.size(), 0));
    while (true) {
        std::size_t d = s.s.size();
        bool advanced = false;
        while (d-- > 0) {
            if (cur.s[d] < s.s[d]) { ++cur.s[d]; advanced = true; break; }
            cur.s[d] = 0;
        }
        if (!advanced) return out;
        out.push_back(cur);
    }
}

} // namespace dbcsched
