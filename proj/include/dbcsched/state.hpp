#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace dbcsched {

/// One in-flight joint codeword: messages aboard per receiver and the number
/// of selected slots still needed to finish transmission.
struct OngoingTransmission {
    std::vector<std::int64_t> x; // messages in flight per receiver, x_j <= s_j
    std::int64_t t = 0;          // remaining selected-slot count, >= 1
};

/// Queueing state: fresh-message counts per class (receiver, schedule) and at
/// most one ongoing transmission per schedule. Classes and schedules are
/// addressed by the schedule's index in the governing ScheduleTable.
struct SystemState {
    std::size_t num_receivers = 0;
    std::size_t num_schedules = 0;
    std::vector<std::int64_t> fresh;                     // [schedule * J + (j-1)]
    std::vector<std::optional<OngoingTransmission>> ongoing; // per schedule

    SystemState() = default;
    SystemState(std::size_t j_receivers, std::size_t n_schedules)
        : num_receivers(j_receivers), num_schedules(n_schedules),
          fresh(j_receivers * n_schedules, 0), ongoing(n_schedules) {}

    std::int64_t& fresh_count(std::size_t sched_idx, std::size_t j) {
        return fresh[sched_idx * num_receivers + (j - 1)];
    }
    std::int64_t fresh_count(std::size_t sched_idx, std::size_t j) const {
        return fresh[sched_idx * num_receivers + (j - 1)];
    }

    bool empty() const {
        for (auto f : fresh)
            if (f != 0) return false;
        for (const auto& o : ongoing)
            if (o.has_value()) return false;
        return true;
    }
};

} // namespace dbcsched
