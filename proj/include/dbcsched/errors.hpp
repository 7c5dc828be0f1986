#pragma once

#include <stdexcept>
#include <string>

namespace dbcsched {

struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IndexOutOfRange : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct InvalidSchedule : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateChannel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingLength : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnservedReceiver : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotInDriftRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TraceTooShort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    ValidationError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_path(field) {}
    std::string field_path;
};

} // namespace dbcsched
