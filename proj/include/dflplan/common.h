#ifndef DFLPLAN_COMMON_H
#define DFLPLAN_COMMON_H

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dflplan {

// Costs and gradients live in action-index space: entry i belongs to the
// action with id i, so a cost vector, an action count vector and a plan all
// agree on the same fixed action ordering.
using CostVector = std::vector<double>;
using ActionCountVector = std::vector<int>;
using Plan = std::vector<int>;  // sequence of action ids

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// No plan exists for the task under the given costs.
struct UnsolvableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The explicit-state oracle hit its reachable-state bound.
struct StateSpaceTooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lookup on a solution cache with no entries.
struct EmptyCacheError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The task does not have the single-token acyclic-path shape the exact
// oracle requires.
struct NotADagError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed task/dataset/model file. Messages carry the JSON path of the
// first violation.
struct TaskFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad CLI or experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace dflplan

#endif
