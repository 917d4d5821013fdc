#ifndef DFLPLAN_STRIPS_H
#define DFLPLAN_STRIPS_H

#include <cstdint>
#include <string>
#include <vector>

#include "dflplan/common.h"

namespace dflplan {

// Fixed-width bitset over proposition ids, sized once at task load.
// Propositions not set are false.
class State {
public:
    State() = default;
    explicit State(int num_props)
        : num_bits(num_props), blocks((num_props + 63) / 64, 0) {}

    bool test(int p) const {
        return (blocks[p >> 6] >> (p & 63)) & 1;
    }
    void set(int p) { blocks[p >> 6] |= uint64_t{1} << (p & 63); }
    void reset(int p) { blocks[p >> 6] &= ~(uint64_t{1} << (p & 63)); }

    // true iff every bit of `sub` is also set here
    bool contains_all(const State& sub) const {
        for (size_t i = 0; i < blocks.size(); ++i)
            if (sub.blocks[i] & ~blocks[i])
                return false;
        return true;
    }

    void add_all(const State& other) {
        for (size_t i = 0; i < blocks.size(); ++i)
            blocks[i] |= other.blocks[i];
    }
    void remove_all(const State& other) {
        for (size_t i = 0; i < blocks.size(); ++i)
            blocks[i] &= ~other.blocks[i];
    }

    bool operator==(const State& other) const {
        return blocks == other.blocks;
    }

    int size() const { return num_bits; }

    uint64_t hash() const {
        uint64_t h = 14695981039346656037ull;
        for (uint64_t b : blocks) {
            h ^= b;
            h *= 1099511628211ull;
        }
        return h;
    }

private:
    int num_bits = 0;
    std::vector<uint64_t> blocks;
};

struct StateHash {
    size_t operator()(const State& s) const { return s.hash(); }
};

struct Proposition {
    int id;
    std::string name;
};

struct GroundedAction {
    int id;  // position in the task's fixed action ordering
    std::string name;
    std::vector<int> pre, add, del;  // sorted proposition ids, add/del disjoint
    State pre_mask, add_mask, del_mask;
};

// Immutable after construction via make_task/load; safe to share.
struct GroundedTask {
    std::vector<Proposition> propositions;
    std::vector<GroundedAction> actions;  // index == action id == cost index
    State init;
    std::vector<int> goal;  // sorted proposition ids
    State goal_mask;

    int num_propositions() const { return static_cast<int>(propositions.size()); }
    int num_actions() const { return static_cast<int>(actions.size()); }
};

struct ActionSpec {
    std::string name;
    std::vector<int> pre, add, del;
};

// Builds a task, normalizing add/del overlap in favor of add and validating
// all id ranges and name uniqueness. Throws TaskFormatError on violation.
GroundedTask make_task(std::vector<std::string> proposition_names,
                       std::vector<ActionSpec> action_specs,
                       const std::vector<int>& init,
                       const std::vector<int>& goal);

bool applicable(const State& state, const GroundedAction& action);

// (state \ del) ∪ add. Throws if the action is not applicable.
State apply(const State& state, const GroundedAction& action);

bool validate_plan(const GroundedTask& task, const Plan& plan);

double plan_cost(const Plan& plan, const CostVector& costs);

ActionCountVector to_action_count_vector(const GroundedTask& task, const Plan& plan);

// Dot product; throws on length mismatch.
double inner_cost(const CostVector& costs, const ActionCountVector& acv);

bool goal_satisfied(const GroundedTask& task, const State& state);

}  // namespace dflplan

#endif
