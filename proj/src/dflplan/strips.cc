#include "dflplan/strips.h"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace dflplan {

namespace {

void check_ids_in_range(const std::vector<int>& ids, int num_props,
                        const std::string& where) {
    for (int p : ids) {
        if (p < 0 || p >= num_props)
            throw TaskFormatError(where + ": proposition id " + std::to_string(p) +
                                  " out of range [0, " + std::to_string(num_props) + ")");
    }
}

std::vector<int> sorted_unique(std::vector<int> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

State mask_of(const std::vector<int>& ids, int num_props) {
    State s(num_props);
    for (int p : ids)
        s.set(p);
    return s;
}

}  // namespace

GroundedTask make_task(std::vector<std::string> proposition_names,
                       std::vector<ActionSpec> action_specs,
                       const std::vector<int>& init,
                       const std::vector<int>& goal) {
    GroundedTask task;
    int num_props = static_cast<int>(proposition_names.size());

    std::unordered_set<std::string> seen_names;
    for (int i = 0; i < num_props; ++i) {
        if (!seen_names.insert(proposition_names[i]).second)
            throw TaskFormatError("propositions[" + std::to_string(i) +
                                  "]: duplicate name '" + proposition_names[i] + "'");
        task.propositions.push_back({i, std::move(proposition_names[i])});
    }

    if (action_specs.empty())
        throw TaskFormatError("actions: task must have at least one action");

    task.actions.reserve(action_specs.size());
    for (size_t i = 0; i < action_specs.size(); ++i) {
        ActionSpec& spec = action_specs[i];
        std::string where = "actions[" + std::to_string(i) + "]";
        check_ids_in_range(spec.pre, num_props, where + ".pre");
        check_ids_in_range(spec.add, num_props, where + ".add");
        check_ids_in_range(spec.del, num_props, where + ".del");

        GroundedAction a;
        a.id = static_cast<int>(i);
        a.name = std::move(spec.name);
        a.pre = sorted_unique(std::move(spec.pre));
        a.add = sorted_unique(std::move(spec.add));
        a.del = sorted_unique(std::move(spec.del));
        // Normalize overlap in favor of add: apply() adds after deleting, so
        // a proposition in both sets ends up true anyway.
        std::vector<int> del_clean;
        for (int p : a.del)
            if (!std::binary_search(a.add.begin(), a.add.end(), p))
                del_clean.push_back(p);
        a.del = std::move(del_clean);

        a.pre_mask = mask_of(a.pre, num_props);
        a.add_mask = mask_of(a.add, num_props);
        a.del_mask = mask_of(a.del, num_props);
        task.actions.push_back(std::move(a));
    }

    check_ids_in_range(init, num_props, "init");
    check_ids_in_range(goal, num_props, "goal");
    task.init = mask_of(init, num_props);
    task.goal = sorted_unique(goal);
    task.goal_mask = mask_of(task.goal, num_props);
    return task;
}

bool applicable(const State& state, const GroundedAction& action) {
    return state.contains_all(action.pre_mask);
}

State apply(const State& state, const GroundedAction& action) {
    if (!applicable(state, action))
        throw std::invalid_argument("apply: action '" + action.name +
                                    "' is not applicable in the given state");
    State next = state;
    next.remove_all(action.del_mask);
    next.add_all(action.add_mask);
    return next;
}

bool validate_plan(const GroundedTask& task, const Plan& plan) {
    State s = task.init;
    for (int step : plan) {
        if (step < 0 || step >= task.num_actions())
            throw std::invalid_argument("validate_plan: action id out of range");
        const GroundedAction& a = task.actions[step];
        if (!applicable(s, a))
            return false;
        s.remove_all(a.del_mask);
        s.add_all(a.add_mask);
    }
    return s.contains_all(task.goal_mask);
}

double plan_cost(const Plan& plan, const CostVector& costs) {
    double total = 0.0;
    for (int step : plan) {
        if (step < 0 || step >= static_cast<int>(costs.size()))
            throw std::invalid_argument("plan_cost: action id out of range");
        total += costs[step];
    }
    return total;
}

ActionCountVector to_action_count_vector(const GroundedTask& task, const Plan& plan) {
    ActionCountVector counts(task.num_actions(), 0);
    for (int step : plan) {
        if (step < 0 || step >= task.num_actions())
            throw std::invalid_argument("to_action_count_vector: action id out of range");
        ++counts[step];
    }
    return counts;
}

double inner_cost(const CostVector& costs, const ActionCountVector& acv) {
    if (costs.size() != acv.size())
        throw std::invalid_argument("inner_cost: length mismatch (" +
                                    std::to_string(costs.size()) + " vs " +
                                    std::to_string(acv.size()) + ")");
    double total = 0.0;
    for (size_t i = 0; i < costs.size(); ++i)
        total += costs[i] * acv[i];
    return total;
}

bool goal_satisfied(const GroundedTask& task, const State& state) {
    return state.contains_all(task.goal_mask);
}

}  // namespace dflplan
