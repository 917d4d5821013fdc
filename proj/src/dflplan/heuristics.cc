#include "dflplan/heuristics.h"

#include <algorithm>
#include <cassert>
#include <functional>
#include <queue>

namespace dflplan {

namespace {

using PropQueue =
    std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                        std::greater<>>;

std::vector<std::vector<int>> build_consumers(const GroundedTask& task) {
    std::vector<std::vector<int>> consumers(task.num_propositions());
    for (const GroundedAction& a : task.actions)
        for (int p : a.pre)
            consumers[p].push_back(a.id);
    return consumers;
}

std::vector<std::vector<int>> build_achievers(const GroundedTask& task) {
    std::vector<std::vector<int>> achievers(task.num_propositions());
    for (const GroundedAction& a : task.actions)
        for (int p : a.add)
            achievers[p].push_back(a.id);
    return achievers;
}

[[maybe_unused]] bool all_non_negative(const CostVector& costs) {
    return std::all_of(costs.begin(), costs.end(), [](double c) { return c >= 0.0; });
}

}  // namespace

HmaxHeuristic::HmaxHeuristic(const GroundedTask& task, CostVector costs)
    : task(task), costs(std::move(costs)), consumers(build_consumers(task)) {
    assert(static_cast<int>(this->costs.size()) == task.num_actions());
    assert(all_non_negative(this->costs));
}

double HmaxHeuristic::evaluate(const State& state) {
    const int num_props = task.num_propositions();
    prop_cost.assign(num_props, kInfinity);
    done.assign(num_props, 0);
    unsat.resize(task.num_actions());
    for (const GroundedAction& a : task.actions)
        unsat[a.id] = static_cast<int>(a.pre.size());

    PropQueue queue;
    auto reach = [&](int p, double c) {
        if (c < prop_cost[p]) {
            prop_cost[p] = c;
            queue.emplace(c, p);
        }
    };
    for (int p = 0; p < num_props; ++p)
        if (state.test(p))
            reach(p, 0.0);
    for (const GroundedAction& a : task.actions)
        if (a.pre.empty())
            for (int q : a.add)
                reach(q, costs[a.id]);

    while (!queue.empty()) {
        auto [c, p] = queue.top();
        queue.pop();
        if (done[p])
            continue;
        done[p] = 1;
        for (int op : consumers[p])
            if (--unsat[op] == 0)
                for (int q : task.actions[op].add)
                    reach(q, c + costs[op]);
    }

    double result = 0.0;
    for (int g : task.goal)
        result = std::max(result, prop_cost[g]);
    return result;
}

HffHeuristic::HffHeuristic(const GroundedTask& task, CostVector costs)
    : task(task),
      costs(std::move(costs)),
      consumers(build_consumers(task)),
      achievers(build_achievers(task)) {
    assert(static_cast<int>(this->costs.size()) == task.num_actions());
    assert(all_non_negative(this->costs));
}

double HffHeuristic::evaluate(const State& state) {
    return evaluate_with_plan(state).first;
}

std::pair<double, RelaxedPlan> HffHeuristic::evaluate_with_plan(const State& state) {
    const int num_props = task.num_propositions();
    const int num_ops = task.num_actions();
    prop_cost.assign(num_props, kInfinity);
    pop_order.assign(num_props, -1);
    unsat.resize(num_ops);
    for (const GroundedAction& a : task.actions)
        unsat[a.id] = static_cast<int>(a.pre.size());

    PropQueue queue;
    auto reach = [&](int p, double c) {
        if (c < prop_cost[p]) {
            prop_cost[p] = c;
            queue.emplace(c, p);
        }
    };
    for (int p = 0; p < num_props; ++p)
        if (state.test(p))
            reach(p, 0.0);
    for (const GroundedAction& a : task.actions)
        if (a.pre.empty())
            for (int q : a.add)
                reach(q, costs[a.id]);

    int order = 0;
    while (!queue.empty()) {
        auto [c, p] = queue.top();
        queue.pop();
        if (pop_order[p] >= 0)
            continue;
        pop_order[p] = order++;
        for (int op : consumers[p])
            if (--unsat[op] == 0)
                for (int q : task.actions[op].add)
                    reach(q, c + costs[op]);
    }

    for (int g : task.goal) {
        if (prop_cost[g] == kInfinity)
            return {kInfinity, RelaxedPlan{ActionCountVector(num_ops, 0), kInfinity}};
    }

    op_pre_cost.assign(num_ops, 0.0);
    op_ready_order.assign(num_ops, -1);
    for (const GroundedAction& a : task.actions) {
        for (int p : a.pre) {
            op_pre_cost[a.id] = std::max(op_pre_cost[a.id], prop_cost[p]);
            op_ready_order[a.id] = std::max(op_ready_order[a.id], pop_order[p]);
        }
    }

    // Best supporter of p: the cheapest achiever among those that became
    // ready strictly before p was finalized (so supports never form a cycle),
    // ties by lowest action id.
    auto best_supporter = [&](int p) {
        int best = -1;
        double best_val = kInfinity;
        for (int op : achievers[p]) {
            if (op_pre_cost[op] == kInfinity || op_ready_order[op] >= pop_order[p])
                continue;
            double val = op_pre_cost[op] + costs[op];
            if (val < best_val) {
                best_val = val;
                best = op;
            }
        }
        assert(best >= 0);
        return best;
    };

    marked.assign(num_props, 0);
    selected.assign(num_ops, 0);
    ActionCountVector acv(num_ops, 0);
    std::vector<int> open;
    for (int g : task.goal) {
        if (!state.test(g) && !marked[g]) {
            marked[g] = 1;
            open.push_back(g);
        }
    }
    while (!open.empty()) {
        int p = open.back();
        open.pop_back();
        int op = best_supporter(p);
        if (selected[op])
            continue;
        selected[op] = 1;
        acv[op] += 1;
        for (int q : task.actions[op].pre) {
            if (!state.test(q) && !marked[q]) {
                marked[q] = 1;
                open.push_back(q);
            }
        }
    }

    double value = inner_cost(costs, acv);
    return {value, RelaxedPlan{std::move(acv), value}};
}

LmCutHeuristic::LmCutHeuristic(const GroundedTask& task, CostVector costs) {
    assert(static_cast<int>(costs.size()) == task.num_actions());
    assert(all_non_negative(costs));
    num_props = task.num_propositions() + 2;
    start_prop = task.num_propositions();
    goal_prop = task.num_propositions() + 1;
    num_ops = task.num_actions() + 1;

    pre.resize(num_ops);
    add.resize(num_ops);
    base_cost.assign(num_ops, 0.0);
    for (const GroundedAction& a : task.actions) {
        pre[a.id] = a.pre.empty() ? std::vector<int>{start_prop} : a.pre;
        add[a.id] = a.add;
        base_cost[a.id] = costs[a.id];
    }
    int goal_op = num_ops - 1;
    pre[goal_op] = task.goal.empty() ? std::vector<int>{start_prop} : task.goal;
    add[goal_op] = {goal_prop};

    consumers.resize(num_props);
    achievers.resize(num_props);
    for (int op = 0; op < num_ops; ++op) {
        for (int p : pre[op])
            consumers[p].push_back(op);
        for (int p : add[op])
            achievers[p].push_back(op);
    }
}

void LmCutHeuristic::explore(const State& state) {
    prop_cost.assign(num_props, kInfinity);
    done.assign(num_props, 0);
    unsat.resize(num_ops);
    for (int op = 0; op < num_ops; ++op)
        unsat[op] = static_cast<int>(pre[op].size());

    PropQueue queue;
    auto reach = [&](int p, double c) {
        if (c < prop_cost[p]) {
            prop_cost[p] = c;
            queue.emplace(c, p);
        }
    };
    reach(start_prop, 0.0);
    for (int p = 0; p < start_prop; ++p)
        if (state.test(p))
            reach(p, 0.0);

    while (!queue.empty()) {
        auto [c, p] = queue.top();
        queue.pop();
        if (done[p])
            continue;
        done[p] = 1;
        for (int op : consumers[p])
            if (--unsat[op] == 0)
                for (int q : add[op])
                    reach(q, c + op_cost[op]);
    }

    pcf.assign(num_ops, -1);
    for (int op = 0; op < num_ops; ++op) {
        if (unsat[op] > 0)
            continue;
        int choice = -1;
        double worst = -1.0;
        for (int p : pre[op]) {
            if (prop_cost[p] > worst) {
                worst = prop_cost[p];
                choice = p;
            }
        }
        pcf[op] = choice;
    }
}

void LmCutHeuristic::mark_goal_plateau(int prop) {
    stack.clear();
    stack.push_back(prop);
    status[prop] = 1;
    while (!stack.empty()) {
        int p = stack.back();
        stack.pop_back();
        for (int op : achievers[p]) {
            if (op_cost[op] != 0.0 || pcf[op] < 0)
                continue;
            int q = pcf[op];
            if (status[q] != 1) {
                status[q] = 1;
                stack.push_back(q);
            }
        }
    }
}

double LmCutHeuristic::evaluate(const State& state) {
    op_cost = base_cost;
    double total = 0.0;

    for (int round = 0; round <= num_ops; ++round) {
        explore(state);
        double h = prop_cost[goal_prop];
        if (h == kInfinity)
            return kInfinity;
        if (h == 0.0)
            return total;

        // Goal zone: propositions with a zero-cost justification path to the
        // artificial goal.
        status.assign(num_props, 0);
        mark_goal_plateau(goal_prop);

        // Forward pass from the state; actions crossing into the goal zone
        // form the cut (a disjunctive action landmark).
        cut.clear();
        stack.clear();
        auto push_before = [&](int p) {
            status[p] = 2;
            stack.push_back(p);
        };
        push_before(start_prop);
        for (int p = 0; p < start_prop; ++p)
            if (state.test(p))
                push_before(p);
        while (!stack.empty()) {
            int p = stack.back();
            stack.pop_back();
            for (int op : consumers[p]) {
                if (pcf[op] != p)
                    continue;
                bool reached_goal_zone = false;
                for (int q : add[op]) {
                    if (status[q] == 1) {
                        reached_goal_zone = true;
                        cut.push_back(op);
                        break;
                    }
                }
                if (!reached_goal_zone)
                    for (int q : add[op])
                        if (status[q] == 0)
                            push_before(q);
            }
        }
        assert(!cut.empty());

        double cut_cost = kInfinity;
        for (int op : cut)
            cut_cost = std::min(cut_cost, op_cost[op]);
        assert(cut_cost > 0.0);
        total += cut_cost;
        for (int op : cut)
            op_cost[op] -= cut_cost;
    }
    assert(false && "cut loop failed to converge");
    return total;
}

double hmax(const GroundedTask& task, const State& state, const CostVector& costs) {
    return HmaxHeuristic(task, costs).evaluate(state);
}

std::pair<double, RelaxedPlan> hff(const GroundedTask& task, const State& state,
                                   const CostVector& costs) {
    return HffHeuristic(task, costs).evaluate_with_plan(state);
}

double lmcut(const GroundedTask& task, const State& state, const CostVector& costs) {
    return LmCutHeuristic(task, costs).evaluate(state);
}

bool relaxed_acv_achieves_goal(const GroundedTask& task, const State& state,
                               const ActionCountVector& acv) {
    if (static_cast<int>(acv.size()) != task.num_actions())
        return false;
    State facts = state;
    std::vector<char> applied(acv.size(), 0);
    bool progress = true;
    while (progress) {
        progress = false;
        for (size_t i = 0; i < acv.size(); ++i) {
            if (applied[i] || acv[i] <= 0)
                continue;
            if (facts.contains_all(task.actions[i].pre_mask)) {
                facts.add_all(task.actions[i].add_mask);
                applied[i] = 1;
                progress = true;
            }
        }
    }
    return facts.contains_all(task.goal_mask);
}

}  // namespace dflplan
