#include "dflplan/search.h"

#include <algorithm>
#include <cassert>
#include <queue>
#include <unordered_map>
#include <vector>

namespace dflplan {

namespace {

struct OpenEntry {
    double primary;
    double secondary;
    long long counter;
    int node;
};

struct OpenEntryGreater {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
        if (a.primary != b.primary)
            return a.primary > b.primary;
        if (a.secondary != b.secondary)
            return a.secondary > b.secondary;
        return a.counter > b.counter;
    }
};

using OpenList = std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenEntryGreater>;

struct NodePool {
    std::vector<State> states;
    std::vector<double> g;
    std::vector<double> h;
    std::vector<int> parent;
    std::vector<int> parent_action;
    std::vector<char> closed;
    std::unordered_map<State, int, StateHash> ids;

    int add(const State& s, double gv, double hv, int par, int act) {
        int id = static_cast<int>(states.size());
        states.push_back(s);
        g.push_back(gv);
        h.push_back(hv);
        parent.push_back(par);
        parent_action.push_back(act);
        closed.push_back(0);
        ids.emplace(s, id);
        return id;
    }
};

SearchResult extract_result(const NodePool& pool, int goal_node, long long expanded,
                            SolverMode mode) {
    Plan plan;
    for (int n = goal_node; pool.parent[n] >= 0; n = pool.parent[n])
        plan.push_back(pool.parent_action[n]);
    std::reverse(plan.begin(), plan.end());
    return SearchResult{std::move(plan), pool.g[goal_node], expanded, mode};
}

// Shared best-first core. A*/WA* order the open list by (g + w*h, h,
// insertion counter) and re-open closed nodes on a cheaper g, which LM-Cut's
// inconsistency requires for optimality. GBFS orders by (h, insertion
// counter) and never revisits a generated state.
SearchResult best_first(const GroundedTask& task, const CostVector& costs,
                        Heuristic& heuristic, double weight, bool greedy,
                        bool reopen, SolverMode mode) {
    assert(static_cast<int>(costs.size()) == task.num_actions());

    NodePool pool;
    OpenList open;
    long long counter = 0;
    auto push = [&](int node) {
        double primary = greedy ? pool.h[node] : pool.g[node] + weight * pool.h[node];
        double secondary = greedy ? 0.0 : pool.h[node];
        open.push(OpenEntry{primary, secondary, counter++, node});
    };

    double h0 = heuristic.evaluate(task.init);
    if (h0 == kInfinity)
        throw UnsolvableError("no plan exists");
    push(pool.add(task.init, 0.0, h0, -1, -1));

    long long expanded = 0;
    while (!open.empty()) {
        int node = open.top().node;
        open.pop();
        if (pool.closed[node])
            continue;
        pool.closed[node] = 1;
        if (pool.states[node].contains_all(task.goal_mask))
            return extract_result(pool, node, expanded, mode);
        ++expanded;
        State current = pool.states[node];  // pool may reallocate below
        double current_g = pool.g[node];
        for (const GroundedAction& a : task.actions) {
            if (!current.contains_all(a.pre_mask))
                continue;
            State succ = current;
            succ.remove_all(a.del_mask);
            succ.add_all(a.add_mask);
            double tentative = current_g + costs[a.id];
            auto it = pool.ids.find(succ);
            if (it == pool.ids.end()) {
                double hv = heuristic.evaluate(succ);
                int id = pool.add(succ, tentative, hv, node, a.id);
                if (hv == kInfinity)
                    pool.closed[id] = 1;  // dead end, never worth revisiting
                else
                    push(id);
            } else if (reopen) {
                int id = it->second;
                if (pool.h[id] != kInfinity && tentative < pool.g[id]) {
                    pool.g[id] = tentative;
                    pool.parent[id] = node;
                    pool.parent_action[id] = a.id;
                    pool.closed[id] = 0;
                    push(id);
                }
            }
        }
    }
    throw UnsolvableError("no plan exists");
}

}  // namespace

SearchResult astar(const GroundedTask& task, const CostVector& costs,
                   Heuristic& heuristic) {
    return best_first(task, costs, heuristic, 1.0, false, true, SolverMode::opt());
}

SearchResult weighted_astar(const GroundedTask& task, const CostVector& costs,
                            Heuristic& heuristic, double w) {
    assert(w >= 1.0);
    return best_first(task, costs, heuristic, w, false, true, SolverMode::bound(w));
}

SearchResult gbfs(const GroundedTask& task, const CostVector& costs,
                  Heuristic& heuristic) {
    return best_first(task, costs, heuristic, 1.0, true, false, SolverMode::nonopt());
}

ActionCountVector solve(const GroundedTask& task, const CostVector& costs,
                        const SolverMode& mode) {
    switch (mode.kind) {
    case SolverMode::Kind::Opt: {
        LmCutHeuristic h(task, costs);
        return to_action_count_vector(task, astar(task, costs, h).plan);
    }
    case SolverMode::Kind::Bound: {
        LmCutHeuristic h(task, costs);
        return to_action_count_vector(task,
                                      weighted_astar(task, costs, h, mode.weight).plan);
    }
    case SolverMode::Kind::NonOpt: {
        HffHeuristic h(task, costs);
        return to_action_count_vector(task, gbfs(task, costs, h).plan);
    }
    case SolverMode::Kind::Heu: {
        auto [value, relaxed] = hff(task, task.init, costs);
        if (value == kInfinity)
            throw UnsolvableError("no plan exists");
        return relaxed.acv;
    }
    }
    throw ConfigError("unknown solver mode");
}

SearchResult oracle_statespace(const GroundedTask& task, const CostVector& costs,
                               int max_states) {
    assert(static_cast<int>(costs.size()) == task.num_actions());

    NodePool pool;
    OpenList open;
    long long counter = 0;
    auto push = [&](int node) {
        open.push(OpenEntry{pool.g[node], 0.0, counter++, node});
    };

    push(pool.add(task.init, 0.0, 0.0, -1, -1));

    long long expanded = 0;
    while (!open.empty()) {
        int node = open.top().node;
        open.pop();
        if (pool.closed[node])
            continue;
        pool.closed[node] = 1;
        if (pool.states[node].contains_all(task.goal_mask))
            return extract_result(pool, node, expanded, SolverMode::opt());
        ++expanded;
        State current = pool.states[node];
        double current_g = pool.g[node];
        for (const GroundedAction& a : task.actions) {
            if (!current.contains_all(a.pre_mask))
                continue;
            State succ = current;
            succ.remove_all(a.del_mask);
            succ.add_all(a.add_mask);
            double tentative = current_g + costs[a.id];
            auto it = pool.ids.find(succ);
            if (it == pool.ids.end()) {
                if (static_cast<int>(pool.states.size()) >= max_states)
                    throw StateSpaceTooLargeError(
                        "reachable state space exceeds " + std::to_string(max_states) +
                        " states");
                push(pool.add(succ, tentative, 0.0, node, a.id));
            } else {
                int id = it->second;
                if (tentative < pool.g[id]) {
                    pool.g[id] = tentative;
                    pool.parent[id] = node;
                    pool.parent_action[id] = a.id;
                    pool.closed[id] = 0;
                    push(id);
                }
            }
        }
    }
    throw UnsolvableError("no plan exists");
}

}  // namespace dflplan
