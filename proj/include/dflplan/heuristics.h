#ifndef DFLPLAN_HEURISTICS_H
#define DFLPLAN_HEURISTICS_H

#include <utility>
#include <vector>

#include "dflplan/common.h"
#include "dflplan/strips.h"

namespace dflplan {

// Plan multiset for the delete relaxation. A dead end is reported as an
// all-zero acv with cost +infinity.
struct RelaxedPlan {
    ActionCountVector acv;
    double cost = 0.0;
};

// Evaluators bind a task and a cost vector once and keep scratch buffers,
// so one instance must not be shared by concurrent searches. Costs must be
// non-negative.
class Heuristic {
public:
    virtual ~Heuristic() = default;
    virtual double evaluate(const State& state) = 0;
};

class HmaxHeuristic : public Heuristic {
public:
    HmaxHeuristic(const GroundedTask& task, CostVector costs);
    double evaluate(const State& state) override;

private:
    const GroundedTask& task;
    CostVector costs;
    std::vector<std::vector<int>> consumers;  // prop id -> actions with it in pre

    std::vector<double> prop_cost;
    std::vector<char> done;
    std::vector<int> unsat;
};

class HffHeuristic : public Heuristic {
public:
    HffHeuristic(const GroundedTask& task, CostVector costs);
    double evaluate(const State& state) override;
    std::pair<double, RelaxedPlan> evaluate_with_plan(const State& state);

private:
    const GroundedTask& task;
    CostVector costs;
    std::vector<std::vector<int>> consumers;
    std::vector<std::vector<int>> achievers;  // prop id -> actions adding it

    std::vector<double> prop_cost;
    std::vector<int> pop_order;  // -1 until finalized; doubles as done flag
    std::vector<int> unsat;
    std::vector<double> op_pre_cost;   // max prop_cost over preconditions
    std::vector<int> op_ready_order;   // max pop_order over preconditions
    std::vector<char> marked;
    std::vector<char> selected;
};

class LmCutHeuristic : public Heuristic {
public:
    LmCutHeuristic(const GroundedTask& task, CostVector costs);
    double evaluate(const State& state) override;

private:
    void explore(const State& state);
    void mark_goal_plateau(int prop);

    // Relaxation augmented with an artificial start fact (precondition of
    // otherwise precondition-free actions) and an artificial goal fact
    // reached by a zero-cost goal action.
    int num_props;
    int num_ops;
    int start_prop;
    int goal_prop;
    std::vector<std::vector<int>> pre;
    std::vector<std::vector<int>> add;
    CostVector base_cost;
    std::vector<std::vector<int>> consumers;
    std::vector<std::vector<int>> achievers;

    CostVector op_cost;
    std::vector<double> prop_cost;
    std::vector<char> done;
    std::vector<int> unsat;
    std::vector<int> pcf;  // precondition-choice function, -1 if unreached
    std::vector<char> status;
    std::vector<int> cut;
    std::vector<int> stack;
};

double hmax(const GroundedTask& task, const State& state, const CostVector& costs);
std::pair<double, RelaxedPlan> hff(const GroundedTask& task, const State& state,
                                   const CostVector& costs);
double lmcut(const GroundedTask& task, const State& state, const CostVector& costs);

// Checks that the acv can be ordered into a plan that reaches the goal when
// delete effects are ignored: saturate applicable actions, then test the goal.
bool relaxed_acv_achieves_goal(const GroundedTask& task, const State& state,
                               const ActionCountVector& acv);

}  // namespace dflplan

#endif
