#ifndef DFLPLAN_SEARCH_H
#define DFLPLAN_SEARCH_H

#include "dflplan/common.h"
#include "dflplan/heuristics.h"
#include "dflplan/strips.h"

namespace dflplan {

// The four planner modes, ordered by decreasing plan quality and effort:
// optimal A*/LM-Cut, bounded-suboptimal WA*(w)/LM-Cut, unbounded GBFS/hFF,
// and the hFF relaxed plan at the initial state without any search.
struct SolverMode {
    enum class Kind { Opt, Bound, NonOpt, Heu };

    Kind kind = Kind::Opt;
    double weight = 2.0;  // used by Bound only

    static SolverMode opt() { return {Kind::Opt, 2.0}; }
    static SolverMode bound(double w) { return {Kind::Bound, w}; }
    static SolverMode nonopt() { return {Kind::NonOpt, 2.0}; }
    static SolverMode heu() { return {Kind::Heu, 2.0}; }
};

struct SearchResult {
    Plan plan;
    double cost = 0.0;
    long long expanded = 0;
    SolverMode mode;
};

// All searches below require non-negative costs and break ties consistently,
// so identical inputs produce identical plans. They throw UnsolvableError
// when no plan exists.

SearchResult astar(const GroundedTask& task, const CostVector& costs,
                   Heuristic& heuristic);

// f = g + w*h with w >= 1; plan cost is at most w times optimal for an
// admissible heuristic.
SearchResult weighted_astar(const GroundedTask& task, const CostVector& costs,
                            Heuristic& heuristic, double w);

SearchResult gbfs(const GroundedTask& task, const CostVector& costs,
                  Heuristic& heuristic);

// Dispatch on mode: Opt -> astar+lmcut, Bound(w) -> wastar+lmcut,
// NonOpt -> gbfs+hff, Heu -> hFF relaxed acv at the initial state.
ActionCountVector solve(const GroundedTask& task, const CostVector& costs,
                        const SolverMode& mode);

// Exhaustive uniform-cost search, for tests only. Throws
// StateSpaceTooLargeError once more than max_states distinct states are
// generated.
SearchResult oracle_statespace(const GroundedTask& task, const CostVector& costs,
                               int max_states = 100000);

}  // namespace dflplan

#endif
