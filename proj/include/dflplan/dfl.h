#ifndef DFLPLAN_DFL_H
#define DFLPLAN_DFL_H

#include <set>
#include <shared_mutex>
#include <vector>

#include "dflplan/common.h"
#include "dflplan/rng.h"
#include "dflplan/search.h"
#include "dflplan/strips.h"

namespace dflplan {

// How predicted costs are made non-negative before they reach a planner:
// clamp negatives to zero, or shift everything up by the most negative entry
// (which preserves the relative order of all costs).
enum class CorrectionMode { Threshold, AddMin };

struct LossKind {
    enum class Family { Mse, SpoPlus, Nspo };

    Family family = Family::Mse;
    CorrectionMode correction = CorrectionMode::Threshold;
    double lambda = 1.0;  // penalty weight, Nspo only

    static LossKind mse() { return {Family::Mse, CorrectionMode::Threshold, 1.0}; }
    static LossKind spo_plus(CorrectionMode c) { return {Family::SpoPlus, c, 1.0}; }
    static LossKind nspo(CorrectionMode c, double lambda = 1.0) {
        return {Family::Nspo, c, lambda};
    }
};

CostVector relu_correct(const CostVector& c);

struct AddMinResult {
    double shift = 0.0;
    CostVector shifted;
};

// shift = |min(0, min(c))|, shifted = c + shift elementwise.
AddMinResult addmin_shift(const CostVector& c);

// 1.0 where v[i] < 0 strictly, else 0.0.
CostVector indicator_neg(const CostVector& v);

// Applies the correction, then plans with the resulting non-negative costs.
ActionCountVector corrected_solve(const GroundedTask& task, const CostVector& c,
                                  const SolverMode& mode, CorrectionMode correction);

// Insertion-ordered set of distinct acvs. Lookup scans for the entry with
// the minimum inner product against the query costs, earliest entry winning
// ties; no planner involved, so negative queries are fine. Lookups may run
// concurrently with an insertion and see either the old or new entry set.
class SolutionCache {
public:
    explicit SolutionCache(double p_solve);

    double p_solve() const { return p; }
    int size() const;
    bool insert(const ActionCountVector& acv);  // false if already present
    ActionCountVector lookup(const CostVector& v) const;  // throws EmptyCacheError

private:
    double p;
    mutable std::shared_mutex mutex;
    std::vector<ActionCountVector> entries;
    std::set<ActionCountVector> known;
};

// With probability cache.p_solve(): corrected_solve, insert the result,
// return it. Otherwise: cache lookup. The cache must hold the training-data
// solutions before the first call.
ActionCountVector cache_solve(SolutionCache& cache, const GroundedTask& task,
                              const CostVector& v, const SolverMode& mode,
                              CorrectionMode correction, Rng& rng);

// Where the trainer gets its argmin acvs from: a correcting planner call or
// the probabilistic cache in front of one. calls() counts actual planner
// invocations, not cache hits.
class AcvSolver {
public:
    virtual ~AcvSolver() = default;
    virtual ActionCountVector solve_acv(const CostVector& c) = 0;
    long long calls() const { return planner_calls; }

protected:
    long long planner_calls = 0;
};

class CorrectedPlannerSolver : public AcvSolver {
public:
    CorrectedPlannerSolver(const GroundedTask& task, SolverMode mode,
                           CorrectionMode correction)
        : task(task), mode(mode), correction(correction) {}
    ActionCountVector solve_acv(const CostVector& c) override;

private:
    const GroundedTask& task;
    SolverMode mode;
    CorrectionMode correction;
};

class CachingSolver : public AcvSolver {
public:
    CachingSolver(const GroundedTask& task, SolverMode mode, CorrectionMode correction,
                  SolutionCache& cache, Rng& rng)
        : task(task), mode(mode), correction(correction), cache(cache), rng(rng) {}
    ActionCountVector solve_acv(const CostVector& c) override;

private:
    const GroundedTask& task;
    SolverMode mode;
    CorrectionMode correction;
    SolutionCache& cache;
    Rng& rng;
};

// True-cost gap between the plan induced by the prediction and the optimal
// plan: inner(c_true, solve(c_hat)) - inner(c_true, pi_true).
double regret(const CostVector& c_hat, const CostVector& c_true,
              const ActionCountVector& pi_true, const GroundedTask& task,
              const SolverMode& mode, CorrectionMode correction);

// 2 * (pi_true - solve(2*c_hat - c_true)).
CostVector spo_subgradient(const CostVector& c_hat, const CostVector& c_true,
                           const ActionCountVector& pi_true, const GroundedTask& task,
                           const SolverMode& mode, CorrectionMode correction);

// -(2c_hat - c_true)' pi_tilde + 2 c_hat' pi_true - c_true' pi_true, with
// pi_tilde the (corrected) argmin at 2c_hat - c_true. Logging and gradient
// checks only.
double spo_plus_loss(const CostVector& c_hat, const CostVector& c_true,
                     const ActionCountVector& pi_true, const GroundedTask& task,
                     const SolverMode& mode, CorrectionMode correction);

// spo_subgradient - 2*lambda*indicator_neg(2*c_hat - c_true).
CostVector nspo_subgradient(const CostVector& c_hat, const CostVector& c_true,
                            const ActionCountVector& pi_true, const GroundedTask& task,
                            const SolverMode& mode, CorrectionMode correction,
                            double lambda);

// spo_plus_loss + lambda * sum(relu(c_true - 2*c_hat)).
double nspo_loss(const CostVector& c_hat, const CostVector& c_true,
                 const ActionCountVector& pi_true, const GroundedTask& task,
                 const SolverMode& mode, CorrectionMode correction, double lambda);

// The penalized count vector pi_tilde + lambda*indicator_neg(v). May
// correspond to no executable plan; it is a plain vector by design.
CostVector nspo_pi_hat(const ActionCountVector& pi_tilde, const CostVector& v,
                       double lambda);

struct DflPoint {
    CostVector subgradient;  // with respect to c_hat
    double loss = 0.0;
};

// One solver call serving both the subgradient and the logged loss value.
// loss.family selects the formulas (Mse is not valid here); the correction
// is whatever the solver applies internally.
DflPoint dfl_eval(const CostVector& c_hat, const CostVector& c_true,
                  const ActionCountVector& pi_true, AcvSolver& solver,
                  const LossKind& loss);

}  // namespace dflplan

#endif
