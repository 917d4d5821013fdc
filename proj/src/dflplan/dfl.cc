#include "dflplan/dfl.h"

#include <algorithm>
#include <cassert>
#include <mutex>

namespace dflplan {

CostVector relu_correct(const CostVector& c) {
    CostVector out(c.size());
    for (size_t i = 0; i < c.size(); ++i)
        out[i] = std::max(c[i], 0.0);
    return out;
}

AddMinResult addmin_shift(const CostVector& c) {
    double lowest = 0.0;
    for (double v : c)
        lowest = std::min(lowest, v);
    AddMinResult result;
    result.shift = -lowest;
    result.shifted.resize(c.size());
    for (size_t i = 0; i < c.size(); ++i)
        result.shifted[i] = c[i] + result.shift;
    return result;
}

CostVector indicator_neg(const CostVector& v) {
    CostVector out(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        out[i] = v[i] < 0.0 ? 1.0 : 0.0;
    return out;
}

ActionCountVector corrected_solve(const GroundedTask& task, const CostVector& c,
                                  const SolverMode& mode, CorrectionMode correction) {
    if (correction == CorrectionMode::Threshold)
        return solve(task, relu_correct(c), mode);
    return solve(task, addmin_shift(c).shifted, mode);
}

SolutionCache::SolutionCache(double p_solve) : p(p_solve) {
    assert(p >= 0.0 && p <= 1.0);
}

int SolutionCache::size() const {
    std::shared_lock lock(mutex);
    return static_cast<int>(entries.size());
}

bool SolutionCache::insert(const ActionCountVector& acv) {
    std::unique_lock lock(mutex);
    if (!known.insert(acv).second)
        return false;
    entries.push_back(acv);
    return true;
}

ActionCountVector SolutionCache::lookup(const CostVector& v) const {
    std::shared_lock lock(mutex);
    if (entries.empty())
        throw EmptyCacheError("solution cache has no entries");
    int best = 0;
    double best_value = inner_cost(v, entries[0]);
    for (size_t i = 1; i < entries.size(); ++i) {
        double value = inner_cost(v, entries[i]);
        if (value < best_value) {
            best_value = value;
            best = static_cast<int>(i);
        }
    }
    return entries[best];
}

ActionCountVector cache_solve(SolutionCache& cache, const GroundedTask& task,
                              const CostVector& v, const SolverMode& mode,
                              CorrectionMode correction, Rng& rng) {
    if (rng.uniform() < cache.p_solve()) {
        ActionCountVector acv = corrected_solve(task, v, mode, correction);
        cache.insert(acv);
        return acv;
    }
    return cache.lookup(v);
}

ActionCountVector CorrectedPlannerSolver::solve_acv(const CostVector& c) {
    ++planner_calls;
    return corrected_solve(task, c, mode, correction);
}

ActionCountVector CachingSolver::solve_acv(const CostVector& c) {
    if (rng.uniform() < cache.p_solve()) {
        ++planner_calls;
        ActionCountVector acv = corrected_solve(task, c, mode, correction);
        cache.insert(acv);
        return acv;
    }
    return cache.lookup(c);
}

namespace {

CostVector spo_subgradient_from(const ActionCountVector& pi_true,
                                const ActionCountVector& pi_tilde) {
    assert(pi_true.size() == pi_tilde.size());
    CostVector g(pi_true.size());
    for (size_t i = 0; i < g.size(); ++i)
        g[i] = 2.0 * (pi_true[i] - pi_tilde[i]);
    return g;
}

double spo_plus_loss_from(const CostVector& c_hat, const CostVector& c_true,
                          const ActionCountVector& pi_true,
                          const ActionCountVector& pi_tilde, const CostVector& v) {
    return -inner_cost(v, pi_tilde) + 2.0 * inner_cost(c_hat, pi_true) -
           inner_cost(c_true, pi_true);
}

CostVector spo_direction(const CostVector& c_hat, const CostVector& c_true) {
    assert(c_hat.size() == c_true.size());
    CostVector v(c_hat.size());
    for (size_t i = 0; i < v.size(); ++i)
        v[i] = 2.0 * c_hat[i] - c_true[i];
    return v;
}

}  // namespace

double regret(const CostVector& c_hat, const CostVector& c_true,
              const ActionCountVector& pi_true, const GroundedTask& task,
              const SolverMode& mode, CorrectionMode correction) {
    ActionCountVector pi_hat = corrected_solve(task, c_hat, mode, correction);
    return inner_cost(c_true, pi_hat) - inner_cost(c_true, pi_true);
}

CostVector spo_subgradient(const CostVector& c_hat, const CostVector& c_true,
                           const ActionCountVector& pi_true, const GroundedTask& task,
                           const SolverMode& mode, CorrectionMode correction) {
    CostVector v = spo_direction(c_hat, c_true);
    return spo_subgradient_from(pi_true, corrected_solve(task, v, mode, correction));
}

double spo_plus_loss(const CostVector& c_hat, const CostVector& c_true,
                     const ActionCountVector& pi_true, const GroundedTask& task,
                     const SolverMode& mode, CorrectionMode correction) {
    CostVector v = spo_direction(c_hat, c_true);
    ActionCountVector pi_tilde = corrected_solve(task, v, mode, correction);
    return spo_plus_loss_from(c_hat, c_true, pi_true, pi_tilde, v);
}

CostVector nspo_subgradient(const CostVector& c_hat, const CostVector& c_true,
                            const ActionCountVector& pi_true, const GroundedTask& task,
                            const SolverMode& mode, CorrectionMode correction,
                            double lambda) {
    CostVector v = spo_direction(c_hat, c_true);
    CostVector g = spo_subgradient_from(pi_true, corrected_solve(task, v, mode, correction));
    for (size_t i = 0; i < g.size(); ++i)
        if (v[i] < 0.0)
            g[i] -= 2.0 * lambda;
    return g;
}

double nspo_loss(const CostVector& c_hat, const CostVector& c_true,
                 const ActionCountVector& pi_true, const GroundedTask& task,
                 const SolverMode& mode, CorrectionMode correction, double lambda) {
    CostVector v = spo_direction(c_hat, c_true);
    ActionCountVector pi_tilde = corrected_solve(task, v, mode, correction);
    double loss = spo_plus_loss_from(c_hat, c_true, pi_true, pi_tilde, v);
    for (double vi : v)
        loss += lambda * std::max(-vi, 0.0);
    return loss;
}

CostVector nspo_pi_hat(const ActionCountVector& pi_tilde, const CostVector& v,
                       double lambda) {
    assert(pi_tilde.size() == v.size());
    CostVector pi_hat(v.size());
    for (size_t i = 0; i < v.size(); ++i)
        pi_hat[i] = pi_tilde[i] + (v[i] < 0.0 ? lambda : 0.0);
    return pi_hat;
}

DflPoint dfl_eval(const CostVector& c_hat, const CostVector& c_true,
                  const ActionCountVector& pi_true, AcvSolver& solver,
                  const LossKind& loss) {
    assert(loss.family != LossKind::Family::Mse);
    CostVector v = spo_direction(c_hat, c_true);
    ActionCountVector pi_tilde = solver.solve_acv(v);

    DflPoint point;
    point.subgradient = spo_subgradient_from(pi_true, pi_tilde);
    point.loss = spo_plus_loss_from(c_hat, c_true, pi_true, pi_tilde, v);
    if (loss.family == LossKind::Family::Nspo) {
        for (size_t i = 0; i < v.size(); ++i) {
            if (v[i] < 0.0) {
                point.subgradient[i] -= 2.0 * loss.lambda;
                point.loss += loss.lambda * -v[i];
            }
        }
    }
    return point;
}

}  // namespace dflplan
