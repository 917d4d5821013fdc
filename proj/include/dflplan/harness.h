#ifndef DFLPLAN_HARNESS_H
#define DFLPLAN_HARNESS_H

#include <string>
#include <vector>

#include "dflplan/datagen.h"
#include "dflplan/dfl.h"
#include "dflplan/model.h"
#include "dflplan/strips.h"

namespace dflplan {

// Exact minimum-cost solve for single-token path tasks (each action moves one
// token: one precondition, one add, delete == precondition; single init and
// goal fact; acyclic move graph). Dynamic programming in topological order,
// correct for arbitrary real costs including negatives, so no correction is
// needed. Throws NotADagError when the task does not have this shape.
ActionCountVector dag_exact_solve(const GroundedTask& task, const CostVector& costs);

class DagOracleSolver : public AcvSolver {
public:
    explicit DagOracleSolver(const GroundedTask& task) : task(task) {}
    ActionCountVector solve_acv(const CostVector& c) override {
        ++planner_calls;
        return dag_exact_solve(task, c);
    }

private:
    const GroundedTask& task;
};

struct RegretReport {
    double mean_pct = 0.0;
    std::vector<double> per_instance_pct;
};

// Mean over the split of 100 * (c' pi(c_hat) - c' pi_true) / (c' pi_true).
RegretReport percentage_regret(const LinearModel& model, const Dataset& dataset,
                               Split split, const GroundedTask& task,
                               const SolverMode& mode, CorrectionMode correction);

struct CorrectionComparison {
    double threshold_dev = 0.0;  // mean (threshold regret - exact regret), pct points
    double addmin_dev = 0.0;     // mean (add-min regret - exact regret), pct points
};

// Signed deviation of each correction's percentage regret from the exact-DAG
// regret, on the given split. Path-shaped tasks only.
CorrectionComparison compare_corrections(const LinearModel& model,
                                         const Dataset& dataset, Split split,
                                         const GroundedTask& task);

struct MethodSpec {
    std::string name;
    TrainConfig train;  // seed is overwritten per run
};

struct ExperimentConfig {
    std::string task_spec = "sp:5";
    SyntheticSpec data;  // seed is overwritten per run
    std::vector<MethodSpec> methods;
    SolverMode eval_mode = SolverMode::opt();
    CorrectionMode eval_correction = CorrectionMode::AddMin;
    int n_seeds = 5;
    uint64_t base_seed = 0;
    std::string solution_cache_dir;  // optional precomputed-solution store
};

struct ExperimentResult {
    // method,seed,regret_pct,regret_std,planner_calls; one row per
    // method x seed plus one aggregate row per method. Deterministic for a
    // fixed config.
    std::string csv;
    // method,seed,train_seconds; wall times live here so the main report
    // stays byte-identical across reruns.
    std::string timings_csv;
    std::vector<std::string> errors;  // failed runs, skipped from the csv
};

ExperimentResult run_experiment(const ExperimentConfig& config);

struct DemoResult {
    // instance,action,true_cost,predicted,predicted_clamped over the test
    // split of an MSE-trained unclamped model.
    std::string csv;
    int negative_predictions = 0;  // raw column entries below zero
};

DemoResult demo_negative_predictions(const GroundedTask& task, const SyntheticSpec& spec,
                                     const TrainConfig& base_config);

// "sp:<n>", "transport:<name>", "rovers:<name>", or a .gtask file path.
GroundedTask resolve_task(const std::string& spec);

}  // namespace dflplan

#endif
