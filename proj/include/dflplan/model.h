#ifndef DFLPLAN_MODEL_H
#define DFLPLAN_MODEL_H

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dflplan/common.h"
#include "dflplan/dfl.h"
#include "dflplan/search.h"
#include "dflplan/strips.h"

namespace dflplan {

using FeatureVector = std::vector<double>;

// Per-action linear predictor c_hat = W x (+ bias). With relu_output the
// prediction is clamped at zero and gradients are gated by the clamp; the
// clamp's subgradient at exactly zero is taken as one so a zero-initialized
// model still receives gradient.
struct LinearModel {
    int k = 0;
    int m = 0;
    bool has_bias = true;
    bool relu_output = false;
    std::vector<std::vector<double>> weights;  // m rows, k columns
    std::vector<double> bias;                  // length m iff has_bias

    static LinearModel zeros(int k, int m, bool has_bias = true,
                             bool relu_output = false);

    CostVector predict_raw(const FeatureVector& x) const;  // ignores the clamp
    CostVector predict(const FeatureVector& x) const;
};

enum class Split { Train, Valid, Test };

struct DataInstance {
    FeatureVector x;
    CostVector c;               // strictly positive true costs
    ActionCountVector pi_true;  // empty until precompute_true_solutions
    Split split = Split::Train;
};

struct Dataset {
    std::string task_ref;  // path or family spec the costs were generated for
    int k = 0;
    int deg = 0;
    double noise = 0.0;
    uint64_t seed = 0;
    std::vector<DataInstance> instances;

    std::vector<int> indices(Split split) const;
};

struct TrainConfig {
    LossKind loss = LossKind::mse();
    SolverMode mode = SolverMode::opt();
    double learning_rate = 0.05;
    int batch_size = 32;
    int epochs = 20;
    uint64_t seed = 0;
    std::optional<double> cache_p;  // engages the solution cache when set
    bool use_bias = true;
    bool relu_output = false;
    bool track_validation = true;
};

struct ParamGrad {
    std::vector<std::vector<double>> d_weights;
    std::vector<double> d_bias;

    static ParamGrad zeros(int k, int m, bool has_bias);
};

// Mean over the batch of ||predict(x) - c||^2 / m, and its gradient.
double mse_loss(const LinearModel& model, const std::vector<DataInstance>& instances,
                const std::vector<int>& batch);
ParamGrad mse_grad(const LinearModel& model, const std::vector<DataInstance>& instances,
                   const std::vector<int>& batch);

// Chain rule over the cost-space subgradient of config.loss (SPO+ or NSPO):
// d/dW = g (outer) x, d/dbias = g, averaged over the batch. The solver is
// what corrects and plans; UnsolvableError is rethrown with the offending
// instance index attached.
ParamGrad dfl_grad(const LinearModel& model, const std::vector<DataInstance>& instances,
                   const std::vector<int>& batch, const TrainConfig& config,
                   AcvSolver& solver);

struct EpochStats {
    double train_loss = 0.0;
    double valid_regret_pct = -1.0;  // -1 when not tracked
};

struct TrainResult {
    LinearModel model;
    std::vector<EpochStats> history;
    long long planner_calls = 0;  // training-path solves; validation excluded
};

// Shuffled minibatch SGD for config.epochs epochs; returns the final-epoch
// model, not the best-validation one. Validation regret (optimal solve,
// add-min correction) is logged when the split is present and pi_true is
// filled. The solver overload ignores config.cache_p: the solver already is
// the caching decision.
TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const GroundedTask& task, AcvSolver& solver);
TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const GroundedTask& task);

// Fills pi_true = optimal acv under the true costs for every instance,
// loading from / saving to cache_dir keyed by a content hash when cache_dir
// is non-empty. Returns true when the solutions came from disk.
bool precompute_true_solutions(Dataset& dataset, const GroundedTask& task,
                               const std::string& cache_dir = "");

// Content hash over features, costs, splits and generation parameters.
std::string dataset_hash(const Dataset& dataset, const GroundedTask& task);

void save_model(const LinearModel& model, const std::string& path,
                const std::string& config_hash = "");
LinearModel load_model(const std::string& path);

}  // namespace dflplan

#endif
