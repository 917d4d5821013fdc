#include "dflplan/model.h"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dflplan/rng.h"

using nlohmann::json;

namespace dflplan {

LinearModel LinearModel::zeros(int k, int m, bool has_bias, bool relu_output) {
    LinearModel model;
    model.k = k;
    model.m = m;
    model.has_bias = has_bias;
    model.relu_output = relu_output;
    model.weights.assign(m, std::vector<double>(k, 0.0));
    if (has_bias)
        model.bias.assign(m, 0.0);
    return model;
}

CostVector LinearModel::predict_raw(const FeatureVector& x) const {
    if (static_cast<int>(x.size()) != k)
        throw ConfigError("feature vector has length " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(k));
    CostVector out(m, 0.0);
    for (int i = 0; i < m; ++i) {
        double v = has_bias ? bias[i] : 0.0;
        for (int j = 0; j < k; ++j)
            v += weights[i][j] * x[j];
        out[i] = v;
    }
    return out;
}

CostVector LinearModel::predict(const FeatureVector& x) const {
    CostVector out = predict_raw(x);
    if (relu_output)
        for (double& v : out)
            v = std::max(v, 0.0);
    return out;
}

std::vector<int> Dataset::indices(Split split) const {
    std::vector<int> out;
    for (size_t i = 0; i < instances.size(); ++i)
        if (instances[i].split == split)
            out.push_back(static_cast<int>(i));
    return out;
}

ParamGrad ParamGrad::zeros(int k, int m, bool has_bias) {
    ParamGrad g;
    g.d_weights.assign(m, std::vector<double>(k, 0.0));
    if (has_bias)
        g.d_bias.assign(m, 0.0);
    return g;
}

namespace {

struct BatchEval {
    ParamGrad grad;
    double mean_loss = 0.0;
};

// Accumulates the cost-space gradient g for one instance into the parameter
// gradient, gating through the output clamp where active.
void accumulate(ParamGrad& grad, const CostVector& g, const CostVector& raw,
                const FeatureVector& x, const LinearModel& model, double scale) {
    for (int i = 0; i < model.m; ++i) {
        double gi = g[i];
        if (model.relu_output && raw[i] < 0.0)
            gi = 0.0;
        if (gi == 0.0)
            continue;
        gi *= scale;
        for (int j = 0; j < model.k; ++j)
            grad.d_weights[i][j] += gi * x[j];
        if (model.has_bias)
            grad.d_bias[i] += gi;
    }
}

BatchEval mse_batch_eval(const LinearModel& model,
                         const std::vector<DataInstance>& instances,
                         const std::vector<int>& batch) {
    assert(!batch.empty());
    BatchEval eval;
    eval.grad = ParamGrad::zeros(model.k, model.m, model.has_bias);
    double scale = 1.0 / batch.size();
    for (int idx : batch) {
        const DataInstance& inst = instances[idx];
        CostVector raw = model.predict_raw(inst.x);
        CostVector g(model.m);
        double loss = 0.0;
        for (int i = 0; i < model.m; ++i) {
            double pred = model.relu_output ? std::max(raw[i], 0.0) : raw[i];
            double err = pred - inst.c[i];
            loss += err * err;
            g[i] = 2.0 * err / model.m;
        }
        eval.mean_loss += loss / model.m;
        accumulate(eval.grad, g, raw, inst.x, model, scale);
    }
    eval.mean_loss *= scale;
    return eval;
}

BatchEval dfl_batch_eval(const LinearModel& model,
                         const std::vector<DataInstance>& instances,
                         const std::vector<int>& batch, const TrainConfig& config,
                         AcvSolver& solver) {
    assert(!batch.empty());
    BatchEval eval;
    eval.grad = ParamGrad::zeros(model.k, model.m, model.has_bias);
    double scale = 1.0 / batch.size();
    for (int idx : batch) {
        const DataInstance& inst = instances[idx];
        if (inst.pi_true.empty())
            throw ConfigError("instance " + std::to_string(idx) +
                              " has no precomputed optimal solution");
        CostVector raw = model.predict_raw(inst.x);
        CostVector c_hat = raw;
        if (model.relu_output)
            for (double& v : c_hat)
                v = std::max(v, 0.0);
        DflPoint point;
        try {
            point = dfl_eval(c_hat, inst.c, inst.pi_true, solver, config.loss);
        } catch (const UnsolvableError& e) {
            throw UnsolvableError("instance " + std::to_string(idx) + ": " + e.what());
        }
        eval.mean_loss += point.loss;
        accumulate(eval.grad, point.subgradient, raw, inst.x, model, scale);
    }
    eval.mean_loss *= scale;
    return eval;
}

void apply_update(LinearModel& model, const ParamGrad& grad, double learning_rate) {
    for (int i = 0; i < model.m; ++i) {
        for (int j = 0; j < model.k; ++j)
            model.weights[i][j] -= learning_rate * grad.d_weights[i][j];
        if (model.has_bias)
            model.bias[i] -= learning_rate * grad.d_bias[i];
    }
}

double validation_regret_pct(const LinearModel& model, const Dataset& dataset,
                             const std::vector<int>& valid, const GroundedTask& task) {
    double sum = 0.0;
    for (int idx : valid) {
        const DataInstance& inst = dataset.instances[idx];
        CostVector c_hat = model.predict(inst.x);
        ActionCountVector acv =
            corrected_solve(task, c_hat, SolverMode::opt(), CorrectionMode::AddMin);
        double opt = inner_cost(inst.c, inst.pi_true);
        sum += (inner_cost(inst.c, acv) - opt) / opt;
    }
    return 100.0 * sum / valid.size();
}

}  // namespace

double mse_loss(const LinearModel& model, const std::vector<DataInstance>& instances,
                const std::vector<int>& batch) {
    return mse_batch_eval(model, instances, batch).mean_loss;
}

ParamGrad mse_grad(const LinearModel& model, const std::vector<DataInstance>& instances,
                   const std::vector<int>& batch) {
    return mse_batch_eval(model, instances, batch).grad;
}

ParamGrad dfl_grad(const LinearModel& model, const std::vector<DataInstance>& instances,
                   const std::vector<int>& batch, const TrainConfig& config,
                   AcvSolver& solver) {
    return dfl_batch_eval(model, instances, batch, config, solver).grad;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const GroundedTask& task, AcvSolver& solver) {
    assert(config.learning_rate >= 0.0);
    assert(config.batch_size > 0);
    assert(config.epochs > 0);
    std::vector<int> order = dataset.indices(Split::Train);
    if (order.empty())
        throw ConfigError("dataset has no training instances");

    std::vector<int> valid = dataset.indices(Split::Valid);
    bool track = config.track_validation && !valid.empty() &&
                 std::all_of(valid.begin(), valid.end(), [&](int idx) {
                     return !dataset.instances[idx].pi_true.empty();
                 });

    LinearModel model = LinearModel::zeros(dataset.k, task.num_actions(),
                                           config.use_bias, config.relu_output);
    Rng shuffle_rng(substream_seed(config.seed, "shuffle"));
    long long calls_before = solver.calls();

    TrainResult result;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(config.batch_size)) {
            size_t end = std::min(order.size(), start + config.batch_size);
            std::vector<int> batch(order.begin() + start, order.begin() + end);
            BatchEval eval = config.loss.family == LossKind::Family::Mse
                                 ? mse_batch_eval(model, dataset.instances, batch)
                                 : dfl_batch_eval(model, dataset.instances, batch,
                                                  config, solver);
            loss_sum += eval.mean_loss * batch.size();
            apply_update(model, eval.grad, config.learning_rate);
        }
        EpochStats stats;
        stats.train_loss = loss_sum / order.size();
        if (track)
            stats.valid_regret_pct = validation_regret_pct(model, dataset, valid, task);
        result.history.push_back(stats);
    }
    result.model = std::move(model);
    result.planner_calls = solver.calls() - calls_before;
    return result;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const GroundedTask& task) {
    CorrectionMode correction = config.loss.correction;
    if (config.loss.family != LossKind::Family::Mse && config.cache_p.has_value()) {
        SolutionCache cache(*config.cache_p);
        for (int idx : dataset.indices(Split::Train)) {
            const ActionCountVector& pi = dataset.instances[idx].pi_true;
            if (pi.empty())
                throw ConfigError(
                    "caching requires precomputed training solutions (instance " +
                    std::to_string(idx) + " has none)");
            cache.insert(pi);
        }
        Rng cache_rng(substream_seed(config.seed, "cache"));
        CachingSolver solver(task, config.mode, correction, cache, cache_rng);
        return train(dataset, config, task, solver);
    }
    CorrectedPlannerSolver solver(task, config.mode, correction);
    return train(dataset, config, task, solver);
}

namespace {

void hash_u64(uint64_t& h, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
    }
}

void hash_double(uint64_t& h, double v) {
    uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    hash_u64(h, bits);
}

}  // namespace

std::string dataset_hash(const Dataset& dataset, const GroundedTask& task) {
    uint64_t h = 14695981039346656037ull;
    hash_u64(h, static_cast<uint64_t>(dataset.k));
    hash_u64(h, static_cast<uint64_t>(dataset.deg));
    hash_double(h, dataset.noise);
    hash_u64(h, dataset.seed);
    hash_u64(h, static_cast<uint64_t>(task.num_propositions()));
    hash_u64(h, static_cast<uint64_t>(task.num_actions()));
    for (const GroundedAction& a : task.actions)
        for (char c : a.name)
            hash_u64(h, static_cast<unsigned char>(c));
    for (const DataInstance& inst : dataset.instances) {
        hash_u64(h, static_cast<uint64_t>(inst.split));
        for (double v : inst.x)
            hash_double(h, v);
        for (double v : inst.c)
            hash_double(h, v);
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

bool precompute_true_solutions(Dataset& dataset, const GroundedTask& task,
                               const std::string& cache_dir) {
    for (size_t i = 0; i < dataset.instances.size(); ++i)
        for (double c : dataset.instances[i].c)
            if (c <= 0.0)
                throw ConfigError("instance " + std::to_string(i) +
                                  " has a non-positive true cost");

    std::string path;
    if (!cache_dir.empty()) {
        std::filesystem::create_directories(cache_dir);
        path = cache_dir + "/solutions-" + dataset_hash(dataset, task) + ".json";
        std::ifstream in(path);
        if (in) {
            json doc = json::parse(in, nullptr, false);
            if (doc.is_object() && doc.contains("pi_true") &&
                doc["pi_true"].is_array() &&
                doc["pi_true"].size() == dataset.instances.size()) {
                for (size_t i = 0; i < dataset.instances.size(); ++i)
                    dataset.instances[i].pi_true =
                        doc["pi_true"][i].get<ActionCountVector>();
                return true;
            }
        }
    }

    for (DataInstance& inst : dataset.instances)
        inst.pi_true = solve(task, inst.c, SolverMode::opt());

    if (!path.empty()) {
        json doc;
        doc["pi_true"] = json::array();
        for (const DataInstance& inst : dataset.instances)
            doc["pi_true"].push_back(inst.pi_true);
        std::ofstream out(path);
        out << doc << "\n";
    }
    return false;
}

void save_model(const LinearModel& model, const std::string& path,
                const std::string& config_hash) {
    json doc;
    doc["k"] = model.k;
    doc["m"] = model.m;
    doc["weights"] = model.weights;
    if (model.has_bias)
        doc["bias"] = model.bias;
    else
        doc["bias"] = nullptr;
    doc["relu_output"] = model.relu_output;
    doc["config_hash"] = config_hash;
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open model file for writing: " + path);
    out << doc.dump(2) << "\n";
}

LinearModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw TaskFormatError("cannot open model file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw TaskFormatError("model file is not a JSON object: " + path);
    for (const char* key : {"k", "m", "weights", "bias"})
        if (!doc.contains(key))
            throw TaskFormatError(std::string("model file: missing field \"") + key +
                                  "\"");
    LinearModel model;
    model.k = doc["k"].get<int>();
    model.m = doc["m"].get<int>();
    model.relu_output = doc.value("relu_output", false);
    model.weights = doc["weights"].get<std::vector<std::vector<double>>>();
    if (static_cast<int>(model.weights.size()) != model.m)
        throw TaskFormatError("model file: weights: expected " +
                              std::to_string(model.m) + " rows");
    for (size_t i = 0; i < model.weights.size(); ++i)
        if (static_cast<int>(model.weights[i].size()) != model.k)
            throw TaskFormatError("model file: weights[" + std::to_string(i) +
                                  "]: expected " + std::to_string(model.k) +
                                  " columns");
    if (doc["bias"].is_null()) {
        model.has_bias = false;
    } else {
        model.has_bias = true;
        model.bias = doc["bias"].get<std::vector<double>>();
        if (static_cast<int>(model.bias.size()) != model.m)
            throw TaskFormatError("model file: bias: expected length " +
                                  std::to_string(model.m));
    }
    return model;
}

}  // namespace dflplan
