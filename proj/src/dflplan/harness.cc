#include "dflplan/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "dflplan/gtask_io.h"
#include "dflplan/search.h"

namespace dflplan {

ActionCountVector dag_exact_solve(const GroundedTask& task, const CostVector& costs) {
    const int num_props = task.num_propositions();
    const int num_ops = task.num_actions();
    if (static_cast<int>(costs.size()) != num_ops)
        throw ConfigError("cost vector length does not match the task");

    for (const GroundedAction& a : task.actions)
        if (a.pre.size() != 1 || a.add.size() != 1 || a.del != a.pre)
            throw NotADagError("action " + a.name +
                               " is not a single-token move (pre/add/del shape)");
    int init_prop = -1;
    for (int p = 0; p < num_props; ++p) {
        if (task.init.test(p)) {
            if (init_prop >= 0)
                throw NotADagError("more than one initial fact");
            init_prop = p;
        }
    }
    if (init_prop < 0 || task.goal.size() != 1)
        throw NotADagError("needs exactly one initial and one goal fact");
    const int goal_prop = task.goal[0];

    // Kahn's algorithm; a leftover node means a cycle.
    std::vector<std::vector<int>> out_edges(num_props);  // action ids, ascending
    std::vector<int> indegree(num_props, 0);
    for (const GroundedAction& a : task.actions) {
        out_edges[a.pre[0]].push_back(a.id);
        ++indegree[a.add[0]];
    }
    std::vector<int> topo;
    topo.reserve(num_props);
    for (int p = 0; p < num_props; ++p)
        if (indegree[p] == 0)
            topo.push_back(p);
    for (size_t i = 0; i < topo.size(); ++i)
        for (int op : out_edges[topo[i]])
            if (--indegree[task.actions[op].add[0]] == 0)
                topo.push_back(task.actions[op].add[0]);
    if (static_cast<int>(topo.size()) != num_props)
        throw NotADagError("the move graph contains a cycle");

    std::vector<double> dist(num_props, kInfinity);
    std::vector<int> pred(num_props, -1);
    dist[init_prop] = 0.0;
    for (int p : topo) {
        if (dist[p] == kInfinity)
            continue;
        for (int op : out_edges[p]) {
            int q = task.actions[op].add[0];
            double d = dist[p] + costs[op];
            if (d < dist[q]) {
                dist[q] = d;
                pred[q] = op;
            }
        }
    }
    if (dist[goal_prop] == kInfinity)
        throw UnsolvableError("goal fact unreachable");

    ActionCountVector acv(num_ops, 0);
    for (int p = goal_prop; p != init_prop; p = task.actions[pred[p]].pre[0])
        ++acv[pred[p]];
    return acv;
}

RegretReport percentage_regret(const LinearModel& model, const Dataset& dataset,
                               Split split, const GroundedTask& task,
                               const SolverMode& mode, CorrectionMode correction) {
    RegretReport report;
    for (int idx : dataset.indices(split)) {
        const DataInstance& inst = dataset.instances[idx];
        if (inst.pi_true.empty())
            throw ConfigError("instance " + std::to_string(idx) +
                              " has no precomputed optimal solution");
        CostVector c_hat = model.predict(inst.x);
        ActionCountVector acv = corrected_solve(task, c_hat, mode, correction);
        double opt = inner_cost(inst.c, inst.pi_true);
        report.per_instance_pct.push_back(
            100.0 * (inner_cost(inst.c, acv) - opt) / opt);
    }
    if (report.per_instance_pct.empty())
        throw ConfigError("dataset has no instances in the requested split");
    for (double v : report.per_instance_pct)
        report.mean_pct += v;
    report.mean_pct /= report.per_instance_pct.size();
    return report;
}

CorrectionComparison compare_corrections(const LinearModel& model,
                                         const Dataset& dataset, Split split,
                                         const GroundedTask& task) {
    CorrectionComparison cmp;
    int count = 0;
    for (int idx : dataset.indices(split)) {
        const DataInstance& inst = dataset.instances[idx];
        if (inst.pi_true.empty())
            throw ConfigError("instance " + std::to_string(idx) +
                              " has no precomputed optimal solution");
        CostVector c_hat = model.predict(inst.x);
        double opt = inner_cost(inst.c, inst.pi_true);
        auto pct = [&](const ActionCountVector& acv) {
            return 100.0 * (inner_cost(inst.c, acv) - opt) / opt;
        };
        double exact = pct(dag_exact_solve(task, c_hat));
        cmp.threshold_dev +=
            pct(corrected_solve(task, c_hat, SolverMode::opt(), CorrectionMode::Threshold)) -
            exact;
        cmp.addmin_dev +=
            pct(corrected_solve(task, c_hat, SolverMode::opt(), CorrectionMode::AddMin)) -
            exact;
        ++count;
    }
    if (count == 0)
        throw ConfigError("dataset has no instances in the requested split");
    cmp.threshold_dev /= count;
    cmp.addmin_dev /= count;
    return cmp;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

struct RunOutcome {
    bool ok = false;
    double regret_pct = 0.0;
    long long planner_calls = 0;
    double seconds = 0.0;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    if (config.methods.empty())
        throw ConfigError("experiment has no methods");
    if (config.n_seeds < 1)
        throw ConfigError("experiment needs at least one seed");
    GroundedTask task = resolve_task(config.task_spec);

    ExperimentResult result;
    std::vector<std::vector<RunOutcome>> outcomes(
        config.methods.size(), std::vector<RunOutcome>(config.n_seeds));

    for (int s = 0; s < config.n_seeds; ++s) {
        uint64_t run_seed = config.base_seed + static_cast<uint64_t>(s);
        Dataset dataset;
        try {
            SyntheticSpec spec = config.data;
            spec.seed = run_seed;
            dataset = gen_costs(task, spec);
            precompute_true_solutions(dataset, task, config.solution_cache_dir);
        } catch (const std::exception& e) {
            result.errors.push_back("seed " + std::to_string(run_seed) +
                                    ": data generation failed: " + e.what());
            continue;
        }
        for (size_t mi = 0; mi < config.methods.size(); ++mi) {
            const MethodSpec& method = config.methods[mi];
            try {
                TrainConfig tc = method.train;
                tc.seed = run_seed;
                auto t0 = std::chrono::steady_clock::now();
                TrainResult tr = train(dataset, tc, task);
                auto t1 = std::chrono::steady_clock::now();
                RegretReport report =
                    percentage_regret(tr.model, dataset, Split::Test, task,
                                      config.eval_mode, config.eval_correction);
                RunOutcome& out = outcomes[mi][s];
                out.ok = true;
                out.regret_pct = report.mean_pct;
                out.planner_calls = tr.planner_calls;
                out.seconds = std::chrono::duration<double>(t1 - t0).count();
            } catch (const std::exception& e) {
                result.errors.push_back(method.name + ", seed " +
                                        std::to_string(run_seed) + ": " + e.what());
            }
        }
    }

    std::string csv = "method,seed,regret_pct,regret_std,planner_calls\n";
    std::string timings = "method,seed,train_seconds\n";
    for (size_t mi = 0; mi < config.methods.size(); ++mi) {
        const std::string& name = config.methods[mi].name;
        double sum = 0.0, sum_sq = 0.0, call_sum = 0.0, sec_sum = 0.0;
        int n_ok = 0;
        for (int s = 0; s < config.n_seeds; ++s) {
            const RunOutcome& out = outcomes[mi][s];
            if (!out.ok)
                continue;
            uint64_t run_seed = config.base_seed + static_cast<uint64_t>(s);
            csv += name + "," + std::to_string(run_seed) + "," + fmt(out.regret_pct) +
                   ",," + std::to_string(out.planner_calls) + "\n";
            timings += name + "," + std::to_string(run_seed) + "," +
                       fmt(out.seconds) + "\n";
            sum += out.regret_pct;
            sum_sq += out.regret_pct * out.regret_pct;
            call_sum += static_cast<double>(out.planner_calls);
            sec_sum += out.seconds;
            ++n_ok;
        }
        if (n_ok == 0)
            continue;
        double mean = sum / n_ok;
        double variance = n_ok > 1 ? (sum_sq - n_ok * mean * mean) / (n_ok - 1) : 0.0;
        double std_dev = std::sqrt(std::max(variance, 0.0));
        csv += name + ",mean," + fmt(mean) + "," + fmt(std_dev) + "," +
               fmt(call_sum / n_ok) + "\n";
        timings += name + ",mean," + fmt(sec_sum / n_ok) + "\n";
    }
    result.csv = std::move(csv);
    result.timings_csv = std::move(timings);
    return result;
}

DemoResult demo_negative_predictions(const GroundedTask& task, const SyntheticSpec& spec,
                                     const TrainConfig& base_config) {
    TrainConfig tc = base_config;
    tc.loss = LossKind::mse();
    tc.relu_output = false;
    tc.track_validation = false;
    Dataset dataset = gen_costs(task, spec);
    TrainResult tr = train(dataset, tc, task);

    DemoResult demo;
    demo.csv = "instance,action,true_cost,predicted,predicted_clamped\n";
    std::vector<int> test = dataset.indices(Split::Test);
    for (size_t i = 0; i < test.size(); ++i) {
        const DataInstance& inst = dataset.instances[test[i]];
        CostVector raw = tr.model.predict_raw(inst.x);
        for (int a = 0; a < task.num_actions(); ++a) {
            if (raw[a] < 0.0)
                ++demo.negative_predictions;
            demo.csv += std::to_string(i) + "," + std::to_string(a) + "," +
                        fmt(inst.c[a]) + "," + fmt(raw[a]) + "," +
                        fmt(std::max(raw[a], 0.0)) + "\n";
        }
    }
    return demo;
}

GroundedTask resolve_task(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon != std::string::npos) {
        std::string family = spec.substr(0, colon);
        std::string params = spec.substr(colon + 1);
        if (family == "sp") {
            try {
                return gen_shortest_path(std::stoi(params));
            } catch (const std::invalid_argument&) {
                throw ConfigError("sp:<n> needs an integer, got \"" + params + "\"");
            }
        }
        if (family == "transport")
            return transport_named_instance(params);
        if (family == "rovers")
            return rovers_named_instance(params);
        throw ConfigError("unknown task family: " + family);
    }
    if (!std::filesystem::exists(spec))
        throw ConfigError("task spec is neither a family spec nor a file: " + spec);
    return load_gtask(spec);
}

}  // namespace dflplan
