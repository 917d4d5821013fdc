#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dflplan/common.h"
#include "dflplan/datagen.h"
#include "dflplan/dfl.h"
#include "dflplan/gtask_io.h"
#include "dflplan/harness.h"
#include "dflplan/model.h"
#include "dflplan/search.h"

namespace {

using namespace dflplan;

LossKind parse_loss(const std::string& s, double lambda) {
    if (s == "mse") return LossKind::mse();
    if (s == "spo:relu") return LossKind::spo_plus(CorrectionMode::Threshold);
    if (s == "spo:addmin") return LossKind::spo_plus(CorrectionMode::AddMin);
    if (s == "nspo:relu") return LossKind::nspo(CorrectionMode::Threshold, lambda);
    if (s == "nspo:addmin") return LossKind::nspo(CorrectionMode::AddMin, lambda);
    throw ConfigError("unknown loss '" + s +
                      "' (expected mse, spo:relu, spo:addmin, nspo:relu or nspo:addmin)");
}

SolverMode parse_mode(const std::string& s) {
    if (s == "opt") return SolverMode::opt();
    if (s == "nonopt") return SolverMode::nonopt();
    if (s == "heu") return SolverMode::heu();
    if (s.rfind("bound:", 0) == 0) {
        double w = 0.0;
        try {
            w = std::stod(s.substr(6));
        } catch (const std::exception&) {
            throw ConfigError("bad weight in mode '" + s + "'");
        }
        if (w <= 1.0) throw ConfigError("bound weight must be > 1, got " + s.substr(6));
        return SolverMode::bound(w);
    }
    throw ConfigError("unknown mode '" + s + "' (expected opt, bound:<w>, nonopt or heu)");
}

CorrectionMode parse_correction(const std::string& s) {
    if (s == "relu") return CorrectionMode::Threshold;
    if (s == "addmin") return CorrectionMode::AddMin;
    throw ConfigError("unknown correction '" + s + "' (expected relu or addmin)");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw ConfigError("short write to " + path);
}

struct CommonOpts {
    std::string task_spec;
    std::string data_path;
    std::string out_path;
    uint64_t seed = 0;
    int deg = 4;
    double noise = 0.25;
    int k = 5;
    int n_train = 400;
    int n_valid = 100;
    int n_test = 400;

    SyntheticSpec synthetic() const {
        SyntheticSpec s;
        s.n_train = n_train;
        s.n_valid = n_valid;
        s.n_test = n_test;
        s.k = k;
        s.deg = deg;
        s.noise = noise;
        s.seed = seed;
        return s;
    }

    void add_data_flags(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "base seed; all randomness derives from it");
        cmd->add_option("--deg", deg, "cost nonlinearity exponent");
        cmd->add_option("--noise", noise, "multiplicative noise half-width");
        cmd->add_option("--k", k, "feature dimension");
        cmd->add_option("--n-train", n_train, "training instances");
        cmd->add_option("--n-valid", n_valid, "validation instances");
        cmd->add_option("--n-test", n_test, "test instances");
    }
};

// Load --data if given, otherwise generate from --task. Always returns the
// resolved task alongside.
std::pair<Dataset, GroundedTask> obtain_data(const CommonOpts& opts) {
    if (!opts.data_path.empty()) {
        Dataset dataset = load_dataset(opts.data_path);
        const std::string& spec = opts.task_spec.empty() ? dataset.task_ref : opts.task_spec;
        if (spec.empty())
            throw ConfigError("dataset names no task; pass --task");
        return {std::move(dataset), resolve_task(spec)};
    }
    if (opts.task_spec.empty()) throw ConfigError("need --task or --data");
    GroundedTask task = resolve_task(opts.task_spec);
    Dataset dataset = gen_costs(task, opts.synthetic());
    dataset.task_ref = opts.task_spec;
    return {std::move(dataset), std::move(task)};
}

int run_gen_task(const std::string& task_spec, const std::string& out_path) {
    GroundedTask task = resolve_task(task_spec);
    save_gtask(task, out_path);
    std::cout << out_path << ": " << task.num_propositions() << " propositions, "
              << task.num_actions() << " actions\n";
    return 0;
}

int run_gen_data(const CommonOpts& opts) {
    GroundedTask task = resolve_task(opts.task_spec);
    Dataset dataset = gen_costs(task, opts.synthetic());
    dataset.task_ref = opts.task_spec;
    save_dataset(dataset, opts.out_path);
    std::cout << opts.out_path << ": " << dataset.instances.size() << " instances over "
              << task.num_actions() << " actions\n";
    return 0;
}

int run_train(const CommonOpts& opts, const TrainConfig& config,
              const std::string& cache_dir) {
    auto [dataset, task] = obtain_data(opts);
    precompute_true_solutions(dataset, task, cache_dir);
    TrainResult result = train(dataset, config, task);
    const EpochStats& last = result.history.back();
    std::cout << "epochs: " << result.history.size() << "\n"
              << "final train loss: " << last.train_loss << "\n";
    if (last.valid_regret_pct >= 0.0)
        std::cout << "final validation regret: " << last.valid_regret_pct << "%\n";
    std::cout << "planner calls: " << result.planner_calls << "\n";
    if (!opts.out_path.empty()) {
        save_model(result.model, opts.out_path, dataset_hash(dataset, task));
        std::cout << "model written to " << opts.out_path << "\n";
    }
    return 0;
}

int run_eval(const CommonOpts& opts, const std::string& model_path,
             const SolverMode& mode, CorrectionMode correction,
             const std::string& cache_dir) {
    auto [dataset, task] = obtain_data(opts);
    precompute_true_solutions(dataset, task, cache_dir);
    LinearModel model = load_model(model_path);
    RegretReport report = percentage_regret(model, dataset, Split::Test, task, mode, correction);
    std::cout << "test instances: " << report.per_instance_pct.size() << "\n"
              << "mean percentage regret: " << report.mean_pct << "\n";
    if (!opts.out_path.empty()) {
        std::string csv = "instance,regret_pct\n";
        for (size_t i = 0; i < report.per_instance_pct.size(); ++i) {
            char line[64];
            std::snprintf(line, sizeof(line), "%zu,%.6f\n", i, report.per_instance_pct[i]);
            csv += line;
        }
        write_file(opts.out_path, csv);
    }
    return 0;
}

int run_experiment_cmd(const CommonOpts& opts, const std::vector<std::string>& losses,
                       double lambda, const SolverMode& mode,
                       std::optional<double> cache_p, int n_seeds,
                       const TrainConfig& base, const std::string& eval_correction,
                       const std::string& cache_dir) {
    if (losses.empty()) throw ConfigError("experiment needs at least one --loss");
    ExperimentConfig config;
    config.task_spec = opts.task_spec.empty() ? std::string("sp:5") : opts.task_spec;
    config.data = opts.synthetic();
    config.eval_mode = SolverMode::opt();
    config.eval_correction = parse_correction(eval_correction);
    config.n_seeds = n_seeds;
    config.base_seed = opts.seed;
    config.solution_cache_dir = cache_dir;
    for (const std::string& name : losses) {
        MethodSpec method;
        method.name = name;
        method.train = base;
        method.train.loss = parse_loss(name, lambda);
        method.train.mode = mode;
        if (method.train.loss.family != LossKind::Family::Mse) method.train.cache_p = cache_p;
        config.methods.push_back(std::move(method));
    }
    ExperimentResult result = run_experiment(config);
    for (const std::string& err : result.errors) std::cerr << "run failed: " << err << "\n";
    if (opts.out_path.empty()) {
        std::cout << result.csv;
        std::cerr << result.timings_csv;
    } else {
        write_file(opts.out_path, result.csv);
        write_file(opts.out_path + ".timings.csv", result.timings_csv);
        std::cout << "results written to " << opts.out_path << "\n";
    }
    return result.errors.empty() ? 0 : 1;
}

int run_demo_negatives(const CommonOpts& opts, const TrainConfig& base) {
    const std::string spec = opts.task_spec.empty() ? std::string("sp:5") : opts.task_spec;
    GroundedTask task = resolve_task(spec);
    DemoResult result = demo_negative_predictions(task, opts.synthetic(), base);
    if (opts.out_path.empty()) {
        std::cout << result.csv;
        std::cerr << "negative raw predictions: " << result.negative_predictions << "\n";
    } else {
        write_file(opts.out_path, result.csv);
        std::cout << "negative raw predictions: " << result.negative_predictions << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decision-focused learning of action costs for classical planning"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string loss_str = "mse";
    std::vector<std::string> losses;
    double lambda = 1.0;
    std::string mode_str = "opt";
    std::optional<double> cache_p;
    int n_seeds = 5;
    std::string model_path;
    std::string eval_correction = "addmin";
    std::string cache_dir;
    TrainConfig base;

    auto add_train_flags = [&](CLI::App* cmd) {
        cmd->add_option("--lambda", lambda, "penalty weight on negative-side components");
        cmd->add_option("--mode", mode_str, "planner mode: opt, bound:<w>, nonopt, heu");
        cmd->add_option("--epochs", base.epochs, "training epochs");
        cmd->add_option("--lr", base.learning_rate, "learning rate");
        cmd->add_option("--batch", base.batch_size, "minibatch size");
        cmd->add_flag("--relu-output", base.relu_output, "clamp model predictions at zero");
        cmd->add_flag("!--no-bias", base.use_bias, "drop the per-action bias term");
        cmd->add_option("--cache-dir", cache_dir, "directory for precomputed true solutions");
    };

    CLI::App* gen_task = app.add_subcommand("gen-task", "write a grounded task file");
    gen_task->add_option("--task", opts.task_spec, "family spec, e.g. sp:5, transport:5-1-1a, rovers:2")
        ->required();
    gen_task->add_option("--out", opts.out_path, "output .gtask path")->required();

    CLI::App* gen_data = app.add_subcommand("gen-data", "generate a synthetic cost dataset");
    gen_data->add_option("--task", opts.task_spec, "task spec or .gtask path")->required();
    gen_data->add_option("--out", opts.out_path, "output dataset path")->required();
    opts.add_data_flags(gen_data);

    CLI::App* train_cmd = app.add_subcommand("train", "train a cost predictor");
    train_cmd->add_option("--task", opts.task_spec, "task spec or .gtask path");
    train_cmd->add_option("--data", opts.data_path, "dataset path (generated when absent)");
    train_cmd->add_option("--loss", loss_str,
                          "mse, spo:relu, spo:addmin, nspo:relu or nspo:addmin");
    train_cmd->add_option("--cache-p", cache_p, "solve probability for the solution cache");
    train_cmd->add_option("--out", opts.out_path, "model output path");
    opts.add_data_flags(train_cmd);
    add_train_flags(train_cmd);

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a model's percentage regret");
    eval_cmd->add_option("--model", model_path, "model path")->required();
    eval_cmd->add_option("--task", opts.task_spec, "task spec or .gtask path");
    eval_cmd->add_option("--data", opts.data_path, "dataset path (generated when absent)");
    eval_cmd->add_option("--mode", mode_str, "planner mode for evaluation");
    eval_cmd->add_option("--correction", eval_correction, "relu or addmin");
    eval_cmd->add_option("--out", opts.out_path, "per-instance regret csv");
    eval_cmd->add_option("--cache-dir", cache_dir, "directory for precomputed true solutions");
    opts.add_data_flags(eval_cmd);

    CLI::App* exp_cmd = app.add_subcommand("experiment", "multi-seed method comparison");
    exp_cmd->add_option("--task", opts.task_spec, "task spec or .gtask path");
    exp_cmd->add_option("--loss", losses, "method rows; repeatable");
    exp_cmd->add_option("--cache-p", cache_p, "solution-cache solve probability for non-mse rows");
    exp_cmd->add_option("--seeds", n_seeds, "number of seeds");
    exp_cmd->add_option("--eval-correction", eval_correction, "relu or addmin");
    exp_cmd->add_option("--out", opts.out_path, "results csv path (stdout when absent)");
    opts.add_data_flags(exp_cmd);
    add_train_flags(exp_cmd);

    CLI::App* demo_cmd = app.add_subcommand("demo-negatives",
                                            "emit true-vs-predicted scatter data");
    demo_cmd->add_option("--task", opts.task_spec, "task spec or .gtask path");
    demo_cmd->add_option("--out", opts.out_path, "scatter csv path (stdout when absent)");
    opts.add_data_flags(demo_cmd);
    add_train_flags(demo_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        base.seed = opts.seed;
        if (gen_task->parsed()) return run_gen_task(opts.task_spec, opts.out_path);
        if (gen_data->parsed()) return run_gen_data(opts);
        if (train_cmd->parsed()) {
            base.loss = parse_loss(loss_str, lambda);
            base.mode = parse_mode(mode_str);
            base.cache_p = cache_p;
            return run_train(opts, base, cache_dir);
        }
        if (eval_cmd->parsed())
            return run_eval(opts, model_path, parse_mode(mode_str),
                            parse_correction(eval_correction), cache_dir);
        if (exp_cmd->parsed())
            return run_experiment_cmd(opts, losses, lambda, parse_mode(mode_str), cache_p,
                                      n_seeds, base, eval_correction, cache_dir);
        if (demo_cmd->parsed()) return run_demo_negatives(opts, base);
    } catch (const UnsolvableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const TaskFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NotADagError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const EmptyCacheError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
