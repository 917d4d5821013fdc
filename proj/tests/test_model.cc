#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"

#include "dflplan/datagen.h"
#include "dflplan/dfl.h"
#include "dflplan/model.h"
#include "dflplan/rng.h"
#include "dflplan/search.h"
#include "dflplan/strips.h"
#include "test_util.h"

using namespace dflplan;

namespace {

GroundedTask one_edge() {
    return make_task({"s", "g"}, {{"e", {0}, {1}, {0}}}, {0}, {1});
}

GroundedTask two_edges() {
    return make_task({"s", "g"},
                     {{"e0", {0}, {1}, {0}}, {"e1", {0}, {1}, {0}}},
                     {0}, {1});
}

LinearModel random_model(Rng& rng, int k, int m, bool bias) {
    LinearModel model = LinearModel::zeros(k, m, bias);
    for (auto& row : model.weights)
        for (double& w : row)
            w = rng.uniform(-1.0, 1.0);
    for (double& b : model.bias)
        b = rng.uniform(-1.0, 1.0);
    return model;
}

std::vector<DataInstance> random_batch_data(Rng& rng, int k, int m, int n) {
    std::vector<DataInstance> instances;
    for (int i = 0; i < n; ++i) {
        DataInstance inst;
        inst.x = testutil::random_costs(rng, k, -2.0, 2.0);
        inst.c = testutil::random_costs(rng, m, 0.5, 5.0);
        instances.push_back(std::move(inst));
    }
    return instances;
}

std::vector<double> flatten(const LinearModel& model) {
    std::vector<double> flat;
    for (const auto& row : model.weights)
        flat.insert(flat.end(), row.begin(), row.end());
    flat.insert(flat.end(), model.bias.begin(), model.bias.end());
    return flat;
}

LinearModel unflatten(const LinearModel& like, const std::vector<double>& flat) {
    LinearModel model = like;
    size_t at = 0;
    for (auto& row : model.weights)
        for (double& w : row)
            w = flat[at++];
    for (double& b : model.bias)
        b = flat[at++];
    return model;
}

}  // namespace

TEST_CASE("predict is the linear map plus optional bias") {
    LinearModel zero = LinearModel::zeros(2, 3);
    CHECK(zero.predict({1.0, -1.0}) == CostVector{0, 0, 0});

    LinearModel model = LinearModel::zeros(2, 2, false);
    model.weights = {{1.0, 2.0}, {3.0, 4.0}};
    CHECK(model.predict({1.0, 0.0}) == CostVector{1.0, 3.0});
    CHECK(model.predict({0.0, 1.0}) == CostVector{2.0, 4.0});

    LinearModel biased = model;
    biased.has_bias = true;
    biased.bias = {10.0, 20.0};
    CHECK(biased.predict({1.0, 0.0}) == CostVector{11.0, 23.0});

    CHECK_THROWS_AS(model.predict({1.0, 2.0, 3.0}), ConfigError);
}

TEST_CASE("relu_output clamps predict but not predict_raw") {
    LinearModel model = LinearModel::zeros(1, 2, false, true);
    model.weights = {{-3.0}, {2.0}};
    CHECK(model.predict({1.0}) == CostVector{0.0, 2.0});
    CHECK(model.predict_raw({1.0}) == CostVector{-3.0, 2.0});
}

TEST_CASE("mse_grad on the pinned scalar example") {
    LinearModel model = LinearModel::zeros(1, 1, false);
    model.weights = {{2.0}};
    std::vector<DataInstance> data(1);
    data[0].x = {1.0};
    data[0].c = {1.0};
    ParamGrad grad = mse_grad(model, data, {0});
    CHECK(grad.d_weights[0][0] == doctest::Approx(2.0));
}

TEST_CASE("mse_grad vanishes at perfect predictions") {
    LinearModel model = LinearModel::zeros(2, 2, false);
    model.weights = {{1.0, 0.0}, {0.0, 1.0}};
    std::vector<DataInstance> data(1);
    data[0].x = {3.0, 4.0};
    data[0].c = {3.0, 4.0};
    ParamGrad grad = mse_grad(model, data, {0});
    for (const auto& row : grad.d_weights)
        for (double g : row)
            CHECK(g == doctest::Approx(0.0));
}

TEST_CASE("mse_grad matches central finite differences") {
    Rng rng(51);
    for (int point = 0; point < 20; ++point) {
        int k = rng.uniform_int(1, 3), m = rng.uniform_int(1, 4);
        bool bias = rng.uniform() < 0.5;
        LinearModel model = random_model(rng, k, m, bias);
        std::vector<DataInstance> data = random_batch_data(rng, k, m, 3);
        std::vector<int> batch{0, 1, 2};

        ParamGrad grad = mse_grad(model, data, batch);
        std::vector<double> flat_grad;
        for (const auto& row : grad.d_weights)
            flat_grad.insert(flat_grad.end(), row.begin(), row.end());
        flat_grad.insert(flat_grad.end(), grad.d_bias.begin(), grad.d_bias.end());

        auto loss_at = [&](const std::vector<double>& params) {
            return mse_loss(unflatten(model, params), data, batch);
        };
        std::vector<double> params = flatten(model);
        for (size_t i = 0; i < params.size(); ++i) {
            double fd = testutil::central_difference(loss_at, params, i, 1e-5);
            CHECK(flat_grad[i] ==
                  doctest::Approx(fd).epsilon(1e-6).scale(std::max(1.0, std::abs(fd))));
        }
    }
}

TEST_CASE("dfl_grad composes the cost-space subgradient with the chain rule") {
    GroundedTask edges = two_edges();
    std::vector<DataInstance> data(1);
    data[0].x = {2.0};
    data[0].c = {4.0, 1.0};
    data[0].pi_true = solve(edges, data[0].c, SolverMode::opt());

    LinearModel model = LinearModel::zeros(1, 2, false);
    model.weights = {{0.5}, {1.5}};  // c_hat = [1, 3], v = [-2, 5]

    TrainConfig config;
    config.loss = LossKind::spo_plus(CorrectionMode::Threshold);
    CorrectedPlannerSolver solver(edges, SolverMode::opt(), CorrectionMode::Threshold);
    ParamGrad grad = dfl_grad(model, data, {0}, config, solver);

    CostVector sub = spo_subgradient({1.0, 3.0}, data[0].c, data[0].pi_true, edges,
                                     SolverMode::opt(), CorrectionMode::Threshold);
    CHECK(grad.d_weights[0][0] == doctest::Approx(sub[0] * 2.0));
    CHECK(grad.d_weights[1][0] == doctest::Approx(sub[1] * 2.0));
}

TEST_CASE("dfl_grad is zero when the model predicts the truth") {
    GroundedTask edges = two_edges();
    std::vector<DataInstance> data(1);
    data[0].x = {1.0};
    data[0].c = {4.0, 1.0};
    data[0].pi_true = solve(edges, data[0].c, SolverMode::opt());

    LinearModel model = LinearModel::zeros(1, 2, false);
    model.weights = {{4.0}, {1.0}};

    TrainConfig config;
    config.loss = LossKind::spo_plus(CorrectionMode::AddMin);
    CorrectedPlannerSolver solver(edges, SolverMode::opt(), CorrectionMode::AddMin);
    ParamGrad grad = dfl_grad(model, data, {0}, config, solver);
    CHECK(grad.d_weights[0][0] == doctest::Approx(0.0));
    CHECK(grad.d_weights[1][0] == doctest::Approx(0.0));
}

TEST_CASE("corrections give bitwise-equal dfl gradients when v is non-negative") {
    GroundedTask edges = two_edges();
    std::vector<DataInstance> data(1);
    data[0].x = {1.0};
    data[0].c = {4.0, 1.0};
    data[0].pi_true = solve(edges, data[0].c, SolverMode::opt());

    LinearModel model = LinearModel::zeros(1, 2, false);
    model.weights = {{10.0}, {9.0}};  // v = [16, 17], all non-negative

    TrainConfig config;
    config.loss = LossKind::spo_plus(CorrectionMode::Threshold);
    CorrectedPlannerSolver st(edges, SolverMode::opt(), CorrectionMode::Threshold);
    ParamGrad gt = dfl_grad(model, data, {0}, config, st);

    config.loss = LossKind::spo_plus(CorrectionMode::AddMin);
    CorrectedPlannerSolver sa(edges, SolverMode::opt(), CorrectionMode::AddMin);
    ParamGrad ga = dfl_grad(model, data, {0}, config, sa);

    CHECK(gt.d_weights == ga.d_weights);
    CHECK(gt.d_bias == ga.d_bias);
}

TEST_CASE("one nspo step raises a prediction flagged as too low") {
    GroundedTask edge = one_edge();
    std::vector<DataInstance> data(1);
    data[0].x = {1.0};
    data[0].c = {4.0};
    data[0].pi_true = {1};

    LinearModel model = LinearModel::zeros(1, 1, false);  // c_hat = 0, v = -4
    TrainConfig config;
    config.loss = LossKind::nspo(CorrectionMode::Threshold, 1.0);
    CorrectedPlannerSolver solver(edge, SolverMode::opt(), CorrectionMode::Threshold);
    ParamGrad grad = dfl_grad(model, data, {0}, config, solver);
    CHECK(grad.d_weights[0][0] < 0.0);

    double lr = 0.1;
    model.weights[0][0] -= lr * grad.d_weights[0][0];
    CHECK(model.predict(data[0].x)[0] > 0.0);
}

TEST_CASE("train with zero learning rate leaves the model at init") {
    GroundedTask grid = gen_shortest_path(3);
    SyntheticSpec spec;
    spec.n_train = 12;
    spec.n_valid = 4;
    spec.n_test = 4;
    spec.seed = 5;
    Dataset dataset = gen_costs(grid, spec);
    precompute_true_solutions(dataset, grid);

    TrainConfig config;
    config.loss = LossKind::spo_plus(CorrectionMode::AddMin);
    config.learning_rate = 0.0;
    config.epochs = 3;
    TrainResult result = train(dataset, config, grid);

    for (const auto& row : result.model.weights)
        for (double w : row)
            CHECK(w == 0.0);
    REQUIRE(result.history.size() == 3);
    CHECK(result.history[0].train_loss == doctest::Approx(result.history[2].train_loss));
}

TEST_CASE("training is bitwise reproducible") {
    GroundedTask grid = gen_shortest_path(3);
    SyntheticSpec spec;
    spec.n_train = 16;
    spec.n_valid = 4;
    spec.n_test = 4;
    spec.seed = 6;
    Dataset dataset = gen_costs(grid, spec);
    precompute_true_solutions(dataset, grid);

    TrainConfig config;
    config.loss = LossKind::nspo(CorrectionMode::AddMin, 1.0);
    config.epochs = 4;
    config.seed = 9;

    TrainResult a = train(dataset, config, grid);
    TrainResult b = train(dataset, config, grid);
    CHECK(a.model.weights == b.model.weights);
    CHECK(a.model.bias == b.model.bias);
    CHECK(a.planner_calls == b.planner_calls);
}

TEST_CASE("planner call accounting counts one solve per train instance per epoch") {
    GroundedTask grid = gen_shortest_path(3);
    SyntheticSpec spec;
    spec.n_train = 10;
    spec.n_valid = 2;
    spec.n_test = 2;
    spec.seed = 7;
    Dataset dataset = gen_costs(grid, spec);
    precompute_true_solutions(dataset, grid);

    TrainConfig config;
    config.loss = LossKind::spo_plus(CorrectionMode::AddMin);
    config.epochs = 5;
    TrainResult result = train(dataset, config, grid);
    CHECK(result.planner_calls == 10 * 5);

    config.loss = LossKind::mse();
    TrainResult mse = train(dataset, config, grid);
    CHECK(mse.planner_calls == 0);
}

TEST_CASE("mse training drives regret to zero on well-specified data") {
    GroundedTask grid = gen_shortest_path(3);
    SyntheticSpec spec;
    spec.n_train = 200;
    spec.n_valid = 30;
    spec.n_test = 30;
    spec.deg = 1;
    spec.noise = 0.0;
    spec.seed = 8;
    Dataset dataset = gen_costs(grid, spec);
    precompute_true_solutions(dataset, grid);

    TrainConfig config;
    config.loss = LossKind::mse();
    config.epochs = 60;
    TrainResult result = train(dataset, config, grid);
    CHECK(result.history.back().valid_regret_pct >= 0.0);
    CHECK(result.history.back().valid_regret_pct <= 1e-3);
}

TEST_CASE("precompute_true_solutions fills optimal vectors and caches to disk") {
    GroundedTask grid = gen_shortest_path(3);
    SyntheticSpec spec;
    spec.n_train = 6;
    spec.n_valid = 2;
    spec.n_test = 2;
    spec.seed = 10;
    Dataset dataset = gen_costs(grid, spec);

    std::string dir = "/tmp/dflplan_test_solcache";
    std::filesystem::remove_all(dir);
    CHECK_FALSE(precompute_true_solutions(dataset, grid, dir));
    for (const DataInstance& inst : dataset.instances) {
        REQUIRE(!inst.pi_true.empty());
        CHECK(inner_cost(inst.c, inst.pi_true) ==
              doctest::Approx(inner_cost(inst.c, solve(grid, inst.c, SolverMode::opt()))));
        HffHeuristic h(grid, inst.c);
        SearchResult greedy = gbfs(grid, inst.c, h);
        CHECK(inner_cost(inst.c, inst.pi_true) <= greedy.cost + 1e-9);
    }

    Dataset again = gen_costs(grid, spec);
    CHECK(precompute_true_solutions(again, grid, dir));
    for (size_t i = 0; i < dataset.instances.size(); ++i)
        CHECK(again.instances[i].pi_true == dataset.instances[i].pi_true);
    std::filesystem::remove_all(dir);
}

TEST_CASE("model files round-trip and reject malformed content") {
    Rng rng(52);
    LinearModel model = random_model(rng, 3, 4, true);
    model.relu_output = true;
    std::string path = "/tmp/dflplan_test_model.json";
    save_model(model, path, "abc123");
    LinearModel loaded = load_model(path);
    CHECK(loaded.weights == model.weights);
    CHECK(loaded.bias == model.bias);
    CHECK(loaded.has_bias == model.has_bias);
    CHECK(loaded.relu_output == model.relu_output);
    std::remove(path.c_str());

    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{\"k\": 2, \"m\": 1, \"weights\": [[1.0, 2.0, 3.0]], \"bias\": null}", f);
    std::fclose(f);
    CHECK_THROWS_AS(load_model(path), TaskFormatError);
    std::remove(path.c_str());
}

TEST_CASE("dataset_hash separates different datasets") {
    GroundedTask grid = gen_shortest_path(3);
    SyntheticSpec spec;
    spec.n_train = 4;
    spec.n_valid = 2;
    spec.n_test = 2;
    spec.seed = 11;
    Dataset a = gen_costs(grid, spec);
    Dataset b = gen_costs(grid, spec);
    CHECK(dataset_hash(a, grid) == dataset_hash(b, grid));

    spec.seed = 12;
    Dataset c = gen_costs(grid, spec);
    CHECK(dataset_hash(a, grid) != dataset_hash(c, grid));
}
