#include "dflplan/datagen.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dflplan/heuristics.h"
#include "dflplan/rng.h"
#include "dflplan/search.h"

using nlohmann::json;

namespace dflplan {

namespace {

void check_solvable(const GroundedTask& task, const char* generator) {
    CostVector unit(task.num_actions(), 1.0);
    HffHeuristic h(task, unit);
    try {
        gbfs(task, unit, h);
    } catch (const UnsolvableError&) {
        throw std::logic_error(std::string(generator) + " produced an unsolvable task");
    }
}

std::string cell_name(const GridCell& c) {
    return std::to_string(c.x) + "-" + std::to_string(c.y);
}

}  // namespace

GroundedTask gen_shortest_path(int n) {
    if (n < 2)
        throw ConfigError("shortest-path grid needs n >= 2");
    std::vector<std::string> props;
    props.reserve(n * n);
    auto prop_id = [n](int x, int y) { return y * n + x; };
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            props.push_back("at-" + std::to_string(x) + "-" + std::to_string(y));

    std::vector<ActionSpec> actions;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            if (x + 1 < n) {
                ActionSpec a;
                a.name = "right-" + std::to_string(x) + "-" + std::to_string(y);
                a.pre = {prop_id(x, y)};
                a.add = {prop_id(x + 1, y)};
                a.del = {prop_id(x, y)};
                actions.push_back(std::move(a));
            }
            if (y + 1 < n) {
                ActionSpec a;
                a.name = "up-" + std::to_string(x) + "-" + std::to_string(y);
                a.pre = {prop_id(x, y)};
                a.add = {prop_id(x, y + 1)};
                a.del = {prop_id(x, y)};
                actions.push_back(std::move(a));
            }
        }
    }

    GroundedTask task = make_task(std::move(props), std::move(actions), {prop_id(0, 0)},
                                  {prop_id(n - 1, n - 1)});
    check_solvable(task, "gen_shortest_path");
    return task;
}

GroundedTask gen_transport(int n,
                           const std::vector<std::pair<GridCell, GridCell>>& packages,
                           const std::vector<GridCell>& trucks) {
    auto check_cell = [n](const GridCell& c, const std::string& what) {
        if (c.x < 1 || c.x > n || c.y < 1 || c.y > n)
            throw ConfigError(what + " (" + cell_name(c) + ") outside the " +
                              std::to_string(n) + "x" + std::to_string(n) + " grid");
    };
    if (packages.empty() || trucks.empty())
        throw ConfigError("transport needs at least one package and one truck");
    for (size_t p = 0; p < packages.size(); ++p) {
        check_cell(packages[p].first, "package " + std::to_string(p + 1) + " pickup");
        check_cell(packages[p].second, "package " + std::to_string(p + 1) + " drop");
    }
    for (size_t t = 0; t < trucks.size(); ++t)
        check_cell(trucks[t], "truck " + std::to_string(t + 1));

    const int nt = static_cast<int>(trucks.size());
    const int np = static_cast<int>(packages.size());
    std::vector<std::string> props;
    auto truck_at = [&](int t, int x, int y) { return (t * n * n) + (y - 1) * n + (x - 1); };
    for (int t = 0; t < nt; ++t)
        for (int y = 1; y <= n; ++y)
            for (int x = 1; x <= n; ++x)
                props.push_back("truck" + std::to_string(t + 1) + "-at-" +
                                std::to_string(x) + "-" + std::to_string(y));
    const int empty_base = nt * n * n;
    for (int t = 0; t < nt; ++t)
        props.push_back("truck" + std::to_string(t + 1) + "-empty");
    const int pkg_base = empty_base + nt;
    auto pkg_at = [&](int p, int x, int y) { return pkg_base + p * n * n + (y - 1) * n + (x - 1); };
    for (int p = 0; p < np; ++p)
        for (int y = 1; y <= n; ++y)
            for (int x = 1; x <= n; ++x)
                props.push_back("pkg" + std::to_string(p + 1) + "-at-" +
                                std::to_string(x) + "-" + std::to_string(y));
    const int in_base = pkg_base + np * n * n;
    auto pkg_in = [&](int p, int t) { return in_base + p * nt + t; };
    for (int p = 0; p < np; ++p)
        for (int t = 0; t < nt; ++t)
            props.push_back("pkg" + std::to_string(p + 1) + "-in-truck" +
                            std::to_string(t + 1));
    const int delivered_base = in_base + np * nt;
    for (int p = 0; p < np; ++p)
        props.push_back("pkg" + std::to_string(p + 1) + "-delivered");

    std::vector<ActionSpec> actions;
    const int dx[] = {1, 0, -1, 0};
    const int dy[] = {0, 1, 0, -1};
    for (int t = 0; t < nt; ++t) {
        for (int y = 1; y <= n; ++y) {
            for (int x = 1; x <= n; ++x) {
                for (int d = 0; d < 4; ++d) {
                    int x2 = x + dx[d], y2 = y + dy[d];
                    if (x2 < 1 || x2 > n || y2 < 1 || y2 > n)
                        continue;
                    ActionSpec a;
                    a.name = "drive-truck" + std::to_string(t + 1) + "-" +
                             std::to_string(x) + "-" + std::to_string(y) + "-" +
                             std::to_string(x2) + "-" + std::to_string(y2);
                    a.pre = {truck_at(t, x, y)};
                    a.add = {truck_at(t, x2, y2)};
                    a.del = {truck_at(t, x, y)};
                    actions.push_back(std::move(a));
                }
            }
        }
    }
    for (int t = 0; t < nt; ++t) {
        for (int p = 0; p < np; ++p) {
            for (int y = 1; y <= n; ++y) {
                for (int x = 1; x <= n; ++x) {
                    ActionSpec a;
                    a.name = "pickup-truck" + std::to_string(t + 1) + "-pkg" +
                             std::to_string(p + 1) + "-" + std::to_string(x) + "-" +
                             std::to_string(y);
                    a.pre = {truck_at(t, x, y), pkg_at(p, x, y), empty_base + t};
                    a.add = {pkg_in(p, t)};
                    a.del = {pkg_at(p, x, y), empty_base + t};
                    actions.push_back(std::move(a));
                }
            }
        }
    }
    for (int t = 0; t < nt; ++t) {
        for (int p = 0; p < np; ++p) {
            for (int y = 1; y <= n; ++y) {
                for (int x = 1; x <= n; ++x) {
                    ActionSpec a;
                    a.name = "drop-truck" + std::to_string(t + 1) + "-pkg" +
                             std::to_string(p + 1) + "-" + std::to_string(x) + "-" +
                             std::to_string(y);
                    a.pre = {truck_at(t, x, y), pkg_in(p, t)};
                    a.add = {pkg_at(p, x, y), empty_base + t};
                    if (packages[p].second.x == x && packages[p].second.y == y)
                        a.add.push_back(delivered_base + p);
                    a.del = {pkg_in(p, t)};
                    actions.push_back(std::move(a));
                }
            }
        }
    }

    std::vector<int> init;
    for (int t = 0; t < nt; ++t) {
        init.push_back(truck_at(t, trucks[t].x, trucks[t].y));
        init.push_back(empty_base + t);
    }
    for (int p = 0; p < np; ++p)
        init.push_back(pkg_at(p, packages[p].first.x, packages[p].first.y));
    std::vector<int> goal;
    for (int p = 0; p < np; ++p)
        goal.push_back(delivered_base + p);

    GroundedTask task = make_task(std::move(props), std::move(actions), init, goal);
    check_solvable(task, "gen_transport");
    return task;
}

GroundedTask gen_rovers(int n_rovers, int n_waypoints, int n_cameras, int n_goals,
                        uint64_t seed) {
    if (n_rovers < 1 || n_waypoints < 2 || n_cameras < 1 || n_goals < 1)
        throw ConfigError("rovers needs >=1 rover, >=2 waypoints, >=1 camera, >=1 goal");
    Rng rng(substream_seed(seed, "rovers"));

    // Connected waypoint graph: a random spanning tree plus a few extra edges.
    std::set<std::pair<int, int>> edge_set;
    auto add_edge = [&](int a, int b) {
        if (a > b)
            std::swap(a, b);
        return a != b && edge_set.insert({a, b}).second;
    };
    for (int w = 1; w < n_waypoints; ++w)
        add_edge(w, rng.uniform_int(0, w - 1));
    for (int i = 0; i < n_waypoints / 2; ++i)
        add_edge(rng.uniform_int(0, n_waypoints - 1), rng.uniform_int(0, n_waypoints - 1));

    // Lander-visible waypoints.
    std::vector<int> wps(n_waypoints);
    for (int w = 0; w < n_waypoints; ++w)
        wps[w] = w;
    rng.shuffle(wps);
    int n_visible = std::max(1, n_waypoints / 3);
    std::vector<int> visible(wps.begin(), wps.begin() + n_visible);
    std::sort(visible.begin(), visible.end());

    std::vector<int> rover_start(n_rovers);
    for (int r = 0; r < n_rovers; ++r)
        rover_start[r] = rng.uniform_int(0, n_waypoints - 1);
    std::vector<int> goal_wp(n_goals), goal_camera(n_goals);
    for (int j = 0; j < n_goals; ++j) {
        goal_wp[j] = rng.uniform_int(0, n_waypoints - 1);
        goal_camera[j] = j % n_cameras;
    }
    std::vector<int> camera_target(n_cameras);
    for (int c = 0; c < n_cameras; ++c)
        camera_target[c] = rng.uniform_int(0, n_waypoints - 1);

    std::vector<std::string> props;
    auto rover_at = [&](int r, int w) { return r * n_waypoints + w; };
    for (int r = 0; r < n_rovers; ++r)
        for (int w = 0; w < n_waypoints; ++w)
            props.push_back("rover" + std::to_string(r + 1) + "-at-wp" +
                            std::to_string(w));
    const int calib_base = n_rovers * n_waypoints;
    auto calibrated = [&](int r, int c) { return calib_base + r * n_cameras + c; };
    for (int r = 0; r < n_rovers; ++r)
        for (int c = 0; c < n_cameras; ++c)
            props.push_back("rover" + std::to_string(r + 1) + "-cam" +
                            std::to_string(c + 1) + "-calibrated");
    const int have_base = calib_base + n_rovers * n_cameras;
    auto have = [&](int r, int j) { return have_base + r * n_goals + j; };
    for (int r = 0; r < n_rovers; ++r)
        for (int j = 0; j < n_goals; ++j)
            props.push_back("rover" + std::to_string(r + 1) + "-has-data" +
                            std::to_string(j + 1));
    const int comm_base = have_base + n_rovers * n_goals;
    for (int j = 0; j < n_goals; ++j)
        props.push_back("data" + std::to_string(j + 1) + "-communicated");

    std::vector<ActionSpec> actions;
    for (int r = 0; r < n_rovers; ++r) {
        for (const auto& [a, b] : edge_set) {
            for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
                ActionSpec act;
                act.name = "navigate-rover" + std::to_string(r + 1) + "-wp" +
                           std::to_string(from) + "-wp" + std::to_string(to);
                act.pre = {rover_at(r, from)};
                act.add = {rover_at(r, to)};
                act.del = {rover_at(r, from)};
                actions.push_back(std::move(act));
            }
        }
    }
    for (int j = 0; j < n_goals; ++j) {
        for (int r = 0; r < n_rovers; ++r) {
            if (j % 3 == 2) {
                int cam = goal_camera[j];
                ActionSpec take;
                take.name = "take-image-data" + std::to_string(j + 1) + "-rover" +
                            std::to_string(r + 1) + "-cam" + std::to_string(cam + 1);
                take.pre = {rover_at(r, goal_wp[j]), calibrated(r, cam)};
                take.add = {have(r, j)};
                take.del = {calibrated(r, cam)};
                actions.push_back(std::move(take));
            } else {
                ActionSpec sample;
                sample.name = std::string(j % 3 == 0 ? "sample-rock" : "sample-soil") +
                              "-data" + std::to_string(j + 1) + "-rover" +
                              std::to_string(r + 1);
                sample.pre = {rover_at(r, goal_wp[j])};
                sample.add = {have(r, j)};
                actions.push_back(std::move(sample));
            }
        }
    }
    for (int r = 0; r < n_rovers; ++r) {
        for (int c = 0; c < n_cameras; ++c) {
            ActionSpec calib;
            calib.name = "calibrate-rover" + std::to_string(r + 1) + "-cam" +
                         std::to_string(c + 1) + "-wp" + std::to_string(camera_target[c]);
            calib.pre = {rover_at(r, camera_target[c])};
            calib.add = {calibrated(r, c)};
            actions.push_back(std::move(calib));
        }
    }
    for (int j = 0; j < n_goals; ++j) {
        for (int r = 0; r < n_rovers; ++r) {
            for (int v : visible) {
                ActionSpec comm;
                comm.name = "communicate-data" + std::to_string(j + 1) + "-rover" +
                            std::to_string(r + 1) + "-wp" + std::to_string(v);
                comm.pre = {rover_at(r, v), have(r, j)};
                comm.add = {comm_base + j};
                actions.push_back(std::move(comm));
            }
        }
    }

    std::vector<int> init;
    for (int r = 0; r < n_rovers; ++r)
        init.push_back(rover_at(r, rover_start[r]));
    std::vector<int> goal;
    for (int j = 0; j < n_goals; ++j)
        goal.push_back(comm_base + j);

    GroundedTask task = make_task(std::move(props), std::move(actions), init, goal);
    check_solvable(task, "gen_rovers");
    return task;
}

GroundedTask transport_named_instance(const std::string& name) {
    using P = std::pair<GridCell, GridCell>;
    if (name == "5-1-1a")
        return gen_transport(5, {P{{5, 5}, {1, 1}}}, {{1, 3}});
    if (name == "5-1-1b")
        return gen_transport(5, {P{{2, 2}, {1, 1}}}, {{1, 3}});
    if (name == "5-2-1a")
        return gen_transport(5, {P{{5, 5}, {2, 1}}, P{{1, 5}, {5, 1}}}, {{3, 3}});
    if (name == "5-2-1b")
        return gen_transport(5, {P{{5, 4}, {2, 1}}, P{{4, 3}, {1, 1}}}, {{5, 5}});
    if (name == "5-3-1")
        return gen_transport(5, {P{{1, 4}, {5, 4}}, P{{4, 3}, {5, 1}}, P{{3, 4}, {4, 1}}},
                             {{1, 1}});
    if (name == "5-2-2")
        return gen_transport(5, {P{{1, 4}, {5, 4}}, P{{1, 5}, {3, 3}}}, {{1, 1}, {5, 5}});
    if (name == "10-1-1")
        return gen_transport(10, {P{{3, 9}, {1, 1}}}, {{10, 1}});
    throw ConfigError("unknown transport instance: " + name);
}

GroundedTask rovers_named_instance(const std::string& name) {
    std::string digit = name;
    if (digit.rfind("rovers", 0) == 0)
        digit = digit.substr(6);
    if (digit == "1")
        return gen_rovers(1, 7, 1, 3, 1);
    if (digit == "2")
        return gen_rovers(1, 8, 1, 4, 2);
    if (digit == "3")
        return gen_rovers(1, 10, 1, 5, 3);
    if (digit == "4")
        return gen_rovers(1, 10, 3, 6, 4);
    if (digit == "5")
        return gen_rovers(1, 10, 3, 6, 5);
    throw ConfigError("unknown rovers instance: " + name);
}

Dataset gen_costs(const GroundedTask& task, const SyntheticSpec& spec) {
    if (spec.k < 1 || spec.deg < 1 || spec.noise < 0.0 || spec.noise >= 1.0)
        throw ConfigError("synthetic spec needs k >= 1, deg >= 1, 0 <= noise < 1");
    const int m = task.num_actions();
    Rng rng(substream_seed(spec.seed, "data"));

    std::vector<std::vector<int>> B(m, std::vector<int>(spec.k));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < spec.k; ++j)
            B[i][j] = rng.uniform() < 0.5 ? 1 : 0;

    Dataset dataset;
    dataset.k = spec.k;
    dataset.deg = spec.deg;
    dataset.noise = spec.noise;
    dataset.seed = spec.seed;

    const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(spec.k));
    auto gen_instance = [&](Split split) {
        DataInstance inst;
        inst.split = split;
        // Even deg cannot produce a non-positive cost; odd deg redraws the
        // rare offending instance.
        while (true) {
            inst.x.resize(spec.k);
            for (int j = 0; j < spec.k; ++j)
                inst.x[j] = rng.normal();
            inst.c.resize(m);
            bool positive = true;
            for (int i = 0; i < m; ++i) {
                double bx = 0.0;
                for (int j = 0; j < spec.k; ++j)
                    bx += B[i][j] * inst.x[j];
                double xi = rng.uniform(1.0 - spec.noise, 1.0 + spec.noise);
                inst.c[i] = (std::pow(bx * inv_sqrt_k + 3.0, spec.deg) + 1.0) * xi;
                if (inst.c[i] <= 0.0)
                    positive = false;
            }
            if (positive)
                break;
        }
        dataset.instances.push_back(std::move(inst));
    };
    for (int i = 0; i < spec.n_train; ++i)
        gen_instance(Split::Train);
    for (int i = 0; i < spec.n_valid; ++i)
        gen_instance(Split::Valid);
    for (int i = 0; i < spec.n_test; ++i)
        gen_instance(Split::Test);
    return dataset;
}

namespace {

const char* split_name(Split s) {
    switch (s) {
    case Split::Train:
        return "train";
    case Split::Valid:
        return "valid";
    case Split::Test:
        return "test";
    }
    return "train";
}

Split parse_split(const std::string& s, const std::string& where) {
    if (s == "train")
        return Split::Train;
    if (s == "valid")
        return Split::Valid;
    if (s == "test")
        return Split::Test;
    throw TaskFormatError(where + ": unknown split \"" + s + "\"");
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::string& path) {
    json doc;
    doc["task"] = dataset.task_ref;
    doc["k"] = dataset.k;
    doc["deg"] = dataset.deg;
    doc["noise"] = dataset.noise;
    doc["seed"] = dataset.seed;
    doc["instances"] = json::array();
    for (const DataInstance& inst : dataset.instances) {
        json obj;
        obj["x"] = inst.x;
        obj["c"] = inst.c;
        obj["split"] = split_name(inst.split);
        doc["instances"].push_back(std::move(obj));
    }
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot open dataset file for writing: " + path);
    out << doc.dump() << "\n";
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw TaskFormatError("cannot open dataset file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw TaskFormatError("dataset file is not a JSON object: " + path);
    for (const char* key : {"task", "k", "deg", "noise", "seed", "instances"})
        if (!doc.contains(key))
            throw TaskFormatError(std::string("dataset file: missing field \"") + key +
                                  "\"");
    Dataset dataset;
    dataset.task_ref = doc["task"].get<std::string>();
    dataset.k = doc["k"].get<int>();
    dataset.deg = doc["deg"].get<int>();
    dataset.noise = doc["noise"].get<double>();
    dataset.seed = doc["seed"].get<uint64_t>();
    if (!doc["instances"].is_array())
        throw TaskFormatError("dataset file: instances: expected an array");
    for (size_t i = 0; i < doc["instances"].size(); ++i) {
        const std::string where = "instances[" + std::to_string(i) + "]";
        const json& obj = doc["instances"][i];
        if (!obj.is_object() || !obj.contains("x") || !obj.contains("c") ||
            !obj.contains("split"))
            throw TaskFormatError(where + ": expected {x, c, split}");
        DataInstance inst;
        inst.x = obj["x"].get<FeatureVector>();
        inst.c = obj["c"].get<CostVector>();
        inst.split = parse_split(obj["split"].get<std::string>(), where + ".split");
        if (static_cast<int>(inst.x.size()) != dataset.k)
            throw TaskFormatError(where + ".x: expected length " +
                                  std::to_string(dataset.k));
        dataset.instances.push_back(std::move(inst));
    }
    return dataset;
}

}  // namespace dflplan
