#ifndef DFLPLAN_DATAGEN_H
#define DFLPLAN_DATAGEN_H

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dflplan/model.h"
#include "dflplan/strips.h"

namespace dflplan {

// Contextual cost generator parameters. Costs follow
//   c_i = (((B x)_i / sqrt(k) + 3)^deg + 1) * xi_i
// with x ~ N(0, I_k), B an m-by-k 0/1 Bernoulli(0.5) matrix fixed per seed,
// and xi ~ U[1-noise, 1+noise]. Even deg makes every cost positive by
// construction; odd deg is accepted and kept positive by redrawing the rare
// instance whose cost vector is not strictly positive.
struct SyntheticSpec {
    int n_train = 400;
    int n_valid = 100;
    int n_test = 400;
    int k = 5;
    int deg = 4;
    double noise = 0.25;
    uint64_t seed = 0;

    static SyntheticSpec small() { return SyntheticSpec{}; }
    static SyntheticSpec large() {
        SyntheticSpec s;
        s.n_train = 200;
        s.n_valid = 25;
        s.n_test = 25;
        return s;
    }
};

struct GridCell {
    int x = 1;  // 1-indexed column
    int y = 1;  // 1-indexed row
};

// n-by-n grid, move right or up, from the bottom-left cell to the top-right
// cell. 2n(n-1) actions; the induced graph is a DAG.
GroundedTask gen_shortest_path(int n);

// n-by-n grid, trucks of capacity one, drive along the 4-neighborhood,
// pick-up and drop; goals are per-package delivered facts added by dropping
// at the package's destination. Coordinates are 1-indexed.
GroundedTask gen_transport(int n,
                           const std::vector<std::pair<GridCell, GridCell>>& packages,
                           const std::vector<GridCell>& trucks);

// Simplified rovers: navigate a seeded connected waypoint graph, sample rock
// or soil, calibrate a camera and take images, and communicate each datum
// from a lander-visible waypoint. Goals are communicated-data facts.
GroundedTask gen_rovers(int n_rovers, int n_waypoints, int n_cameras, int n_goals,
                        uint64_t seed);

// The benchmark instances by name: "5-1-1a", "5-1-1b", "5-2-1a", "5-2-1b",
// "5-3-1", "5-2-2", "10-1-1".
GroundedTask transport_named_instance(const std::string& name);

// "rovers1" .. "rovers5" (or just the digit).
GroundedTask rovers_named_instance(const std::string& name);

Dataset gen_costs(const GroundedTask& task, const SyntheticSpec& spec);

void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace dflplan

#endif
