#ifndef DFLPLAN_RNG_H
#define DFLPLAN_RNG_H

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace dflplan {

// Deterministic random source. The standard distributions are
// implementation-defined, so the transforms below are hand-rolled on top of
// mt19937_64: the same seed produces the same stream on every platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine(seed) {}

    uint64_t next_u64() { return engine(); }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi);

    // Standard normal via Box-Muller; the spare value is cached.
    double normal();

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            int j = uniform_int(0, i);
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 engine;
    bool has_spare = false;
    double spare = 0.0;
};

// Seed for a named substream of a base seed (FNV-1a over the name, mixed
// with the base). Distinct names give unrelated streams.
uint64_t substream_seed(uint64_t base_seed, std::string_view name);

}  // namespace dflplan

#endif
