#include "dflplan/rng.h"

#include <cmath>

namespace dflplan {

int Rng::uniform_int(int lo, int hi) {
    uint64_t range = static_cast<uint64_t>(hi) - static_cast<uint64_t>(lo) + 1;
    // Rejection sampling to avoid modulo bias.
    uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    uint64_t x;
    do {
        x = engine();
    } while (x >= limit);
    return lo + static_cast<int>(x % range);
}

double Rng::normal() {
    if (has_spare) {
        has_spare = false;
        return spare;
    }
    double u1;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare = r * std::sin(theta);
    has_spare = true;
    return r * std::cos(theta);
}

uint64_t substream_seed(uint64_t base_seed, std::string_view name) {
    uint64_t h = 14695981039346656037ull;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    for (int i = 0; i < 8; ++i) {
        h ^= (base_seed >> (8 * i)) & 0xff;
        h *= 1099511628211ull;
    }
    // splitmix64 finalizer so nearby seeds diverge
    h += 0x9e3779b97f4a7c15ull;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
    h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
    return h ^ (h >> 31);
}

}  // namespace dflplan
