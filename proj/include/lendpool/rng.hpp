#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lendpool {

// Bijective 64-bit mixer. Distinct inputs give distinct outputs, which is how
// per-simulation seeds are kept disjoint across a whole sweep.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Simulation index i of grid cell c under base seed b maps to a unique seed:
// cells are spaced 2^20 apart, far above any admissible simulation count.
inline uint64_t derive_seed(uint64_t base, uint64_t cell_index, uint64_t sim_index) {
    return splitmix64(base + (cell_index << 20) + sim_index);
}

// Seedable normal sampler pinned for reproducibility: mt19937_64 with the
// (x >> 11) * 2^-53 uniform mapping and the trigonometric Box-Muller
// transform. std::normal_distribution is implementation-defined, so it is
// deliberately not used; this generator produces identical streams on every
// platform.
class NormalRng {
public:
    explicit NormalRng(uint64_t seed) : engine_(seed) {}

    double uniform01() { // in [0, 1)
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform01(); // (0, 1], keeps the log finite
        double u2 = uniform01();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace lendpool
