#pragma once

#include <cstdint>
#include <random>

namespace cavtraj {

/// splitmix64 finaliser; used to spread nearby seeds over the engine state.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Gaussian source for one trajectory. Copyable, so a state can be replayed.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }
    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Generator for trajectory `index` of an ensemble.
inline Rng trajectory_rng(std::uint64_t base_seed, std::uint64_t index) {
    return Rng(base_seed + index);
}

}  // namespace cavtraj
