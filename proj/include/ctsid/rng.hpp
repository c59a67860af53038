#pragma once

#include <cstdint>
#include <random>

namespace ctsid {

// SplitMix64 mixing step; used to decorrelate seeds for sub-streams.
std::uint64_t splitmix64(std::uint64_t& state);

// Seed for one signal's stream within one trial. The derivation is part of the
// reproducibility contract: s = base_seed XOR trial, mixed twice with the
// signal index folded in between.
std::uint64_t stream_seed(std::uint64_t base_seed, std::uint64_t trial, std::uint64_t signal);

// mt19937_64 wrapped with explicit uniform/normal constructions so draws do not
// depend on the standard library's distribution implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform01();
    // Uniform on [lo, hi).
    double uniform(double lo, double hi);
    // Standard normal via Box-Muller (pairs cached).
    double normal();

  private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ctsid
