#pragma once

#include <cmath>
#include <cstdint>

namespace vortexgas::rng {

/// SplitMix64 output function: a strong 64-bit avalanche mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Combine two 64-bit values into a stream key.
inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ 0x517cc1b727220a95ULL) ^ mix64(mix64(b) + 0x2545f4914f6cdd1dULL);
}

/// Counter-based generator: output i of stream (seed, id) is mix64(key + i).
/// Streams derived from distinct ids are independent for any consumption
/// pattern, so work can be split across threads (or reordered) without
/// changing any drawn value -- the backbone of reproducible parallel runs.
class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t id) : key_(mix_key(seed, id)) {}

    std::uint64_t next_u64() { return mix64(key_ + counter_++); }

    /// Uniform on the open interval (0,1); never returns 0 or 1.
    double next_unit() {
        return (double(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    /// Exponential with unit mean.
    double next_exp() { return -std::log(next_unit()); }

    /// Standard normal pair (Box-Muller).
    void next_normal_pair(double& a, double& b) {
        double u1 = next_unit();
        double u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 6.283185307179586476925286766559 * u2;
        a = r * std::cos(t);
        b = r * std::sin(t);
    }

    double next_normal() {
        double a, b;
        next_normal_pair(a, b);
        return a;  // discard b: keeps the draw count per call fixed
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Derive the stream for a given (seed, task index). Task indices are chosen
/// by the caller: one per Monte Carlo sample, per mode, per chain, ...
inline Stream derive(std::uint64_t seed, std::uint64_t id) { return Stream(seed, id); }

}  // namespace vortexgas::rng
