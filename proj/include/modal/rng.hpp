#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "modal/common.hpp"

namespace modal {

// Deterministic random source. mt19937_64 output is mapped to doubles with
// fixed arithmetic only, so streams reproduce bit-for-bit for a given seed
// regardless of the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; values come in pairs, the second is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    Vec normal_vec(std::size_t n) {
        Vec v(n);
        for (double& x : v) x = normal();
        return v;
    }

    // Uniform index in [0, n). Bias is O(n / 2^64).
    std::size_t index(std::size_t n) {
        require(n > 0, "Rng::index: n must be positive");
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    // Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        require(lo <= hi, "Rng::uniform_int: empty range");
        return lo + static_cast<int>(index(static_cast<std::size_t>(hi - lo) + 1));
    }

    // Index drawn proportionally to the given weights (assumed to sum to 1).
    std::size_t categorical(std::span<const double> weights) {
        require(!weights.empty(), "Rng::categorical: empty weights");
        const double u = uniform01();
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            cum += weights[i];
            if (u < cum) return i;
        }
        return weights.size() - 1;
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace modal
