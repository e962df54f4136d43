#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace fmig {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw from a probability vector.
inline std::size_t draw_index(std::mt19937_64& rng, std::span<const double> probs) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        acc += probs[i];
        last_positive = i;
        if (u < acc) return i;
    }
    return last_positive;
}

/// Symmetric Dirichlet draw with the given concentration.
inline std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t n, double concentration) {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    std::vector<double> v(n);
    double total = 0.0;
    for (;;) {
        total = 0.0;
        for (double& x : v) {
            x = gamma(rng);
            total += x;
        }
        if (total > 0.0) break;
    }
    for (double& x : v) x /= total;
    return v;
}

}  // namespace fmig
