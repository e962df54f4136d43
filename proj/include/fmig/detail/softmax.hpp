#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fmig/distributions.hpp"

namespace fmig::detail {

/// Maps unconstrained scores onto the interior of the simplex.
inline Simplex softmax(const std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    std::vector<double> e(z.size());
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        e[i] = std::exp(z[i] - m);
        total += e[i];
    }
    for (double& v : e) v /= total;
    return Simplex(std::move(e));
}

/// Scores whose softmax is `s`; zero entries are floored.
inline std::vector<double> logits_of(const Simplex& s) {
    std::vector<double> z(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) z[i] = std::log(std::max(s[i], 1e-300));
    return z;
}

/// Pulls a gradient with respect to probabilities back to the scores:
/// dz_i = s_i (g_i - <s, g>).
inline std::vector<double> softmax_pullback(const Simplex& s, const std::vector<double>& g) {
    double inner = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) inner += s[i] * g[i];
    std::vector<double> dz(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) dz[i] = s[i] * (g[i] - inner);
    return dz;
}

/// Pullback divided entrywise by s: g_i - <s, g>. An ascent direction in
/// score space that keeps its size as s approaches a vertex.
inline std::vector<double> mirror_direction(const Simplex& s, const std::vector<double>& g) {
    double inner = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) inner += s[i] * g[i];
    std::vector<double> d(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) d[i] = g[i] - inner;
    return d;
}

}  // namespace fmig::detail
