// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "core.hpp"

namespace starnoma {

using Rng = std::mt19937_64;

/// Independent streams derived from one master seed.
enum class Stream : std::uint64_t {
    channel = 1,
    pairing = 2,
    init = 3,
    scheme = 4,
    instance = 5,
};

/// Child generator for (seed, trial, stream); distinct tuples give unrelated streams.
inline Rng make_rng(std::uint64_t seed, std::uint64_t trial, Stream stream) {
    const auto s = static_cast<std::uint64_t>(stream);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline double gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Circularly symmetric complex Gaussian with the given total variance.
inline cd complex_gaussian(Rng& rng, double variance) {
    const double s = std::sqrt(0.5 * variance);
    const double re = gaussian(rng);
    const double im = gaussian(rng);
    return {s * re, s * im};
}

/// Uniform point on the unit sphere of C^n.
inline Cvec random_unit_vector(Rng& rng, Eigen::Index n) {
    Cvec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_gaussian(rng, 1.0);
    const double nrm = v.norm();
    if (nrm == 0.0) {
        v.setZero();
        v(0) = 1.0;
        return v;
    }
    return v / nrm;
}

/// Uniform point on the probability simplex of dimension n.
inline std::vector<double> random_simplex(Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    double total = 0.0;
    for (auto& x : out) {
        x = -std::log(1.0 - uniform01(rng));
        total += x;
    }
    for (auto& x : out) x /= total;
    return out;
}

} // namespace starnoma
