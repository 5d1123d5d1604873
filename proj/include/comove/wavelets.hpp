#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "comove/errors.hpp"

// Non-decimated (a trous) Haar decomposition. Each level halves the band:
// detail j carries fluctuations with periods of roughly 2^j to 2^(j+1)
// samples, and the transform is additive, so smooth + sum(details) gives
// back the input exactly.

namespace comove {

enum class BoundaryRule { reflection, periodic };

inline std::string boundary_to_string(BoundaryRule b) {
    return b == BoundaryRule::reflection ? "reflection" : "periodic";
}

inline BoundaryRule boundary_from_string(const std::string& s) {
    if (s == "reflection") return BoundaryRule::reflection;
    if (s == "periodic") return BoundaryRule::periodic;
    throw argument_error("unknown boundary rule '" + s +
                         "' (expected reflection or periodic)");
}

struct ScaleDecomposition {
    std::vector<std::vector<double>> details;   // d1..dJ, each full length
    std::vector<double> smooth;                 // c_J
    int levels = 0;                             // J
    BoundaryRule boundary = BoundaryRule::reflection;

    std::size_t size() const { return smooth.size(); }
};

namespace detail {

/// Map an out-of-range index into [0, n) by half-sample reflection
/// (x[-1] -> x[0], x[-2] -> x[1], ...).
inline std::size_t reflect_index(long i, long n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return std::size_t(i);
}

inline std::size_t wrap_index(long i, long n) {
    long m = i % n;
    if (m < 0) m += n;
    return std::size_t(m);
}

} // namespace detail

/// Decompose x into J detail series plus a smooth remainder.
///
/// Level recursion: c_j(t) = (c_{j-1}(t) + c_{j-1}(t - 2^{j-1})) / 2 with
/// c_0 = x; detail d_j = c_{j-1} - c_j. Indices that run off the start are
/// reflected by default, or wrapped when `boundary` is periodic.
inline ScaleDecomposition haar_atrous_decompose(const std::vector<double>& x, int levels = 7,
                                                BoundaryRule boundary = BoundaryRule::reflection) {
    const long n = long(x.size());
    if (levels < 1)
        throw argument_error("haar_atrous_decompose: need at least 1 level");
    if (n < (1L << levels)) {
        int feasible = 0;
        while ((2L << feasible) <= n) ++feasible;
        throw argument_error("haar_atrous_decompose: " + std::to_string(n) +
                             " observations support at most J=" + std::to_string(feasible) +
                             " levels, requested " + std::to_string(levels));
    }

    ScaleDecomposition out;
    out.levels = levels;
    out.boundary = boundary;
    out.details.reserve(std::size_t(levels));

    std::vector<double> prev = x;
    std::vector<double> next(x.size());
    for (int j = 1; j <= levels; ++j) {
        const long hole = 1L << (j - 1);
        for (long t = 0; t < n; ++t) {
            const std::size_t back = boundary == BoundaryRule::reflection
                                         ? detail::reflect_index(t - hole, n)
                                         : detail::wrap_index(t - hole, n);
            next[std::size_t(t)] = 0.5 * (prev[std::size_t(t)] + prev[back]);
        }
        std::vector<double> d(x.size());
        for (std::size_t t = 0; t < x.size(); ++t) d[t] = prev[t] - next[t];
        out.details.push_back(std::move(d));
        prev.swap(next);
    }
    out.smooth = std::move(prev);
    return out;
}

/// Additive inverse of the decomposition.
inline std::vector<double> reconstruct(const ScaleDecomposition& d) {
    std::vector<double> out = d.smooth;
    for (const auto& level : d.details) {
        if (level.size() != out.size())
            throw argument_error("reconstruct: level lengths differ");
        for (std::size_t t = 0; t < out.size(); ++t) out[t] += level[t];
    }
    return out;
}

/// Inclusive period band, in sample units, covered by detail scale j.
inline std::pair<double, double> scale_period_band(int j) {
    if (j < 1) throw argument_error("scale_period_band: scale must be >= 1");
    return {double(1L << j), double(2L << j)};
}

} // namespace comove
