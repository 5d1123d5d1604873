#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "comove/errors.hpp"

namespace comove {

/// Nyquist frequency for unit-spaced observations, in cycles per observation.
inline constexpr double kNyquistFrequency = 0.5;

/// Discrete frequency scan of a single series.
///
/// `aliased[i]` marks grid frequencies above Nyquist; their power folds back
/// onto the band below 0.5 but the values are still reported.
struct Periodogram {
    std::vector<double> frequencies;
    std::vector<double> power;
    std::vector<bool> aliased;

    std::size_t size() const { return frequencies.size(); }
};

/// The canonical Fourier grid k/N for k = 0..N-1.
inline std::vector<double> canonical_frequency_grid(std::size_t n) {
    std::vector<double> grid(n);
    for (std::size_t k = 0; k < n; ++k) grid[k] = static_cast<double>(k) / static_cast<double>(n);
    return grid;
}

namespace detail {

inline bool is_canonical_grid(const std::vector<double>& grid, std::size_t n) {
    if (grid.size() != n) return false;
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(grid[k] * static_cast<double>(n) - static_cast<double>(k)) > 1e-9) return false;
    }
    return true;
}

}  // namespace detail

/// Evaluates power(f) = |sum_t x_t exp(i 2 pi f t)|^2 / N on `freq_grid`.
///
/// Arbitrary grids are evaluated directly in O(N*G); the canonical grid k/N
/// goes through an FFT. With `demean` the mean is subtracted before scanning,
/// which moves low-frequency mass out of the f=0 bin; the default leaves the
/// series as given.
inline Periodogram frequency_scan(const std::vector<double>& x,
                                  const std::vector<double>& freq_grid,
                                  bool demean = false) {
    const std::size_t n = x.size();
    if (n < 4) {
        throw validation_error("frequency scan needs at least 4 observations, got " +
                               std::to_string(n));
    }
    if (freq_grid.empty()) throw argument_error("frequency grid is empty");
    for (std::size_t i = 0; i < freq_grid.size(); ++i) {
        if (!(freq_grid[i] >= 0.0)) {
            throw argument_error("frequency grid entries must be nonnegative, entry " +
                                 std::to_string(i) + " is not");
        }
        if (i > 0 && !(freq_grid[i] > freq_grid[i - 1])) {
            throw argument_error("frequency grid must be strictly increasing at entry " +
                                 std::to_string(i));
        }
    }

    std::vector<double> data(x);
    if (demean) {
        const double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(n);
        for (double& v : data) v -= mean;
    }

    Periodogram out;
    out.frequencies = freq_grid;
    out.power.resize(freq_grid.size());
    out.aliased.resize(freq_grid.size());
    for (std::size_t i = 0; i < freq_grid.size(); ++i) {
        out.aliased[i] = freq_grid[i] > kNyquistFrequency;
    }

    if (detail::is_canonical_grid(freq_grid, n)) {
        Eigen::FFT<double> fft;
        std::vector<std::complex<double>> spectrum;
        fft.fwd(spectrum, data);
        for (std::size_t k = 0; k < n; ++k) {
            out.power[k] = std::norm(spectrum[k]) / static_cast<double>(n);
        }
        return out;
    }

    constexpr double two_pi = 6.283185307179586476925286766559;
    for (std::size_t i = 0; i < freq_grid.size(); ++i) {
        const double f = freq_grid[i];
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double phase = two_pi * f * static_cast<double>(t);
            acc += data[t] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        out.power[i] = std::norm(acc) / static_cast<double>(n);
    }
    return out;
}

}  // namespace comove
