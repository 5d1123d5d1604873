#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "comove/errors.hpp"
#include "comove/rng.hpp"

namespace comove {

inline constexpr double kMorletOmega0 = 6.0;

/// Conversion from Morlet scale to Fourier period, about 1.0330 for omega0=6.
inline double morlet_fourier_factor() {
    return 4.0 * M_PI / (kMorletOmega0 + std::sqrt(2.0 + kMorletOmega0 * kMorletOmega0));
}

/// Continuous wavelet transform of one series.
///
/// `coefficients` is times x scales. `coi[t]` is the longest period free of
/// edge effects at time t (e-folding criterion), capped at the longest period
/// in the grid.
struct CwtField {
    Eigen::MatrixXcd coefficients;
    std::vector<double> scales;
    std::vector<double> periods;
    std::vector<double> coi;
    double dt = 1.0;

    std::size_t n_times() const { return std::size_t(coefficients.rows()); }
    std::size_t n_scales() const { return scales.size(); }
};

/// Widths of the coherence smoothing operator. Both affect coherence values,
/// so they are knobs rather than constants.
struct SmoothingOptions {
    double time_sigma_multiplier = 1.0;
    double scale_width_decades = 0.6;
};

/// Squared coherence (or multiple coherence) on the time x scale grid.
///
/// `phase` is filled for the bivariate case only. Cells where the statistic
/// is undefined hold NaN and are counted in `undefined_count`; values nudged
/// back into [0,1] are counted in `clamp_count`.
struct CoherenceField {
    Eigen::MatrixXd values;
    Eigen::MatrixXd phase;
    std::vector<double> scales;
    std::vector<double> periods;
    std::vector<double> coi;
    double dt = 1.0;
    std::size_t clamp_count = 0;
    std::size_t undefined_count = 0;

    std::size_t n_times() const { return std::size_t(values.rows()); }
    std::size_t n_scales() const { return scales.size(); }
};

/// Monte-Carlo p-values against AR(1) surrogates.
struct SignificanceGrid {
    Eigen::MatrixXd p_values;
    std::vector<std::string> warnings;
    std::size_t n_surrogates = 0;
};

/// Dyadic scale grid, 8 voices per octave, periods from 2dt up to
/// min(512dt, n*dt/2).
inline std::vector<double> default_scale_grid(std::size_t n, double dt = 1.0) {
    const double ff = morlet_fourier_factor();
    const double cap = std::min(512.0 * dt, double(n) * dt / 2.0);
    std::vector<double> scales;
    for (int k = 0;; ++k) {
        const double period = 2.0 * dt * std::pow(2.0, double(k) / 8.0);
        if (period > cap * (1.0 + 1e-12)) break;
        scales.push_back(period / ff);
    }
    return scales;
}

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p *= 2;
    return p;
}

inline void validate_scales(const std::vector<double>& scales, std::size_t n, double dt) {
    if (scales.empty()) throw argument_error("scale grid is empty");
    const double ff = morlet_fourier_factor();
    const double lo = 2.0 * dt;
    const double hi = double(n) * dt / 2.0;
    for (std::size_t j = 0; j < scales.size(); ++j) {
        if (j > 0 && !(scales[j] > scales[j - 1])) {
            throw argument_error("scale grid must be strictly increasing at index " +
                                 std::to_string(j));
        }
        const double period = scales[j] * ff;
        if (period < lo * (1.0 - 1e-12) || period > hi * (1.0 + 1e-12)) {
            throw argument_error("scale index " + std::to_string(j) + " maps to period " +
                                 std::to_string(period) + ", outside [" + std::to_string(lo) +
                                 ", " + std::to_string(hi) + "]");
        }
    }
}

} // namespace detail

/// Analytic Morlet (omega0 = 6) transform, evaluated in the Fourier domain
/// with zero padding to the next power of two past 2N. The series is demeaned
/// first. Each daughter wavelet is unit-energy normalized, so expected power
/// under white noise is flat across scales.
inline CwtField morlet_cwt(const std::vector<double>& x, const std::vector<double>& scales,
                           double dt = 1.0) {
    const std::size_t n = x.size();
    if (n < 16) {
        throw validation_error("wavelet transform needs at least 16 observations, got " +
                               std::to_string(n));
    }
    if (!(dt > 0.0)) throw argument_error("sampling interval must be positive");
    detail::validate_scales(scales, n, dt);

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(n);

    const std::size_t len = detail::next_pow2(2 * n);
    std::vector<double> padded(len, 0.0);
    for (std::size_t t = 0; t < n; ++t) padded[t] = x[t] - mean;

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, padded);

    std::vector<double> omega(len);
    const double dw = 2.0 * M_PI / (double(len) * dt);
    for (std::size_t k = 0; k < len; ++k) {
        const double idx = k <= len / 2 ? double(k) : double(k) - double(len);
        omega[k] = idx * dw;
    }

    CwtField field;
    field.scales = scales;
    field.dt = dt;
    field.coefficients.resize(Eigen::Index(n), Eigen::Index(scales.size()));

    const double quarter_root_pi = std::pow(M_PI, -0.25);
    std::vector<std::complex<double>> prod(len), row;
    for (std::size_t j = 0; j < scales.size(); ++j) {
        const double s = scales[j];
        const double norm = quarter_root_pi * std::sqrt(2.0 * M_PI * s / dt);
        for (std::size_t k = 0; k < len; ++k) {
            if (omega[k] > 0.0) {
                const double arg = s * omega[k] - kMorletOmega0;
                prod[k] = spectrum[k] * (norm * std::exp(-0.5 * arg * arg));
            } else {
                prod[k] = 0.0;
            }
        }
        fft.inv(row, prod);
        for (std::size_t t = 0; t < n; ++t) field.coefficients(Eigen::Index(t), Eigen::Index(j)) = row[t];
    }

    const double ff = morlet_fourier_factor();
    field.periods.resize(scales.size());
    for (std::size_t j = 0; j < scales.size(); ++j) field.periods[j] = scales[j] * ff;

    field.coi.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double edge = double(std::min(t, n - 1 - t)) * dt;
        field.coi[t] = std::min(ff * edge / std::sqrt(2.0), field.periods.back());
    }
    return field;
}

/// |W|^2 elementwise.
inline Eigen::MatrixXd wavelet_power(const CwtField& field) {
    return field.coefficients.cwiseAbs2();
}

namespace detail {

inline void require_same_grid(const CwtField& a, const CwtField& b) {
    if (a.coefficients.rows() != b.coefficients.rows() ||
        a.coefficients.cols() != b.coefficients.cols() || a.dt != b.dt) {
        throw argument_error("wavelet fields are on different grids");
    }
    for (std::size_t j = 0; j < a.scales.size(); ++j) {
        if (std::abs(a.scales[j] - b.scales[j]) > 1e-12 * a.scales[j]) {
            throw argument_error("wavelet fields are on different scale grids");
        }
    }
}

} // namespace detail

/// W_a . conj(W_b) elementwise; fields must share one grid.
inline Eigen::MatrixXcd cross_wavelet(const CwtField& a, const CwtField& b) {
    detail::require_same_grid(a, b);
    return a.coefficients.cwiseProduct(b.coefficients.conjugate());
}

namespace detail {

// Gaussian along time with sigma proportional to the column's scale, then a
// boxcar across scales of fixed width in log10(scale). Kernels renormalize
// over the in-range part at each position, so a constant grid is a fixed
// point and interior mass is preserved.
template <typename Matrix>
Matrix smooth_impl(const Matrix& grid, const std::vector<double>& scales, double dt,
                   const SmoothingOptions& opts) {
    const Eigen::Index n = grid.rows();
    const Eigen::Index S = grid.cols();
    if (std::size_t(S) != scales.size()) {
        throw argument_error("grid column count does not match the scale grid");
    }

    Matrix timewise(n, S);
    for (Eigen::Index j = 0; j < S; ++j) {
        const double sigma = opts.time_sigma_multiplier * scales[std::size_t(j)] / dt;
        if (!(sigma > 0.0)) {
            timewise.col(j) = grid.col(j);
            continue;
        }
        const Eigen::Index radius = Eigen::Index(std::ceil(4.0 * sigma));
        std::vector<double> weight(std::size_t(2 * radius + 1));
        for (Eigen::Index u = -radius; u <= radius; ++u) {
            weight[std::size_t(u + radius)] = std::exp(-0.5 * double(u) * double(u) / (sigma * sigma));
        }
        for (Eigen::Index t = 0; t < n; ++t) {
            const Eigen::Index lo = std::max(Eigen::Index(0), t - radius);
            const Eigen::Index hi = std::min(n - 1, t + radius);
            typename Matrix::Scalar acc{};
            double wsum = 0.0;
            for (Eigen::Index u = lo; u <= hi; ++u) {
                const double w = weight[std::size_t(u - t + radius)];
                acc += w * grid(u, j);
                wsum += w;
            }
            timewise(t, j) = acc / wsum;
        }
    }

    if (!(opts.scale_width_decades > 0.0) || S == 1) return timewise;

    const std::size_t n_cols = std::size_t(S);
    std::vector<double> logs(n_cols);
    for (Eigen::Index j = 0; j < S; ++j) logs[std::size_t(j)] = std::log10(scales[std::size_t(j)]);
    const double half = opts.scale_width_decades / 2.0 + 1e-12;

    Matrix out(n, S);
    for (Eigen::Index j = 0; j < S; ++j) {
        Eigen::Index lo = j, hi = j;
        while (lo > 0 && logs[std::size_t(lo - 1)] >= logs[std::size_t(j)] - half) --lo;
        while (hi + 1 < S && logs[std::size_t(hi + 1)] <= logs[std::size_t(j)] + half) ++hi;
        out.col(j) = timewise.middleCols(lo, hi - lo + 1).rowwise().sum() / double(hi - lo + 1);
    }
    return out;
}

} // namespace detail

inline Eigen::MatrixXcd smooth_field(const Eigen::MatrixXcd& grid,
                                     const std::vector<double>& scales, double dt,
                                     const SmoothingOptions& opts = {}) {
    return detail::smooth_impl(grid, scales, dt, opts);
}

inline Eigen::MatrixXd smooth_field(const Eigen::MatrixXd& grid,
                                    const std::vector<double>& scales, double dt,
                                    const SmoothingOptions& opts = {}) {
    return detail::smooth_impl(grid, scales, dt, opts);
}

namespace detail {

struct CoherenceParts {
    CwtField wx, wy;
    Eigen::MatrixXcd num;
    Eigen::MatrixXd dx, dy;
};

inline CoherenceParts coherence_parts(const std::vector<double>& x, const std::vector<double>& y,
                                      const std::vector<double>& scales, double dt,
                                      const SmoothingOptions& opts) {
    if (x.size() != y.size()) {
        throw argument_error("coherence inputs differ in length: " + std::to_string(x.size()) +
                             " vs " + std::to_string(y.size()));
    }
    CoherenceParts parts;
    parts.wx = morlet_cwt(x, scales, dt);
    parts.wy = morlet_cwt(y, scales, dt);

    const Eigen::Index n = parts.wx.coefficients.rows();
    const Eigen::Index S = parts.wx.coefficients.cols();
    Eigen::MatrixXcd cross(n, S);
    Eigen::MatrixXd px(n, S), py(n, S);
    for (Eigen::Index j = 0; j < S; ++j) {
        const double inv = 1.0 / scales[std::size_t(j)];
        cross.col(j) = parts.wx.coefficients.col(j).cwiseProduct(
                           parts.wy.coefficients.col(j).conjugate()) * inv;
        px.col(j) = parts.wx.coefficients.col(j).cwiseAbs2() * inv;
        py.col(j) = parts.wy.coefficients.col(j).cwiseAbs2() * inv;
    }
    parts.num = smooth_field(cross, scales, dt, opts);
    parts.dx = smooth_field(px, scales, dt, opts);
    parts.dy = smooth_field(py, scales, dt, opts);
    return parts;
}

} // namespace detail

/// Smoothed squared coherence R^2 with phase from the smoothed cross
/// spectrum. Cells whose denominator vanishes (identically zero input) come
/// back NaN.
inline CoherenceField wavelet_coherence(const std::vector<double>& x,
                                        const std::vector<double>& y,
                                        const std::vector<double>& scales, double dt = 1.0,
                                        const SmoothingOptions& opts = {}) {
    auto parts = detail::coherence_parts(x, y, scales, dt, opts);
    const Eigen::Index n = parts.num.rows();
    const Eigen::Index S = parts.num.cols();

    CoherenceField field;
    field.scales = parts.wx.scales;
    field.periods = parts.wx.periods;
    field.coi = parts.wx.coi;
    field.dt = dt;
    field.values.resize(n, S);
    field.phase.resize(n, S);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index j = 0; j < S; ++j) {
            const double den = parts.dx(t, j) * parts.dy(t, j);
            const std::complex<double> c = parts.num(t, j);
            field.phase(t, j) = std::atan2(c.imag(), c.real());
            if (!(den > 1e-300)) {
                field.values(t, j) = std::numeric_limits<double>::quiet_NaN();
                ++field.undefined_count;
                continue;
            }
            double r2 = std::norm(c) / den;
            if (r2 > 1.0) {
                r2 = 1.0;
                ++field.clamp_count;
            }
            field.values(t, j) = r2;
        }
    }
    return field;
}

/// Multiple coherence of z on the pair (x, y), from complex smoothed
/// cross-spectrum ratios:
///   RM^2 = [|Rzy|^2 + |Rzx|^2 - 2 Re(Rzy conj(Rzx) conj(Rxy))] / (1 - |Rxy|^2)
/// Cells with collinear predictors (1 - |Rxy|^2 below 1e-10) are NaN.
inline CoherenceField multiple_wavelet_coherence(const std::vector<double>& z,
                                                 const std::vector<double>& x,
                                                 const std::vector<double>& y,
                                                 const std::vector<double>& scales,
                                                 double dt = 1.0,
                                                 const SmoothingOptions& opts = {}) {
    if (z.size() != x.size() || z.size() != y.size()) {
        throw argument_error("multiple coherence inputs differ in length");
    }
    const CwtField wz = morlet_cwt(z, scales, dt);
    const CwtField wx = morlet_cwt(x, scales, dt);
    const CwtField wy = morlet_cwt(y, scales, dt);

    const Eigen::Index n = wz.coefficients.rows();
    const Eigen::Index S = wz.coefficients.cols();

    auto smooth_cross = [&](const CwtField& a, const CwtField& b) {
        Eigen::MatrixXcd g = a.coefficients.cwiseProduct(b.coefficients.conjugate());
        for (Eigen::Index j = 0; j < S; ++j) g.col(j) /= scales[std::size_t(j)];
        return smooth_field(g, scales, dt, opts);
    };
    auto smooth_power = [&](const CwtField& a) {
        Eigen::MatrixXd g = a.coefficients.cwiseAbs2();
        for (Eigen::Index j = 0; j < S; ++j) g.col(j) /= scales[std::size_t(j)];
        return smooth_field(g, scales, dt, opts);
    };
    const Eigen::MatrixXcd num_zy = smooth_cross(wz, wy);
    const Eigen::MatrixXcd num_zx = smooth_cross(wz, wx);
    const Eigen::MatrixXcd num_xy = smooth_cross(wx, wy);
    const Eigen::MatrixXd dz = smooth_power(wz);
    const Eigen::MatrixXd dx = smooth_power(wx);
    const Eigen::MatrixXd dy = smooth_power(wy);

    CoherenceField field;
    field.scales = wz.scales;
    field.periods = wz.periods;
    field.coi = wz.coi;
    field.dt = dt;
    field.values.resize(n, S);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index j = 0; j < S; ++j) {
            const std::complex<double> rzy = num_zy(t, j) / std::sqrt(dz(t, j) * dy(t, j));
            const std::complex<double> rzx = num_zx(t, j) / std::sqrt(dz(t, j) * dx(t, j));
            const std::complex<double> rxy = num_xy(t, j) / std::sqrt(dx(t, j) * dy(t, j));
            const double den = 1.0 - std::norm(rxy);
            if (!(den >= 1e-10)) {
                field.values(t, j) = std::numeric_limits<double>::quiet_NaN();
                ++field.undefined_count;
                continue;
            }
            double rm2 = (std::norm(rzy) + std::norm(rzx) -
                          2.0 * std::real(rzy * std::conj(rzx) * std::conj(rxy))) /
                         den;
            if (rm2 > 1.0) {
                rm2 = 1.0;
                ++field.clamp_count;
            } else if (rm2 < 0.0) {
                rm2 = 0.0;
                ++field.clamp_count;
            }
            field.values(t, j) = rm2;
        }
    }
    return field;
}

namespace detail {

struct Ar1Fit {
    double phi = 0.0;
    double variance = 0.0;
    bool clamped = false;
};

inline Ar1Fit fit_ar1(const std::vector<double>& x) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(n);
    double num = 0.0, den = 0.0, var = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double c = x[t] - mean;
        var += c * c;
        if (t + 1 < n) {
            num += c * (x[t + 1] - mean);
            den += c * c;
        }
    }
    Ar1Fit fit;
    fit.variance = var / double(n);
    fit.phi = den > 0.0 ? num / den : 0.0;
    if (std::abs(fit.phi) >= 1.0) {
        fit.phi = 0.99;
        fit.clamped = true;
    }
    return fit;
}

inline std::vector<double> ar1_surrogate(const Ar1Fit& fit, std::size_t n, Rng& rng) {
    std::vector<double> out(n);
    const double sd = std::sqrt(std::max(fit.variance, 1e-300));
    const double se = sd * std::sqrt(std::max(1.0 - fit.phi * fit.phi, 1e-12));
    out[0] = sd * rng.normal();
    for (std::size_t t = 1; t < n; ++t) out[t] = fit.phi * out[t - 1] + se * rng.normal();
    return out;
}

// Pools statistic values from the cells inside the cone of influence, one
// pool per scale row.
inline void pool_inside_coi(const CoherenceField& field, std::vector<std::vector<double>>& pools) {
    for (Eigen::Index j = 0; j < Eigen::Index(field.n_scales()); ++j) {
        auto& pool = pools[std::size_t(j)];
        for (Eigen::Index t = 0; t < Eigen::Index(field.n_times()); ++t) {
            if (field.periods[std::size_t(j)] <= field.coi[std::size_t(t)]) {
                const double v = field.values(t, j);
                if (std::isfinite(v)) pool.push_back(v);
            }
        }
    }
}

inline SignificanceGrid p_values_against_pools(const CoherenceField& observed,
                                               std::vector<std::vector<double>>& pools,
                                               std::size_t n_surrogates) {
    SignificanceGrid grid;
    grid.n_surrogates = n_surrogates;
    const Eigen::Index n = Eigen::Index(observed.n_times());
    const Eigen::Index S = Eigen::Index(observed.n_scales());
    grid.p_values.resize(n, S);
    for (Eigen::Index j = 0; j < S; ++j) {
        auto& pool = pools[std::size_t(j)];
        std::sort(pool.begin(), pool.end());
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = observed.values(t, j);
            if (!std::isfinite(v)) {
                grid.p_values(t, j) = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            if (pool.empty()) {
                grid.p_values(t, j) = 1.0;
                continue;
            }
            const auto it = std::lower_bound(pool.begin(), pool.end(), v);
            const std::size_t greater_equal = std::size_t(pool.end() - it);
            grid.p_values(t, j) = double(1 + greater_equal) / double(1 + pool.size());
        }
    }
    return grid;
}

} // namespace detail

/// Monte-Carlo significance of bivariate coherence against independent AR(1)
/// surrogates matched to each input's lag-1 autocorrelation and variance.
/// Null values pool per scale row over the surrogate cells inside the cone of
/// influence. Deterministic for a fixed seed.
inline SignificanceGrid coherence_significance(const std::vector<double>& x,
                                               const std::vector<double>& y,
                                               const std::vector<double>& scales,
                                               std::size_t n_surrogates, std::uint64_t seed,
                                               double dt = 1.0,
                                               const SmoothingOptions& opts = {}) {
    if (n_surrogates < 100) {
        throw argument_error("significance needs at least 100 surrogates, got " +
                             std::to_string(n_surrogates));
    }
    const CoherenceField observed = wavelet_coherence(x, y, scales, dt, opts);

    const auto fit_x = detail::fit_ar1(x);
    const auto fit_y = detail::fit_ar1(y);
    std::vector<std::string> warnings;
    if (fit_x.clamped) warnings.push_back("AR(1) coefficient of the first series clamped to 0.99");
    if (fit_y.clamped) warnings.push_back("AR(1) coefficient of the second series clamped to 0.99");

    std::vector<std::vector<double>> pools(observed.n_scales());
    for (std::size_t i = 0; i < n_surrogates; ++i) {
        Rng rng = substream(seed, "coherence-surrogate", i);
        const auto sx = detail::ar1_surrogate(fit_x, x.size(), rng);
        const auto sy = detail::ar1_surrogate(fit_y, y.size(), rng);
        const CoherenceField null_field = wavelet_coherence(sx, sy, scales, dt, opts);
        detail::pool_inside_coi(null_field, pools);
    }

    SignificanceGrid grid = detail::p_values_against_pools(observed, pools, n_surrogates);
    grid.warnings = std::move(warnings);
    return grid;
}

/// Monte-Carlo significance of multiple coherence; surrogate triples drawn
/// the same way as the bivariate case.
inline SignificanceGrid mwc_significance(const std::vector<double>& z,
                                         const std::vector<double>& x,
                                         const std::vector<double>& y,
                                         const std::vector<double>& scales,
                                         std::size_t n_surrogates, std::uint64_t seed,
                                         double dt = 1.0, const SmoothingOptions& opts = {}) {
    if (n_surrogates < 100) {
        throw argument_error("significance needs at least 100 surrogates, got " +
                             std::to_string(n_surrogates));
    }
    const CoherenceField observed = multiple_wavelet_coherence(z, x, y, scales, dt, opts);

    const auto fit_z = detail::fit_ar1(z);
    const auto fit_x = detail::fit_ar1(x);
    const auto fit_y = detail::fit_ar1(y);
    std::vector<std::string> warnings;
    if (fit_z.clamped) warnings.push_back("AR(1) coefficient of the response series clamped to 0.99");
    if (fit_x.clamped) warnings.push_back("AR(1) coefficient of the first predictor clamped to 0.99");
    if (fit_y.clamped) warnings.push_back("AR(1) coefficient of the second predictor clamped to 0.99");

    std::vector<std::vector<double>> pools(observed.n_scales());
    for (std::size_t i = 0; i < n_surrogates; ++i) {
        Rng rng = substream(seed, "mwc-surrogate", i);
        const auto sz = detail::ar1_surrogate(fit_z, z.size(), rng);
        const auto sx = detail::ar1_surrogate(fit_x, x.size(), rng);
        const auto sy = detail::ar1_surrogate(fit_y, y.size(), rng);
        const CoherenceField null_field = multiple_wavelet_coherence(sz, sx, sy, scales, dt, opts);
        detail::pool_inside_coi(null_field, pools);
    }

    SignificanceGrid grid = detail::p_values_against_pools(observed, pools, n_surrogates);
    grid.warnings = std::move(warnings);
    return grid;
}

} // namespace comove
