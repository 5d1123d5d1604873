#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comove/errors.hpp"
#include "comove/numeric.hpp"
#include "comove/ols.hpp"

// Unit-root and stationarity tests: augmented Dickey-Fuller with AIC lag
// selection, Phillips-Perron with the Newey-West corrected t-statistic, and
// KPSS. All three share the deterministic-trend vocabulary below and report
// against embedded critical-value tables.

namespace comove {

enum class TrendSpec { none, constant, constant_and_linear };

inline std::string trend_to_string(TrendSpec t) {
    switch (t) {
        case TrendSpec::none: return "none";
        case TrendSpec::constant: return "constant";
        case TrendSpec::constant_and_linear: return "constant_and_linear";
    }
    return "?";
}

inline TrendSpec trend_from_string(const std::string& s) {
    if (s == "none" || s == "n" || s == "nc") return TrendSpec::none;
    if (s == "constant" || s == "c") return TrendSpec::constant;
    if (s == "constant_and_linear" || s == "ct" || s == "trend")
        return TrendSpec::constant_and_linear;
    throw argument_error("unknown trend specification '" + s +
                         "' (expected none, constant or constant_and_linear)");
}

enum class UnitRootTest { adf, pp, kpss };

inline std::string test_to_string(UnitRootTest t) {
    switch (t) {
        case UnitRootTest::adf: return "ADF";
        case UnitRootTest::pp: return "PP";
        case UnitRootTest::kpss: return "KPSS";
    }
    return "?";
}

/// How to read UnitRootReport::p_value when the underlying table ran out.
enum class PValueBound {
    exact,       // interpolated or surface value
    upper,       // true p-value <= reported value ("p < 0.01")
    lower        // true p-value >= reported value ("p > 0.10")
};

struct UnitRootReport {
    UnitRootTest test = UnitRootTest::adf;
    double statistic = 0.0;
    double p_value = 1.0;
    PValueBound p_bound = PValueBound::exact;
    int lags = 0;                        // ADF: lag order; PP/KPSS: bandwidth
    TrendSpec trend = TrendSpec::constant;
    std::map<int, double> critical_values;   // percent level (10, 5, 1) -> value
    std::set<int> reject_at;                 // subset of {10, 5, 1}
    std::size_t nobs = 0;                    // effective regression sample
};

namespace detail {

// Critical values for the t-ratio tests (left tail) by trend specification.
inline std::map<int, double> adf_critical_values(TrendSpec trend) {
    switch (trend) {
        case TrendSpec::none: return {{10, -1.62}, {5, -1.94}, {1, -2.57}};
        case TrendSpec::constant: return {{10, -2.57}, {5, -2.86}, {1, -3.44}};
        case TrendSpec::constant_and_linear: return {{10, -3.13}, {5, -3.41}, {1, -3.97}};
    }
    return {};
}

inline void mark_rejections(UnitRootReport& r, bool right_tail) {
    for (const auto& [level, cv] : r.critical_values) {
        const bool reject = right_tail ? (r.statistic > cv) : (r.statistic < cv);
        if (reject) r.reject_at.insert(level);
    }
}

// Response-surface approximation of the asymptotic tau distribution for a
// single series: p = Phi(poly(tau)), a quadratic polynomial below tau_star
// and a cubic above it, pinned to 0/1 outside [tau_min, tau_max].
struct TauSurface {
    double tau_star, tau_min, tau_max;
    double smallp[3];
    double largep[4];
};

inline const TauSurface& tau_surface(TrendSpec trend) {
    static const TauSurface none{
        -1.04, -19.04, std::numeric_limits<double>::infinity(),
        {0.6344, 1.2378, 0.032496},
        {0.4797, 0.93557, -0.06999, 0.033066}};
    static const TauSurface constant{
        -1.61, -18.83, 2.74,
        {2.1659, 1.4412, 0.038269},
        {1.7339, 0.93202, -0.12745, -0.010368}};
    static const TauSurface ct{
        -2.89, -16.18, 0.7,
        {3.2512, 1.6047, 0.049588},
        {2.5261, 0.61654, -0.37956, -0.060285}};
    switch (trend) {
        case TrendSpec::none: return none;
        case TrendSpec::constant: return constant;
        case TrendSpec::constant_and_linear: return ct;
    }
    return constant;
}

inline double tau_p_value(double tau, TrendSpec trend) {
    const TauSurface& s = tau_surface(trend);
    if (tau <= s.tau_min) return 0.0;
    if (tau >= s.tau_max) return 1.0;
    double z;
    if (tau <= s.tau_star) {
        z = s.smallp[0] + tau * (s.smallp[1] + tau * s.smallp[2]);
    } else {
        z = s.largep[0] + tau * (s.largep[1] + tau * (s.largep[2] + tau * s.largep[3]));
    }
    return normal_cdf(z);
}

/// Number of deterministic regressors implied by the trend specification.
inline int trend_terms(TrendSpec trend) {
    switch (trend) {
        case TrendSpec::none: return 0;
        case TrendSpec::constant: return 1;
        case TrendSpec::constant_and_linear: return 2;
    }
    return 1;
}

/// Gaussian OLS log-likelihood at the MLE variance.
inline double ols_loglike(double ssr, double n) {
    return -0.5 * n * (1.0 + std::log(2.0 * M_PI) + std::log(ssr / n));
}

/// Bartlett-weighted long-run variance of e with the given truncation lag;
/// autocovariances are normalised by the full sample size.
inline double newey_west_lrv(const Eigen::VectorXd& e, int bandwidth) {
    const auto n = e.size();
    double lrv = e.squaredNorm() / double(n);
    for (int j = 1; j <= bandwidth; ++j) {
        if (j >= n) break;
        double gamma = 0.0;
        for (Eigen::Index t = j; t < n; ++t) gamma += e[t] * e[t - j];
        gamma /= double(n);
        lrv += 2.0 * (1.0 - double(j) / double(bandwidth + 1)) * gamma;
    }
    return lrv;
}

/// Dickey-Fuller design for the sample Delta-y[start..], with `lags` lagged
/// differences. Returns the t-ratio on the level term and the fit.
struct DfFit {
    OlsFit fit;
    double tau = 0.0;
    Eigen::Index k = 0;
};

inline DfFit df_regression(const std::vector<double>& x, int lags, int start, TrendSpec trend) {
    // Delta y_t for t = start+1 .. N-1 regressed on y_{t-1}, the lagged
    // differences, and the deterministic terms.
    const auto N = x.size();
    const Eigen::Index rows = Eigen::Index(N) - 1 - start;
    const Eigen::Index k = 1 + lags + trend_terms(trend);
    Eigen::MatrixXd X(rows, k);
    Eigen::VectorXd y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = std::size_t(start) + 1 + std::size_t(r);   // index into x
        y[r] = x[t] - x[t - 1];
        X(r, 0) = x[t - 1];
        for (int i = 1; i <= lags; ++i) X(r, i) = x[t - i] - x[t - i - 1];
        Eigen::Index c = 1 + lags;
        if (trend != TrendSpec::none) X(r, c++) = 1.0;
        if (trend == TrendSpec::constant_and_linear) X(r, c) = double(r + 1);
    }
    DfFit out;
    out.fit = ols_fit(X, y);
    out.tau = out.fit.coef[0] / out.fit.std_error(0);
    out.k = k;
    return out;
}

} // namespace detail

/// Default maximum ADF lag order, a standard sample-size rule.
inline int adf_default_max_lags(std::size_t n) {
    return int(12.0 * std::pow(double(n) / 100.0, 0.25));
}

/// Default Newey-West bandwidth for the PP and KPSS corrections.
inline int newey_west_default_bandwidth(std::size_t n) {
    return int(4.0 * std::pow(double(n) / 100.0, 2.0 / 9.0));
}

/// Augmented Dickey-Fuller test.
///
/// The lag order is chosen by AIC over 0..max_lags on a common sample (every
/// candidate drops the first max_lags differences), then the reported
/// regression is re-fit on all rows the winning lag allows. Pass `lag_order`
/// to skip selection and pin the lag count.
inline UnitRootReport adf_test(const std::vector<double>& x, TrendSpec trend,
                               std::optional<int> max_lags = std::nullopt,
                               std::optional<int> lag_order = std::nullopt) {
    const std::size_t N = x.size();
    const int maxlag = lag_order ? *lag_order : max_lags.value_or(adf_default_max_lags(N));
    if (maxlag < 0)
        throw argument_error("adf_test: negative lag order");
    if (N < std::size_t(20 + maxlag))
        throw validation_error("adf_test: need at least " + std::to_string(20 + maxlag) +
                               " observations, got " + std::to_string(N));

    int chosen = maxlag;
    if (!lag_order) {
        double best_aic = std::numeric_limits<double>::infinity();
        for (int p = 0; p <= maxlag; ++p) {
            const auto cand = detail::df_regression(x, p, maxlag, trend);
            const double n = double(cand.fit.n);
            const double aic = -2.0 * detail::ols_loglike(cand.fit.ssr, n) + 2.0 * double(cand.k);
            if (aic < best_aic) {
                best_aic = aic;
                chosen = p;
            }
        }
    }

    const auto final_fit = detail::df_regression(x, chosen, chosen, trend);
    UnitRootReport r;
    r.test = UnitRootTest::adf;
    r.trend = trend;
    r.lags = chosen;
    r.nobs = std::size_t(final_fit.fit.n);
    r.statistic = final_fit.tau;
    r.p_value = detail::tau_p_value(r.statistic, trend);
    r.critical_values = detail::adf_critical_values(trend);
    detail::mark_rejections(r, /*right_tail=*/false);
    return r;
}

/// Phillips-Perron test (Z-tau variant).
///
/// Runs the plain AR(1) test regression and corrects the t-ratio with a
/// Bartlett-kernel long-run variance of its residuals.
inline UnitRootReport pp_test(const std::vector<double>& x, TrendSpec trend,
                              std::optional<int> bandwidth = std::nullopt) {
    const std::size_t N = x.size();
    if (N < 25)
        throw validation_error("pp_test: need at least 25 observations, got " +
                               std::to_string(N));
    const int bw = bandwidth.value_or(newey_west_default_bandwidth(N));
    if (bw < 0) throw argument_error("pp_test: negative bandwidth");
    if (std::size_t(bw) >= N)
        throw argument_error("pp_test: bandwidth " + std::to_string(bw) +
                             " must be below the sample size " + std::to_string(N));

    const auto df = detail::df_regression(x, 0, 0, trend);
    const double n = double(df.fit.n);
    const double gamma0 = df.fit.ssr / n;
    const double lambda2 = detail::newey_west_lrv(df.fit.residuals, bw);
    const double s = std::sqrt(df.fit.sigma2(df.fit.k));
    const double se_rho = df.fit.std_error(0);

    UnitRootReport r;
    r.test = UnitRootTest::pp;
    r.trend = trend;
    r.lags = bw;
    r.nobs = std::size_t(df.fit.n);
    r.statistic = std::sqrt(gamma0 / lambda2) * df.tau -
                  (lambda2 - gamma0) / (2.0 * std::sqrt(lambda2) * s) * n * se_rho;
    r.p_value = detail::tau_p_value(r.statistic, trend);
    r.critical_values = detail::adf_critical_values(trend);
    detail::mark_rejections(r, /*right_tail=*/false);
    return r;
}

/// KPSS stationarity test (null: stationary around the chosen trend).
inline UnitRootReport kpss_test(const std::vector<double>& x, TrendSpec trend,
                                std::optional<int> bandwidth = std::nullopt) {
    const std::size_t N = x.size();
    if (trend == TrendSpec::none)
        throw argument_error("kpss_test: trend specification 'none' is not supported "
                             "(use constant or constant_and_linear)");
    if (N < 25)
        throw validation_error("kpss_test: need at least 25 observations, got " +
                               std::to_string(N));
    const int bw = bandwidth.value_or(newey_west_default_bandwidth(N));
    if (bw < 0) throw argument_error("kpss_test: negative bandwidth");
    if (std::size_t(bw) >= N)
        throw argument_error("kpss_test: bandwidth " + std::to_string(bw) +
                             " must be below the sample size " + std::to_string(N));

    const Eigen::Index n = Eigen::Index(N);
    Eigen::VectorXd e(n);
    if (trend == TrendSpec::constant) {
        double m = 0.0;
        for (double v : x) m += v;
        m /= double(N);
        for (Eigen::Index t = 0; t < n; ++t) e[t] = x[std::size_t(t)] - m;
    } else {
        Eigen::MatrixXd X(n, 2);
        Eigen::VectorXd y(n);
        for (Eigen::Index t = 0; t < n; ++t) {
            X(t, 0) = 1.0;
            X(t, 1) = double(t + 1);
            y[t] = x[std::size_t(t)];
        }
        e = ols_fit(X, y).residuals;
    }

    double sum_s2 = 0.0, run = 0.0;
    for (Eigen::Index t = 0; t < e.size(); ++t) {
        run += e[t];
        sum_s2 += run * run;
    }
    const double lrv = detail::newey_west_lrv(e, bw);
    if (!(lrv > 0.0))
        throw numerical_error("kpss_test: zero long-run variance (constant input?)");

    UnitRootReport r;
    r.test = UnitRootTest::kpss;
    r.trend = trend;
    r.lags = bw;
    r.nobs = N;
    r.statistic = sum_s2 / (double(N) * double(N)) / lrv;

    const bool level = trend == TrendSpec::constant;
    // Upper-tail quantiles of the KPSS null at p = 10, 5, 2.5 and 1 percent.
    static const double kq_level[4] = {0.347, 0.463, 0.574, 0.739};
    static const double kq_trend[4] = {0.119, 0.146, 0.176, 0.216};
    static const double kp[4] = {0.10, 0.05, 0.025, 0.01};
    const double* q = level ? kq_level : kq_trend;
    if (r.statistic <= q[0]) {
        r.p_value = 0.10;
        r.p_bound = PValueBound::lower;
    } else if (r.statistic >= q[3]) {
        r.p_value = 0.01;
        r.p_bound = PValueBound::upper;
    } else {
        int i = 0;
        while (r.statistic > q[i + 1]) ++i;
        const double w = (r.statistic - q[i]) / (q[i + 1] - q[i]);
        r.p_value = kp[i] + w * (kp[i + 1] - kp[i]);
        r.p_bound = PValueBound::exact;
    }

    r.critical_values = level ? std::map<int, double>{{10, 0.35}, {5, 0.46}, {1, 0.74}}
                              : std::map<int, double>{{10, 0.12}, {5, 0.15}, {1, 0.22}};
    detail::mark_rejections(r, /*right_tail=*/true);
    return r;
}

} // namespace comove
