#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "comove/errors.hpp"
#include "comove/numeric.hpp"
#include "comove/ols.hpp"
#include "comove/series.hpp"

// Sample moments, global and windowed correlation, OLS with an ANOVA
// summary, and the Durbin-Watson statistic.

namespace comove {

inline double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / double(x.size());
}

/// Sample covariance with the n-1 divisor.
inline double covariance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw argument_error("covariance: length mismatch");
    if (x.size() < 2)
        throw argument_error("covariance: need at least 2 observations");
    const double mx = mean(x), my = mean(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += (x[i] - mx) * (y[i] - my);
    return s / double(x.size() - 1);
}

/// Pearson correlation coefficient, clamped to [-1, 1] against rounding.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw argument_error("pearson: length mismatch");
    if (x.size() < 2)
        throw argument_error("pearson: need at least 2 observations");
    const double mx = mean(x), my = mean(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw numerical_error("pearson: correlation undefined for a constant input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Pairwise correlations over row windows of a panel.
///
/// Windows are half-open [start, end) row ranges; an end beyond the panel is
/// capped at N. One result row per window, one column per unordered column
/// pair in panel order.
struct CorrelationTable {
    std::vector<std::pair<std::size_t, std::size_t>> windows;   // after capping
    std::vector<std::pair<std::size_t, std::size_t>> pairs;     // column index pairs
    std::vector<std::string> pair_labels;                       // "A~B"
    std::vector<std::vector<double>> r;                         // [window][pair]
};

inline CorrelationTable windowed_correlations(
    const AlignedPanel& panel,
    const std::vector<std::pair<std::size_t, std::size_t>>& windows) {
    const std::size_t n = panel.rows();
    CorrelationTable table;
    for (std::size_t a = 0; a < panel.cols(); ++a) {
        for (std::size_t b = a + 1; b < panel.cols(); ++b) {
            table.pairs.emplace_back(a, b);
            table.pair_labels.push_back(panel.names[a] + "~" + panel.names[b]);
        }
    }
    for (auto [start, end] : windows) {
        if (start >= n || start >= end)
            throw argument_error("window [" + std::to_string(start) + ", " +
                                 std::to_string(end) + ") is out of range for " +
                                 std::to_string(n) + " rows");
        end = std::min(end, n);
        table.windows.emplace_back(start, end);
        std::vector<double> row;
        row.reserve(table.pairs.size());
        for (auto [a, b] : table.pairs) {
            const std::span<const double> xa(panel.columns[a].data() + start, end - start);
            const std::span<const double> xb(panel.columns[b].data() + start, end - start);
            try {
                row.push_back(pearson(xa, xb));
            } catch (const numerical_error&) {
                throw numerical_error("correlation undefined in window [" +
                                      std::to_string(start) + ", " + std::to_string(end) +
                                      ") for pair " + table.pair_labels[row.size()]);
            }
        }
        table.r.push_back(std::move(row));
    }
    return table;
}

/// Durbin-Watson statistic of a residual vector.
inline double durbin_watson(std::span<const double> e) {
    if (e.size() < 2)
        throw argument_error("durbin_watson: need at least 2 residuals");
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < e.size(); ++t) {
        den += e[t] * e[t];
        if (t > 0) {
            const double d = e[t] - e[t - 1];
            num += d * d;
        }
    }
    if (den == 0.0)
        throw numerical_error("durbin_watson: undefined for all-zero residuals");
    return num / den;
}

/// OLS fit with intercept plus the ANOVA-style summary quantities.
struct RegressionReport {
    double intercept = 0.0;
    std::vector<double> slopes;
    std::vector<double> residuals;
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    double f_statistic = 0.0;
    double f_p_value = 1.0;
    std::optional<double> durbin_watson;    // absent for an exact fit
    std::size_t n = 0;
    std::size_t n_regressors = 0;

    double slope() const { return slopes.at(0); }
};

/// Regress y on one or more x columns (intercept always included).
/// The F statistic tests all slopes jointly zero.
inline RegressionReport ols_anova(std::span<const double> y,
                                  const std::vector<std::vector<double>>& x_columns) {
    if (x_columns.empty())
        throw argument_error("ols_anova: need at least one regressor");
    const std::size_t n = y.size();
    const std::size_t k = x_columns.size();
    for (const auto& c : x_columns)
        if (c.size() != n)
            throw argument_error("ols_anova: regressor length mismatch");
    if (n <= k + 1)
        throw argument_error("ols_anova: need N > number of regressors + 1");

    Eigen::MatrixXd X(n, k + 1);
    Eigen::VectorXd yv(n);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        for (std::size_t j = 0; j < k; ++j) X(i, j + 1) = x_columns[j][i];
        yv(i) = y[i];
    }
    const OlsFit fit = ols_fit(X, yv);

    RegressionReport report;
    report.n = n;
    report.n_regressors = k;
    report.intercept = fit.coef(0);
    report.slopes.assign(fit.coef.data() + 1, fit.coef.data() + 1 + k);
    report.residuals.assign(fit.residuals.data(), fit.residuals.data() + n);

    const double ybar = yv.mean();
    const double tss = (yv.array() - ybar).square().sum();
    if (tss == 0.0)
        throw numerical_error("ols_anova: dependent variable is constant");
    const double ssr = fit.ssr;
    report.r_squared = std::clamp(1.0 - ssr / tss, 0.0, 1.0);
    const double dof = double(n - k - 1);
    report.adj_r_squared = 1.0 - (1.0 - report.r_squared) * double(n - 1) / dof;

    if (ssr > 0.0 && ssr > tss * 1e-15) {
        report.f_statistic = ((tss - ssr) / double(k)) / (ssr / dof);
        report.f_p_value = f_survival(report.f_statistic, double(k), dof);
        report.durbin_watson = durbin_watson(report.residuals);
    } else {
        // Exact fit: the F ratio diverges; report a maximal statistic and
        // p ~ 0 instead of overflowing.
        report.f_statistic = std::numeric_limits<double>::max();
        report.f_p_value = 0.0;
        report.durbin_watson = std::nullopt;
    }
    return report;
}

inline RegressionReport ols_anova(std::span<const double> y, std::span<const double> x) {
    return ols_anova(y, std::vector<std::vector<double>>{{x.begin(), x.end()}});
}

} // namespace comove
