#pragma once

#include <cfloat>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comove/errors.hpp"
#include "comove/numeric.hpp"
#include "comove/ols.hpp"
#include "comove/wavelets.hpp"

// Vector autoregression and pairwise Granger-causality F-tests, including
// the scale-by-scale grid run on wavelet detail coefficients.

namespace comove {

/// Significance legend used by every emitted causality table.
inline constexpr const char* kSignificanceLegend =
    "0 '***' 0.001 '**' 0.01 '*' 0.05 '.' 0.1";

/// Significance code for a p-value under the table legend.
inline std::string significance_code(double p) {
    if (p < 0.001) return "***";
    if (p < 0.01) return "**";
    if (p < 0.05) return "*";
    if (p < 0.1) return ".";
    return "";
}

struct VarFit {
    int lag_order = 0;
    std::vector<std::string> names;
    // coef[eq] holds the equation's coefficients: intercept, then for each
    // lag l=1..p the K variables in panel order.
    std::vector<Eigen::VectorXd> coef;
    std::vector<Eigen::VectorXd> residuals;
    Eigen::MatrixXd residual_cov;               // K x K, dof-corrected
    std::size_t nobs = 0;

    double coefficient(std::size_t eq, int lag, std::size_t var) const {
        return coef[eq][1 + Eigen::Index(lag - 1) * Eigen::Index(residual_cov.rows()) +
                        Eigen::Index(var)];
    }
};

struct GrangerReport {
    std::string dependent;
    std::string independent;
    int lag_order = 0;
    double f_statistic = 0.0;
    double p_value = 1.0;
    std::size_t nobs = 0;                       // usable rows after lag trimming
};

namespace detail {

inline Eigen::MatrixXd lag_design(const std::vector<const std::vector<double>*>& series,
                                  int p, std::size_t n) {
    // Rows t = p..n-1; columns: intercept, then series-major lag blocks.
    const Eigen::Index rows = Eigen::Index(n) - p;
    const Eigen::Index k = Eigen::Index(series.size());
    Eigen::MatrixXd X(rows, 1 + k * p);
    X.col(0).setOnes();
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = std::size_t(r) + std::size_t(p);
        for (int l = 1; l <= p; ++l)
            for (Eigen::Index j = 0; j < k; ++j)
                X(r, 1 + Eigen::Index(l - 1) * k + j) = (*series[std::size_t(j)])[t - std::size_t(l)];
    }
    return X;
}

} // namespace detail

/// Fit a VAR(p) across the given equally long series by per-equation OLS.
inline VarFit var_fit(const std::vector<std::vector<double>>& series,
                      const std::vector<std::string>& names, int lag_order) {
    if (series.size() < 2)
        throw argument_error("var_fit: need at least 2 series");
    if (names.size() != series.size())
        throw argument_error("var_fit: name count does not match series count");
    if (lag_order < 1)
        throw argument_error("var_fit: lag order must be at least 1");
    const std::size_t n = series.front().size();
    for (const auto& s : series)
        if (s.size() != n) throw argument_error("var_fit: series lengths differ");
    if (n <= std::size_t(2 * lag_order + 5))
        throw validation_error("var_fit: need more than " +
                               std::to_string(2 * lag_order + 5) + " rows, got " +
                               std::to_string(n));

    std::vector<const std::vector<double>*> ptrs;
    for (const auto& s : series) ptrs.push_back(&s);
    const Eigen::MatrixXd X = detail::lag_design(ptrs, lag_order, n);

    VarFit fit;
    fit.lag_order = lag_order;
    fit.names = names;
    fit.nobs = std::size_t(X.rows());
    const Eigen::Index K = Eigen::Index(series.size());
    Eigen::MatrixXd E(X.rows(), K);
    for (Eigen::Index eq = 0; eq < K; ++eq) {
        Eigen::VectorXd y(X.rows());
        for (Eigen::Index r = 0; r < X.rows(); ++r)
            y[r] = series[std::size_t(eq)][std::size_t(r) + std::size_t(lag_order)];
        const auto ols = ols_fit(X, y);
        fit.coef.push_back(ols.coef);
        fit.residuals.push_back(ols.residuals);
        E.col(eq) = ols.residuals;
    }
    const double dof = double(X.rows() - X.cols());
    fit.residual_cov = E.transpose() * E / dof;
    return fit;
}

/// F-test of "x Granger-causes y" at the given lag order.
///
/// Compares y regressed on its own lags against y regressed on its own lags
/// plus x's lags; under the null the statistic is F(p, n - 2p - 1) with n
/// the usable rows after lag trimming.
inline GrangerReport granger_test(const std::vector<double>& y, const std::vector<double>& x,
                                  int lag_order, const std::string& y_name = "y",
                                  const std::string& x_name = "x") {
    if (lag_order < 1)
        throw argument_error("granger_test: lag order must be at least 1");
    if (y.size() != x.size())
        throw argument_error("granger_test: series lengths differ");
    const std::size_t n = y.size();
    if (n <= std::size_t(2 * lag_order + 5))
        throw validation_error("granger_test: need more than " +
                               std::to_string(2 * lag_order + 5) + " rows, got " +
                               std::to_string(n));

    const int p = lag_order;
    const std::size_t usable = n - std::size_t(p);
    const Eigen::Index rows = Eigen::Index(usable);
    Eigen::VectorXd yv(rows);
    for (Eigen::Index r = 0; r < rows; ++r) yv[r] = y[std::size_t(r) + std::size_t(p)];

    const Eigen::MatrixXd Xu = detail::lag_design({&y, &x}, p, n);
    // Restricted design: intercept plus y's own lags (the leading column of
    // each lag block).
    Eigen::MatrixXd Xr(Xu.rows(), 1 + p);
    Xr.col(0) = Xu.col(0);
    for (int l = 1; l <= p; ++l) Xr.col(l) = Xu.col(1 + (l - 1) * 2);

    const auto restricted = ols_fit(Xr, yv);
    // The unrestricted design can be exactly collinear (shifted copies,
    // identical series); project tolerantly instead of failing, since only
    // its residual sum enters the statistic.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Xu);
    cod.setThreshold(1e-10);
    const double ssr_u = (yv - Xu * cod.solve(yv)).squaredNorm();

    GrangerReport rep;
    rep.dependent = y_name;
    rep.independent = x_name;
    rep.lag_order = p;
    rep.nobs = usable;

    const double dof = double(usable) - double(2 * p) - 1.0;
    if (dof <= 0.0)
        throw validation_error("granger_test: no residual degrees of freedom");
    const double scale = restricted.ssr > 1.0 ? restricted.ssr : 1.0;
    if (ssr_u <= scale * 1e-14) {
        // Perfect fit: report the largest representable F rather than 0/0.
        rep.f_statistic = DBL_MAX;
        rep.p_value = 0.0;
        return rep;
    }
    rep.f_statistic = ((restricted.ssr - ssr_u) / double(p)) / (ssr_u / dof);
    if (rep.f_statistic < 0.0) rep.f_statistic = 0.0;   // QR round-off guard
    rep.p_value = f_survival(rep.f_statistic, double(p), dof);
    return rep;
}

/// One Granger report per (scale, ordered pair) cell.
struct ScaleGrangerTable {
    int levels = 0;
    int lag_order = 0;
    // rows[j-1] holds the reports for scale j in the order the pairs were given.
    std::vector<std::vector<GrangerReport>> rows;
};

/// Run the Granger grid over wavelet detail coefficients.
///
/// `pairs` lists ordered (dependent, independent) label pairs; every label
/// must exist in `decompositions` and all decompositions must share the
/// level count and length.
inline ScaleGrangerTable scale_granger_matrix(
    const std::map<std::string, ScaleDecomposition>& decompositions,
    const std::vector<std::pair<std::string, std::string>>& pairs, int lag_order = 3) {
    if (decompositions.empty() || pairs.empty())
        throw argument_error("scale_granger_matrix: nothing to test");

    const auto& first = decompositions.begin()->second;
    for (const auto& [label, dec] : decompositions) {
        if (dec.levels != first.levels)
            throw argument_error("scale_granger_matrix: decomposition '" + label +
                                 "' has " + std::to_string(dec.levels) + " levels, expected " +
                                 std::to_string(first.levels));
        if (dec.size() != first.size())
            throw argument_error("scale_granger_matrix: decomposition '" + label +
                                 "' length differs");
    }
    for (const auto& [dep, indep] : pairs) {
        if (!decompositions.count(dep))
            throw argument_error("scale_granger_matrix: unknown label '" + dep + "'");
        if (!decompositions.count(indep))
            throw argument_error("scale_granger_matrix: unknown label '" + indep + "'");
    }

    ScaleGrangerTable table;
    table.levels = first.levels;
    table.lag_order = lag_order;
    table.rows.resize(std::size_t(first.levels));
    for (int j = 1; j <= first.levels; ++j) {
        auto& row = table.rows[std::size_t(j - 1)];
        for (const auto& [dep, indep] : pairs) {
            const auto& dy = decompositions.at(dep).details[std::size_t(j - 1)];
            const auto& dx = decompositions.at(indep).details[std::size_t(j - 1)];
            row.push_back(granger_test(dy, dx, lag_order, dep, indep));
        }
    }
    return table;
}

} // namespace comove
