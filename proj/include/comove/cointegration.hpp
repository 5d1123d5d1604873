#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "comove/errors.hpp"
#include "comove/series.hpp"

// Johansen trace test for cointegration, in the specification with an
// unrestricted constant (trending levels). The generalized eigenproblem is
// solved by Cholesky whitening of the lagged-level moment matrix followed by
// a symmetric eigensolve.

namespace comove {

struct JohansenReport {
    std::vector<double> eigenvalues;            // descending, in [0,1)
    std::vector<double> trace_stats;            // index r: statistic for H(rank <= r)
    std::vector<std::map<int, double>> critical_values;  // index r -> {level% -> value}
    Eigen::MatrixXd eigenvectors;               // K x K, each column scaled to row0 = 1
    int lag_order = 0;
    std::size_t nobs = 0;                       // effective sample T

    /// Smallest hypothesized rank not rejected at the given level (10, 5, 1);
    /// K if every hypothesis is rejected.
    int selected_rank(int level) const {
        for (std::size_t r = 0; r < trace_stats.size(); ++r)
            if (trace_stats[r] < critical_values[r].at(level)) return int(r);
        return int(trace_stats.size());
    }
};

namespace detail {

// Trace-statistic critical values, read off the number of remaining common
// trends K - r. Systems wider than 3 columns are not covered.
inline std::map<int, double> johansen_critical_values(int k_minus_r) {
    switch (k_minus_r) {
        case 1: return {{10, 6.50}, {5, 8.18}, {1, 11.65}};
        case 2: return {{10, 15.66}, {5, 17.95}, {1, 23.52}};
        case 3: return {{10, 28.71}, {5, 31.52}, {1, 37.22}};
    }
    throw argument_error("no trace critical values for " + std::to_string(k_minus_r) +
                         " remaining trends (panels of up to 3 columns are supported)");
}

} // namespace detail

/// Johansen trace test on a panel of I(1) levels.
///
/// `lag_order` is the VAR order in levels; the error-correction regression
/// uses lag_order - 1 lagged differences plus an unrestricted constant.
inline JohansenReport johansen_trace(const AlignedPanel& panel, int lag_order = 2) {
    const std::size_t K = panel.cols();
    const std::size_t N = panel.rows();
    if (K < 2)
        throw argument_error("johansen_trace: need at least 2 columns");
    if (K > 3)
        throw argument_error("johansen_trace: panels of up to 3 columns are supported, got " +
                             std::to_string(K));
    if (lag_order < 1)
        throw argument_error("johansen_trace: lag order must be at least 1");
    if (N <= K * std::size_t(lag_order) + 10)
        throw validation_error("johansen_trace: need more than " +
                               std::to_string(K * std::size_t(lag_order) + 10) +
                               " rows, got " + std::to_string(N));

    const Eigen::Index m = lag_order;
    const Eigen::Index T = Eigen::Index(N) - m;
    const Eigen::Index k = Eigen::Index(K);

    // dY holds the N-1 first differences; the regression sample is the last
    // T of them.
    Eigen::MatrixXd dY(Eigen::Index(N) - 1, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto& col = panel.columns[std::size_t(j)];
        for (Eigen::Index t = 0; t + 1 < Eigen::Index(N); ++t)
            dY(t, j) = col[std::size_t(t) + 1] - col[std::size_t(t)];
    }

    Eigen::MatrixXd Z0 = dY.bottomRows(T);                  // current differences
    Eigen::MatrixXd Z1(T, 1 + k * (m - 1));                 // constant + lagged differences
    Z1.col(0).setOnes();
    for (Eigen::Index i = 1; i < m; ++i)
        Z1.block(0, 1 + (i - 1) * k, T, k) = dY.middleRows(m - 1 - i, T);
    Eigen::MatrixXd ZK(T, k);                               // lagged levels
    for (Eigen::Index j = 0; j < k; ++j) {
        const auto& col = panel.columns[std::size_t(j)];
        for (Eigen::Index t = 0; t < T; ++t)
            ZK(t, j) = col[std::size_t(m - 1 + t)];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z1);
    qr.setThreshold(1e-10);
    if (qr.rank() < Z1.cols())
        throw numerical_error("johansen_trace: singular short-run regressor matrix");
    const Eigen::MatrixXd R0 = Z0 - Z1 * qr.solve(Z0);
    const Eigen::MatrixXd RK = ZK - Z1 * qr.solve(ZK);

    const Eigen::MatrixXd S00 = R0.transpose() * R0 / double(T);
    const Eigen::MatrixXd SKK = RK.transpose() * RK / double(T);
    const Eigen::MatrixXd S0K = R0.transpose() * RK / double(T);

    Eigen::LLT<Eigen::MatrixXd> s00_chol(S00);
    if (s00_chol.info() != Eigen::Success)
        throw numerical_error("johansen_trace: singular difference moment matrix");
    const Eigen::MatrixXd B = S0K.transpose() * s00_chol.solve(S0K);  // SK0 S00^-1 S0K

    Eigen::LLT<Eigen::MatrixXd> skk_chol(SKK);
    if (skk_chol.info() != Eigen::Success)
        throw numerical_error("johansen_trace: singular level moment matrix");
    const Eigen::MatrixXd L = skk_chol.matrixL();
    const Eigen::MatrixXd Linv =
        L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd C = Linv * B * Linv.transpose();
    C = ((C + C.transpose()) / 2.0).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success)
        throw numerical_error("johansen_trace: eigensolver failed");

    JohansenReport rep;
    rep.lag_order = lag_order;
    rep.nobs = std::size_t(T);
    rep.eigenvalues.resize(K);
    rep.eigenvectors.resize(k, k);
    // Eigen returns ascending eigenvalues; emit descending.
    for (Eigen::Index i = 0; i < k; ++i) {
        const Eigen::Index src = k - 1 - i;
        rep.eigenvalues[std::size_t(i)] = eig.eigenvalues()[src];
        rep.eigenvectors.col(i) = Linv.transpose() * eig.eigenvectors().col(src);
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        const double pivot = rep.eigenvectors(0, i);
        if (std::fabs(pivot) < 1e-300)
            throw numerical_error("johansen_trace: cannot normalize eigenvector " +
                                  std::to_string(i) + " (leading weight is zero)");
        rep.eigenvectors.col(i) /= pivot;
    }

    rep.trace_stats.resize(K);
    for (std::size_t r = 0; r < K; ++r) {
        double sum = 0.0;
        for (std::size_t i = r; i < K; ++i) {
            const double lambda = rep.eigenvalues[i];
            if (lambda >= 1.0)
                throw numerical_error("johansen_trace: eigenvalue reached 1");
            sum += std::log1p(-std::max(lambda, 0.0));
        }
        rep.trace_stats[r] = -double(T) * sum;
        rep.critical_values.push_back(detail::johansen_critical_values(int(K - r)));
    }
    return rep;
}

/// Linear combination of panel columns: s_t = sum_j w_j x_jt.
inline std::vector<double> portfolio_series(const AlignedPanel& panel,
                                            const std::vector<double>& weights) {
    if (weights.size() != panel.cols())
        throw argument_error("portfolio_series: " + std::to_string(weights.size()) +
                             " weights for " + std::to_string(panel.cols()) + " columns");
    std::vector<double> out(panel.rows(), 0.0);
    for (std::size_t j = 0; j < panel.cols(); ++j)
        for (std::size_t t = 0; t < panel.rows(); ++t)
            out[t] += weights[j] * panel.columns[j][t];
    return out;
}

} // namespace comove
