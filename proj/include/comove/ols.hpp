#pragma once

#include <Eigen/Dense>

#include "comove/errors.hpp"

// Least-squares core shared by the regression-based tests. All fits go
// through column-pivoted Householder QR: the level series reach 1e4 in
// magnitude and normal equations would lose half the mantissa.

namespace comove {

struct OlsFit {
    Eigen::VectorXd coef;
    Eigen::VectorXd residuals;
    double ssr = 0.0;               // sum of squared residuals
    Eigen::MatrixXd xtx_inv;        // (X'X)^-1, for standard errors
    Eigen::Index n = 0;
    Eigen::Index k = 0;             // columns of X

    /// Residual variance with the given degrees-of-freedom correction.
    double sigma2(Eigen::Index dof_used) const {
        return ssr / double(n - dof_used);
    }

    /// Standard error of coefficient j (OLS, homoskedastic).
    double std_error(Eigen::Index j) const {
        return std::sqrt(sigma2(k) * xtx_inv(j, j));
    }
};

/// Fit y = X b by QR. Throws on rank deficiency.
inline OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size())
        throw argument_error("ols_fit: X and y row counts differ");
    if (X.rows() <= X.cols())
        throw argument_error("ols_fit: need more observations than regressors");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols())
        throw numerical_error("singular design matrix (rank " + std::to_string(qr.rank()) +
                              " of " + std::to_string(X.cols()) + ")");

    OlsFit fit;
    fit.n = X.rows();
    fit.k = X.cols();
    fit.coef = qr.solve(y);
    fit.residuals = y - X * fit.coef;
    fit.ssr = fit.residuals.squaredNorm();

    const Eigen::MatrixXd R =
        qr.matrixR().topLeftCorner(X.cols(), X.cols()).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(X.cols(), X.cols()));
    const auto P = qr.colsPermutation();
    fit.xtx_inv = P * (Rinv * Rinv.transpose()) * P.transpose();
    return fit;
}

} // namespace comove
