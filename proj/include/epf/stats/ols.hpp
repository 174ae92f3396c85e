#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "epf/core/dist.hpp"
#include "epf/core/error.hpp"

namespace epf::stats {

struct OlsFit {
    Eigen::VectorXd beta;
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
    double ssr = 0.0;       // sum of squared residuals
    double sigma2 = 0.0;    // ssr / (n - k)
    Eigen::MatrixXd xtx_inv;
    Eigen::Index n = 0, k = 0;
};

inline OlsFit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw DataError("ols: X/y row mismatch");
    if (X.rows() <= X.cols()) throw DataError("ols: need more rows than regressors");
    OlsFit f;
    f.n = X.rows();
    f.k = X.cols();
    Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
    if (ldlt.info() != Eigen::Success || ldlt.isNegative())
        throw NumericalError("ols: singular design matrix");
    f.beta = ldlt.solve(X.transpose() * y);
    f.xtx_inv = ldlt.solve(Eigen::MatrixXd::Identity(f.k, f.k));
    f.fitted = X * f.beta;
    f.residuals = y - f.fitted;
    f.ssr = f.residuals.squaredNorm();
    f.sigma2 = f.ssr / static_cast<double>(f.n - f.k);
    return f;
}

struct CoefficientStat {
    double estimate, std_error, t_stat, p_value, ci_low, ci_high;
};

// Heteroskedasticity-robust covariance with squared leverage correction:
// (X'X)^-1 X' diag(e_i^2 / (1 - h_ii)^2) X (X'X)^-1.
inline Eigen::MatrixXd hc3_covariance(const Eigen::MatrixXd& X, const OlsFit& fit) {
    Eigen::MatrixXd xi = X * fit.xtx_inv;  // rows: x_i' (X'X)^-1
    Eigen::VectorXd lev = (xi.array() * X.array()).rowwise().sum();
    Eigen::VectorXd w(fit.n);
    for (Eigen::Index i = 0; i < fit.n; ++i) {
        double one_minus_h = 1.0 - lev(i);
        if (one_minus_h <= 1e-12)
            throw NumericalError("hc3: leverage at or above 1 (row " + std::to_string(i) + ")");
        double r = fit.residuals(i) / one_minus_h;
        w(i) = r * r;
    }
    return xi.transpose() * w.asDiagonal() * xi;
}

inline std::vector<CoefficientStat> coefficient_stats(const OlsFit& fit, const Eigen::MatrixXd& cov,
                                                      double ci_level = 0.95) {
    double dof = static_cast<double>(fit.n - fit.k);
    double tq = student_t_quantile(0.5 + ci_level / 2.0, dof);
    std::vector<CoefficientStat> out;
    out.reserve(static_cast<std::size_t>(fit.k));
    for (Eigen::Index j = 0; j < fit.k; ++j) {
        double se = std::sqrt(std::max(cov(j, j), 0.0));
        double t = se > 0.0 ? fit.beta(j) / se : std::numeric_limits<double>::infinity();
        out.push_back({fit.beta(j), se, t, t_pvalue(t, dof), fit.beta(j) - tq * se, fit.beta(j) + tq * se});
    }
    return out;
}

// R^2 against the raw (uncentered) total sum of squares; appropriate for
// regressions estimated without an intercept.
inline double r2_uncentered(const Eigen::VectorXd& y, double ssr) {
    double tss = y.squaredNorm();
    if (tss <= 0.0) throw NumericalError("r2_uncentered: zero total sum of squares");
    return 1.0 - ssr / tss;
}

}  // namespace epf::stats
