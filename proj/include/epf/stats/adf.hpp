#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <string>

#include "epf/stats/ols.hpp"

namespace epf::stats {

enum class Deterministic { none, constant, constant_trend };

enum class Decision { reject, fail_to_reject };

inline const char* to_string(Deterministic d) {
    switch (d) {
        case Deterministic::none: return "none";
        case Deterministic::constant: return "constant";
        default: return "constant_trend";
    }
}

inline const char* to_string(Decision d) {
    return d == Decision::reject ? "reject" : "fail_to_reject";
}

struct TestResult {
    std::string test;
    double statistic = 0.0;
    std::map<double, double> critical_values;  // level -> threshold
    int lags_used = 0;
    Deterministic variant = Deterministic::constant;
    Decision decision = Decision::fail_to_reject;
};

namespace detail {

// MacKinnon response-surface coefficients: cv = b0 + b1/T + b2/T^2 + b3/T^3,
// rows ordered 1% / 5% / 10%.
inline const double* adf_surface(Deterministic variant, int which) {
    static constexpr double nc[3][4] = {{-2.56574, -2.2358, -3.627, 0.0},
                                        {-1.94100, -0.2686, -3.365, 31.223},
                                        {-1.61682, 0.2656, -2.714, 25.364}};
    static constexpr double c[3][4] = {{-3.43035, -6.5393, -16.786, -79.433},
                                       {-2.86154, -2.8903, -4.234, -40.040},
                                       {-2.56677, -1.5384, -2.809, 0.0}};
    static constexpr double ct[3][4] = {{-3.95877, -9.0531, -28.428, -134.155},
                                        {-3.41049, -4.3904, -9.036, -45.374},
                                        {-3.12705, -2.5856, -3.925, -22.380}};
    switch (variant) {
        case Deterministic::none: return nc[which];
        case Deterministic::constant: return c[which];
        default: return ct[which];
    }
}

inline std::map<double, double> adf_critical_values(Deterministic variant, double t_eff) {
    static constexpr double levels[3] = {0.01, 0.05, 0.10};
    std::map<double, double> out;
    for (int i = 0; i < 3; ++i) {
        const double* b = adf_surface(variant, i);
        out[levels[i]] = b[0] + b[1] / t_eff + b[2] / (t_eff * t_eff) + b[3] / (t_eff * t_eff * t_eff);
    }
    return out;
}

struct AdfRegression {
    double t_rho;
    double aic;
};

// Regression of dy_t on deterministics, y_{t-1}, and k lagged differences,
// restricted to rows starting at `start` so fits with different k share a sample.
inline AdfRegression adf_regression(const Eigen::VectorXd& y, Deterministic variant, int k, int start) {
    Eigen::Index n = y.size();
    Eigen::Index rows = n - 1 - start;
    int det = variant == Deterministic::none ? 0 : (variant == Deterministic::constant ? 1 : 2);
    Eigen::Index cols = det + 1 + k;
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd dy(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        Eigen::Index t = start + 1 + i;  // index of y_t
        dy(i) = y(t) - y(t - 1);
        Eigen::Index c = 0;
        if (det >= 1) X(i, c++) = 1.0;
        if (det >= 2) X(i, c++) = static_cast<double>(t);
        X(i, c++) = y(t - 1);
        for (int j = 1; j <= k; ++j) X(i, c++) = y(t - j) - y(t - j - 1);
    }
    OlsFit f = ols(X, dy);
    Eigen::Index rho_col = det;
    double se = std::sqrt(f.sigma2 * f.xtx_inv(rho_col, rho_col));
    if (se <= 0.0) throw NumericalError("adf: zero standard error on the level coefficient");
    double t_eff = static_cast<double>(rows);
    double aic = t_eff * std::log(f.ssr / t_eff) + 2.0 * static_cast<double>(cols);
    return {f.beta(rho_col) / se, aic};
}

}  // namespace detail

// Augmented Dickey-Fuller with AIC lag selection up to max_lags
// (default: Schwert's 12 * (T/100)^(1/4) rule).
inline TestResult adf_test(const Eigen::VectorXd& y, Deterministic variant = Deterministic::constant,
                           int max_lags = -1, double level = 0.05) {
    Eigen::Index n = y.size();
    if (n < 20) throw DataError("adf: series too short");
    if ((y.array() == y(0)).all()) throw DataError("adf: constant series");
    if (max_lags < 0)
        max_lags = static_cast<int>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
    max_lags = std::min<int>(max_lags, static_cast<int>(n / 2) - 4);
    if (max_lags < 0) max_lags = 0;

    int best_k = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= max_lags; ++k) {
        double aic = detail::adf_regression(y, variant, k, max_lags).aic;
        if (aic < best_aic - 1e-12) {
            best_aic = aic;
            best_k = k;
        }
    }
    // refit with the chosen lag on the longest usable sample
    auto fit = detail::adf_regression(y, variant, best_k, best_k);
    double t_eff = static_cast<double>(n - 1 - best_k);

    TestResult r;
    r.test = "adf";
    r.statistic = fit.t_rho;
    r.lags_used = best_k;
    r.variant = variant;
    r.critical_values = detail::adf_critical_values(variant, t_eff);
    r.decision = r.statistic < r.critical_values.at(level) ? Decision::reject : Decision::fail_to_reject;
    return r;
}

}  // namespace epf::stats
