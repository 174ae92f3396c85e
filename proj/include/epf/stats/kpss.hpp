#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "epf/stats/adf.hpp"

namespace epf::stats {

namespace detail {

// Newey-West automatic bandwidth for the Bartlett kernel.
inline int kpss_auto_bandwidth(const Eigen::VectorXd& e) {
    Eigen::Index n = e.size();
    int init = static_cast<int>(std::pow(static_cast<double>(n), 2.0 / 9.0));
    double s0 = e.squaredNorm() / static_cast<double>(n);
    double s1 = 0.0;
    for (int j = 1; j <= init; ++j) {
        double g = 2.0 * e.tail(n - j).dot(e.head(n - j)) / static_cast<double>(n);
        s0 += g;
        s1 += j * g;
    }
    if (s0 == 0.0) return 0;
    double gamma_hat = 1.1447 * std::pow((s1 / s0) * (s1 / s0), 1.0 / 3.0);
    int bw = static_cast<int>(gamma_hat * std::pow(static_cast<double>(n), 1.0 / 3.0));
    return std::clamp(bw, 0, static_cast<int>(n) - 1);
}

}  // namespace detail

// KPSS stationarity test; H0 is (trend-)stationarity, rejection in the right tail.
inline TestResult kpss_test(const Eigen::VectorXd& y, Deterministic variant = Deterministic::constant,
                            int bandwidth = -1, double level = 0.05) {
    Eigen::Index n = y.size();
    if (n < 20) throw DataError("kpss: series too short");
    if (variant == Deterministic::none) throw ValidationError("kpss: variant must include a constant");

    Eigen::VectorXd e;
    if (variant == Deterministic::constant) {
        e = y.array() - y.mean();
    } else {
        Eigen::MatrixXd X(n, 2);
        for (Eigen::Index t = 0; t < n; ++t) {
            X(t, 0) = 1.0;
            X(t, 1) = static_cast<double>(t + 1);
        }
        e = ols(X, y).residuals;
    }
    if (e.squaredNorm() <= 0.0) throw DataError("kpss: constant series");

    if (bandwidth < 0) bandwidth = detail::kpss_auto_bandwidth(e);

    double s2 = e.squaredNorm() / static_cast<double>(n);
    for (int j = 1; j <= bandwidth; ++j) {
        double w = 1.0 - static_cast<double>(j) / (static_cast<double>(bandwidth) + 1.0);
        s2 += 2.0 * w * e.tail(n - j).dot(e.head(n - j)) / static_cast<double>(n);
    }
    if (s2 <= 0.0) throw NumericalError("kpss: nonpositive long-run variance");

    double cum = 0.0, sumsq = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
        cum += e(t);
        sumsq += cum * cum;
    }
    double stat = sumsq / (static_cast<double>(n) * static_cast<double>(n) * s2);

    TestResult r;
    r.test = "kpss";
    r.statistic = stat;
    r.lags_used = bandwidth;
    r.variant = variant;
    if (variant == Deterministic::constant)
        r.critical_values = {{0.01, 0.739}, {0.05, 0.463}, {0.10, 0.347}};
    else
        r.critical_values = {{0.01, 0.216}, {0.05, 0.146}, {0.10, 0.119}};
    r.decision = r.statistic > r.critical_values.at(level) ? Decision::reject : Decision::fail_to_reject;
    return r;
}

}  // namespace epf::stats
