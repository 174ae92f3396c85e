#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "epf/core/error.hpp"

namespace epf::stats {

struct AcfResult {
    Eigen::VectorXd values;  // lags 0..max_lag
    double conf_band;        // +-1.96 / sqrt(T)
};

inline AcfResult acf(const Eigen::VectorXd& x, int max_lag) {
    Eigen::Index n = x.size();
    if (max_lag < 0 || max_lag >= n) throw ValidationError("acf: max_lag out of range");
    double mean = x.mean();
    Eigen::VectorXd c = x.array() - mean;
    double denom = c.squaredNorm();
    if (denom <= 0.0) throw DataError("acf: constant series has undefined autocorrelation");
    AcfResult out;
    out.values.resize(max_lag + 1);
    for (int k = 0; k <= max_lag; ++k)
        out.values(k) = c.tail(n - k).dot(c.head(n - k)) / denom;
    out.conf_band = 1.96 / std::sqrt(static_cast<double>(n));
    return out;
}

}  // namespace epf::stats
