#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "epf/core/error.hpp"

namespace epf::decomp {

// Local linear regression with tricube weights over the `window` nearest
// points (by index distance). Boundary windows are asymmetric.
inline Eigen::VectorXd loess_smooth(const Eigen::VectorXd& y, int window) {
    Eigen::Index n = y.size();
    if (n == 0) throw DataError("loess: empty series");
    if (window < 2) throw ValidationError("loess: window must be at least 2");
    window = std::min<int>(window, static_cast<int>(n));
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index lo = i - window / 2;
        lo = std::clamp<Eigen::Index>(lo, 0, n - window);
        Eigen::Index hi = lo + window - 1;
        double dmax = std::max<double>(static_cast<double>(i - lo), static_cast<double>(hi - i));
        double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
        for (Eigen::Index j = lo; j <= hi; ++j) {
            double u = dmax > 0 ? std::abs(static_cast<double>(j - i)) / dmax : 0.0;
            double c = 1.0 - u * u * u;
            double w = c * c * c;
            if (w <= 0.0) continue;
            double x = static_cast<double>(j - i);
            sw += w;
            swx += w * x;
            swy += w * y(j);
            swxx += w * x * x;
            swxy += w * x * y(j);
        }
        double det = sw * swxx - swx * swx;
        if (std::abs(det) < 1e-12 * std::max(1.0, sw * swxx)) {
            out(i) = sw > 0 ? swy / sw : y(i);  // fall back to weighted mean
        } else {
            // value at x = 0 of the local line
            out(i) = (swxx * swy - swx * swxy) / det;
        }
    }
    return out;
}

// Centered moving average; even windows use half weights at both ends.
inline Eigen::VectorXd centered_ma(const Eigen::VectorXd& y, int window) {
    Eigen::Index n = y.size();
    if (window < 1) throw ValidationError("centered_ma: window must be positive");
    Eigen::VectorXd out(n);
    bool even = window % 2 == 0;
    int half = window / 2;
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0, wsum = 0.0;
        for (int k = -half; k <= half; ++k) {
            Eigen::Index j = i + k;
            if (j < 0 || j >= n) continue;
            double w = (even && (k == -half || k == half)) ? 0.5 : 1.0;
            sum += w * y(j);
            wsum += w;
        }
        out(i) = sum / wsum;
    }
    return out;
}

}  // namespace epf::decomp
