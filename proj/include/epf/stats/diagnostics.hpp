#pragma once

#include "epf/core/dist.hpp"
#include "epf/stats/acf.hpp"

namespace epf::stats {

struct LjungBoxResult {
    double statistic;
    double p_value;
    int lags;
};

inline LjungBoxResult ljung_box(const Eigen::VectorXd& x, int lags, int fitted_params = 0) {
    auto r = acf(x, lags);
    double n = static_cast<double>(x.size());
    double q = 0.0;
    for (int k = 1; k <= lags; ++k) q += r.values(k) * r.values(k) / (n - k);
    q *= n * (n + 2.0);
    double dof = lags - fitted_params;
    if (dof < 1) throw ValidationError("ljung_box: lags must exceed fitted parameter count");
    return {q, 1.0 - chi2_cdf(q, dof), lags};
}

}  // namespace epf::stats
