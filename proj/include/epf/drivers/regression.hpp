#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "epf/panel/types.hpp"
#include "epf/stats/ols.hpp"

namespace epf::drivers {

struct RegressionTerm {
    std::string feature;
    int lag = 1;
    stats::CoefficientStat stat;
};

struct RegressionReport {
    int cluster = 0;
    std::vector<RegressionTerm> terms;
    double r2_uncentered = 0.0;
    Eigen::Index n_obs = 0;
    std::string covariance = "HC3";
};

// Residual-on-residual regression for one cluster's member days. No
// intercept: both sides are innovation series. Features enter at their
// configured lag (day-ahead drivers at lag 1, auction-style day-d data at 0).
inline RegressionReport cluster_regression(const DailySeries& price_resid,
                                           const std::vector<DailySeries>& feature_resids,
                                           const std::vector<int>& lags,
                                           const std::set<Date>& member_days, int cluster_id) {
    if (feature_resids.empty()) throw ValidationError("cluster_regression: no features");
    if (feature_resids.size() != lags.size())
        throw ValidationError("cluster_regression: lag list does not match features");

    auto value_at = [](const DailySeries& s, Date d) -> const double* {
        if (s.dates.empty() || d < s.dates.front() || d > s.dates.back()) return nullptr;
        return &s.values(d - s.dates.front());
    };

    std::vector<Date> rows;
    for (Eigen::Index i = 0; i < price_resid.size(); ++i) {
        Date d = price_resid.dates[static_cast<std::size_t>(i)];
        if (!member_days.count(d)) continue;
        bool ok = true;
        for (std::size_t f = 0; f < feature_resids.size(); ++f)
            if (!value_at(feature_resids[f], d - lags[f])) {
                ok = false;
                break;
            }
        if (ok) rows.push_back(d);
    }
    Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    Eigen::Index k = static_cast<Eigen::Index>(feature_resids.size());
    if (n <= k)
        throw DataError("cluster " + std::to_string(cluster_id) + ": " + std::to_string(n) +
                        " usable member days for " + std::to_string(k) + " regressors");

    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = *value_at(price_resid, rows[static_cast<std::size_t>(i)]);
        for (Eigen::Index f = 0; f < k; ++f)
            X(i, f) = *value_at(feature_resids[static_cast<std::size_t>(f)],
                                rows[static_cast<std::size_t>(i)] - lags[static_cast<std::size_t>(f)]);
    }

    stats::OlsFit fit = stats::ols(X, y);
    Eigen::MatrixXd cov = stats::hc3_covariance(X, fit);
    auto cstats = stats::coefficient_stats(fit, cov);

    RegressionReport rep;
    rep.cluster = cluster_id;
    rep.n_obs = n;
    rep.r2_uncentered = stats::r2_uncentered(y, fit.ssr);
    for (Eigen::Index f = 0; f < k; ++f)
        rep.terms.push_back({feature_resids[static_cast<std::size_t>(f)].name,
                             lags[static_cast<std::size_t>(f)], cstats[static_cast<std::size_t>(f)]});
    return rep;
}

inline std::vector<std::string> select_significant(const RegressionReport& rep, double alpha = 0.05) {
    if (alpha <= 0.0 || alpha > 1.0) throw ValidationError("select_significant: alpha out of (0, 1]");
    std::vector<std::string> out;
    for (const auto& t : rep.terms)
        if (t.stat.p_value < alpha) out.push_back(t.feature);
    return out;
}

struct DriverSet {
    std::vector<std::string> ordered_features;          // first appearance scanning clusters ascending
    std::map<int, std::vector<std::string>> by_cluster;
};

inline DriverSet union_drivers(const std::vector<RegressionReport>& reports, double alpha = 0.05) {
    DriverSet ds;
    std::set<std::string> seen;
    std::vector<const RegressionReport*> sorted;
    for (const auto& r : reports) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const RegressionReport* a, const RegressionReport* b) { return a->cluster < b->cluster; });
    for (const auto* r : sorted) {
        auto sig = select_significant(*r, alpha);
        ds.by_cluster[r->cluster] = sig;
        for (const auto& f : sig)
            if (seen.insert(f).second) ds.ordered_features.push_back(f);
    }
    return ds;
}

}  // namespace epf::drivers
