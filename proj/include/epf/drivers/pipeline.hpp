#pragma once

#include "epf/decomp/sarima.hpp"
#include "epf/drivers/kmeans.hpp"
#include "epf/drivers/regression.hpp"
#include "epf/panel/transforms.hpp"

namespace epf::drivers {

struct DriverConfig {
    int k_max = 8;
    std::uint64_t kmeans_seed = 42;
    double alpha = 0.05;
    std::vector<std::string> day_d_features;  // regressed at lag 0; everything else at lag 1
    std::vector<int> periods{7, 365};
    decomp::SarimaGrid sarima_grid;
    decomp::MstdOptions mstd_options;
};

struct DriverPipelineResult {
    DailySeries system_price;
    ElbowResult elbow;
    ClusterModel clusters;
    DailySeries price_residual;
    std::vector<DailySeries> feature_residuals;
    std::vector<int> feature_lags;
    std::vector<RegressionReport> regressions;
    DriverSet drivers;
};

// Volume-weighted daily price -> price-level clusters -> residualize price
// and every feature -> per-cluster regressions -> significant-driver union.
inline DriverPipelineResult run_driver_pipeline(const PricePanel& prices, const VolumePanel& volumes,
                                                const FeatureMatrix& features,
                                                const DriverConfig& cfg = {}) {
    if (cfg.k_max < 1) throw ValidationError("driver pipeline: k_max must be positive");
    features.check();

    DriverPipelineResult res;
    res.system_price = vwap(prices, volumes);
    res.elbow = elbow_k(res.system_price.values, cfg.k_max, cfg.kmeans_seed);
    res.clusters = kmeans_1d(res.system_price.values, res.elbow.k, cfg.kmeans_seed);

    res.price_residual =
        decomp::residualize(res.system_price, cfg.periods, cfg.sarima_grid, cfg.mstd_options).residuals;

    std::set<std::string> day_d(cfg.day_d_features.begin(), cfg.day_d_features.end());
    for (const auto& name : day_d)
        if (std::find(features.names.begin(), features.names.end(), name) == features.names.end())
            throw ValidationError("driver pipeline: day-d feature '" + name + "' not in feature matrix");

    for (Eigen::Index f = 0; f < features.n_features(); ++f) {
        DailySeries s = features.series(static_cast<int>(f));
        DailySeries resid =
            decomp::residualize(s, cfg.periods, cfg.sarima_grid, cfg.mstd_options).residuals;
        resid.name = s.name;  // regressions and reports speak in feature names
        res.feature_residuals.push_back(std::move(resid));
        res.feature_lags.push_back(day_d.count(s.name) ? 0 : 1);
    }

    for (int c = 0; c < res.clusters.k; ++c) {
        std::set<Date> member_days;
        for (std::size_t i = 0; i < res.clusters.assignments.size(); ++i)
            if (res.clusters.assignments[i] == c)
                member_days.insert(res.system_price.dates[i]);
        res.regressions.push_back(cluster_regression(res.price_residual, res.feature_residuals,
                                                     res.feature_lags, member_days, c));
    }
    res.drivers = union_drivers(res.regressions, cfg.alpha);
    return res;
}

}  // namespace epf::drivers
