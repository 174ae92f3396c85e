#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "epf/core/rng.hpp"
#include "epf/panel/types.hpp"

namespace epf::sim {

struct MarketOptions {
    Date start = Date::from_ymd(2021, 1, 1);
    int n_days = 1095;
    std::uint64_t seed = 1;
    double driver_strength = 1.0;  // scales the planted feature effects
    double noise_sigma = 1.5;      // day-level price noise
    bool spikes = false;           // occasional scarcity days on top of the regimes
};

struct SyntheticMarket {
    PricePanel prices;
    VolumePanel volumes;
    FeatureMatrix features;
    std::vector<std::string> planted_drivers;
    std::map<std::string, int> planted_lags;  // 1 = previous day, 0 = same day
};

namespace detail {

inline double annual(double doy, double phase) { return std::sin(2.0 * M_PI * doy / 365.25 + phase); }

inline double hour_profile(int h) {
    // Two-peak working-day shape.
    double x = static_cast<double>(h);
    double morning = std::exp(-0.5 * std::pow((x - 8.5) / 2.2, 2));
    double evening = std::exp(-0.5 * std::pow((x - 18.5) / 2.5, 2));
    double night = std::exp(-0.5 * std::pow((x - 3.5) / 3.0, 2));
    return 6.0 * morning + 5.0 * evening - 4.5 * night;
}

}  // namespace detail

// Three years of a Nordic-looking day-ahead market. The system level carries
// annual and weekly cycles plus three seasonal price regimes; a few named
// features genuinely move the price (consumption and wind from the previous
// day, import capacity same-day) while the rest are correlated decoys.
inline SyntheticMarket simulate_market(const MarketOptions& opt = {}) {
    if (opt.n_days < 400) throw ValidationError("simulate_market: need at least 400 days");

    const std::vector<std::string> names = {
        "consumption_forecast", "wind_forecast",      "hydro_inflow",      "reservoir_level",
        "temperature",          "precipitation",      "gas_price",         "coal_price",
        "co2_price",            "import_capacity_no", "export_capacity_no", "import_capacity_se",
        "export_capacity_se",   "nuclear_available",  "thermal_available", "solar_forecast",
        "snow_depth",           "oil_price",          "fx_eur_nok"};
    const int nf = static_cast<int>(names.size());
    const int n = opt.n_days;

    SyntheticMarket mkt;
    mkt.planted_drivers = {"consumption_forecast", "wind_forecast", "import_capacity_no"};
    mkt.planted_lags = {{"consumption_forecast", 1}, {"wind_forecast", 1}, {"import_capacity_no", 0}};

    Rng fr(derive_seed(opt.seed, "market-features", 0));
    Rng pr(derive_seed(opt.seed, "market-prices", 0));
    Rng vr(derive_seed(opt.seed, "market-volumes", 0));

    mkt.features.names = names;
    mkt.features.dates.resize(static_cast<std::size_t>(n));
    mkt.features.values.resize(n, nf);

    // Feature processes: seasonal base + AR(1) idiosyncratic part. The idio
    // parts of the planted drivers are what the price actually responds to.
    Eigen::MatrixXd idio = Eigen::MatrixXd::Zero(n, nf);
    std::vector<double> level(static_cast<std::size_t>(nf));
    std::vector<double> amp(static_cast<std::size_t>(nf));
    std::vector<double> phase(static_cast<std::size_t>(nf));
    std::vector<double> idio_sigma(static_cast<std::size_t>(nf));
    for (int j = 0; j < nf; ++j) {
        level[static_cast<std::size_t>(j)] = 40.0 + 25.0 * fr.uniform();
        amp[static_cast<std::size_t>(j)] = 4.0 + 8.0 * fr.uniform();
        phase[static_cast<std::size_t>(j)] = 2.0 * M_PI * fr.uniform();
        idio_sigma[static_cast<std::size_t>(j)] = 2.0 + 2.0 * fr.uniform();
    }

    for (int i = 0; i < n; ++i) {
        Date d = opt.start + i;
        mkt.features.dates[static_cast<std::size_t>(i)] = d;
        auto [y, m, day] = d.ymd();
        double doy = static_cast<double>(d - Date::from_ymd(y, 1, 1));
        int dow = d.weekday();
        double weekly = (dow >= 5) ? -2.0 : 1.0;
        for (int j = 0; j < nf; ++j) {
            double prev = (i > 0) ? idio(i - 1, j) : 0.0;
            idio(i, j) = 0.55 * prev + idio_sigma[static_cast<std::size_t>(j)] * fr.normal();
            mkt.features.values(i, j) = level[static_cast<std::size_t>(j)] +
                                        amp[static_cast<std::size_t>(j)] *
                                            detail::annual(doy, phase[static_cast<std::size_t>(j)]) +
                                        weekly + idio(i, j);
        }
    }

    const int c_cons = mkt.features.column("consumption_forecast");
    const int c_wind = mkt.features.column("wind_forecast");
    const int c_cap = mkt.features.column("import_capacity_no");

    mkt.prices.dates = mkt.features.dates;
    mkt.prices.values.resize(n, kHours);
    mkt.volumes.dates = mkt.features.dates;
    mkt.volumes.values.resize(n, kHours);

    double ar = 0.0;
    for (int i = 0; i < n; ++i) {
        Date d = mkt.prices.dates[static_cast<std::size_t>(i)];
        auto [y, m, day] = d.ymd();
        double doy = static_cast<double>(d - Date::from_ymd(y, 1, 1));
        int dow = d.weekday();

        // Seasonal regimes: expensive winters, cheap summers.
        double regime = (m <= 2 || m == 12) ? 14.0 : (m >= 6 && m <= 8) ? -9.0 : 0.0;
        double weekly = (dow >= 5) ? -4.0 : (dow == 2 ? 1.5 : 0.5);
        ar = 0.6 * ar + opt.noise_sigma * pr.normal();

        double s = 38.0 + 10.0 * detail::annual(doy, 0.3) + regime + weekly + ar;
        double g = opt.driver_strength;
        if (i >= 1) {
            s += g * 0.9 * idio(i - 1, c_cons);
            s -= g * 0.7 * idio(i - 1, c_wind);
        }
        s += g * 0.5 * idio(i, c_cap);
        if (opt.spikes && pr.uniform() < 0.03) s += 15.0 + 25.0 * pr.uniform();

        for (int h = 0; h < kHours; ++h) {
            double shape = detail::hour_profile(h) * (dow >= 5 ? 0.55 : 1.0);
            mkt.prices.values(i, h) = s + shape + 0.6 * pr.normal();
            double v = 900.0 + 150.0 * detail::annual(doy, 0.3) + 40.0 * shape / 6.0 +
                       25.0 * vr.normal();
            mkt.volumes.values(i, h) = std::max(50.0, v);
        }
    }

    mkt.prices.check();
    mkt.volumes.check();
    mkt.features.check();
    return mkt;
}

}  // namespace epf::sim
