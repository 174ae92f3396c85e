#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epf/decomp/mstd.hpp"
#include "epf/pipeline/run.hpp"
#include "epf/sim/market.hpp"

namespace fs = std::filesystem;
using epf::pipeline::json;

namespace {

struct Globals {
    std::string config_path;
    std::string out_dir = "out";
    long long seed = -1;  // <0: keep the config's seed
    std::string log_level = "info";
};

struct Panels {
    epf::PricePanel prices;
    epf::VolumePanel volumes;
    epf::FeatureMatrix features;
    epf::RepairLog repairs;
};

epf::pipeline::LogFn make_logger(const Globals& g) {
    if (g.log_level == "quiet") return {};
    return [](const std::string& m) { std::fprintf(stderr, "[epf] %s\n", m.c_str()); };
}

epf::pipeline::RunConfig load_config(const Globals& g) {
    if (g.config_path.empty())
        throw epf::ValidationError("this subcommand needs --config <path>");
    auto cfg = epf::pipeline::validate_config(g.config_path);
    if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
    return cfg;
}

Panels load_panels(const epf::pipeline::RunConfig& cfg) {
    Panels p;
    p.prices = epf::load_price_panel(cfg.prices_path, p.repairs);
    p.volumes = epf::load_volume_panel(cfg.volumes_path, p.repairs);
    p.features = epf::load_features(cfg.features_path, p.repairs);
    if (p.prices.dates != p.volumes.dates || p.prices.dates != p.features.dates)
        throw epf::DataError("price, volume and feature files cover different dates");
    if (p.prices.row_of(cfg.train.start) < 0 || p.prices.row_of(cfg.test.end) < 0)
        throw epf::DataError("data does not cover the configured windows");
    return p;
}

epf::FeatureMatrix slice_features(const epf::FeatureMatrix& fm, epf::DateWindow w) {
    int i0 = fm.row_of(w.start), i1 = fm.row_of(w.end);
    if (i0 < 0 || i1 < 0) throw epf::DataError("features do not cover " + w.start.str() + ".." + w.end.str());
    epf::FeatureMatrix out;
    out.names = fm.names;
    out.dates.assign(fm.dates.begin() + i0, fm.dates.begin() + i1 + 1);
    out.values = fm.values.middleRows(i0, i1 - i0 + 1);
    return out;
}

std::string stage_dir(const Globals& g, const std::string& stage) {
    fs::path p = fs::path(g.out_dir) / stage;
    fs::create_directories(p);
    return p.string();
}

json critical_values_json(const std::map<double, double>& cvs) {
    json j = json::object();
    for (const auto& [level, cv] : cvs) {
        char key[16];
        std::snprintf(key, sizeof key, "%g%%", level * 100.0);
        j[key] = cv;
    }
    return j;
}

json stat_test_json(const epf::stats::TestResult& r) {
    json j;
    j["test"] = r.test;
    j["statistic"] = r.statistic;
    j["lags"] = r.lags_used;
    j["variant"] = epf::stats::to_string(r.variant);
    j["critical_values"] = critical_values_json(r.critical_values);
    j["decision"] = epf::stats::to_string(r.decision);
    return j;
}

json ch_test_json(const epf::stats::ChTestResult& r) {
    json j;
    j["statistic"] = r.l_statistic;
    j["rank"] = r.rank;
    j["bandwidth"] = r.bandwidth;
    j["selection"] = r.selection.str();
    j["critical_values"] = critical_values_json(r.critical_values);
    j["decision"] = epf::stats::to_string(r.decision);
    return j;
}

// ---- subcommand bodies ----

void cmd_simulate(const Globals& g, int days, long long seed, double strength, double noise,
                  bool spikes, const std::string& start) {
    epf::sim::MarketOptions mo;
    mo.n_days = days;
    mo.seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : 1;
    mo.driver_strength = strength;
    mo.noise_sigma = noise;
    mo.spikes = spikes;
    if (!start.empty()) mo.start = epf::Date::parse(start);
    auto mkt = epf::sim::simulate_market(mo);

    fs::create_directories(g.out_dir);
    std::string root = g.out_dir;
    epf::save_hourly_panel(mkt.prices, root + "/prices.csv");
    epf::save_hourly_panel(mkt.volumes, root + "/volumes.csv");
    epf::save_features(mkt.features, root + "/features.csv");
    json truth;
    truth["planted_drivers"] = mkt.planted_drivers;
    json lags = json::object();
    for (const auto& [name, lag] : mkt.planted_lags) lags[name] = lag;
    truth["planted_lags"] = lags;
    truth["n_days"] = mo.n_days;
    truth["seed"] = mo.seed;
    truth["start"] = mo.start.str();
    truth["driver_strength"] = mo.driver_strength;
    truth["noise_sigma"] = mo.noise_sigma;
    truth["spikes"] = mo.spikes;
    epf::pipeline::detail::write_json(truth, root + "/truth.json");
    std::printf("wrote %s/{prices,volumes,features}.csv and truth.json (%d days)\n", root.c_str(),
                mo.n_days);
}

void cmd_ingest(const Globals& g) {
    auto cfg = load_config(g);
    auto p = load_panels(cfg);
    std::string dir = stage_dir(g, "ingest");
    epf::save_hourly_panel(p.prices, dir + "/prices.csv");
    epf::save_hourly_panel(p.volumes, dir + "/volumes.csv");
    epf::save_features(p.features, dir + "/features.csv");
    {
        epf::csv::Writer w(dir + "/repairs.csv");
        w.row({"date", "hour", "action", "detail"});
        for (const auto& e : p.repairs.entries)
            w.row({e.date.str(), std::to_string(e.hour), e.action, e.detail});
    }
    std::printf("ingested %zu days, %zu repairs -> %s\n", p.prices.dates.size(),
                p.repairs.entries.size(), dir.c_str());
}

void cmd_characterize(const Globals& g, int calibrate_ch, int max_lag) {
    auto cfg = load_config(g);
    auto p = load_panels(cfg);
    auto train_prices = epf::slice(p.prices, cfg.train);
    auto train_volumes = epf::slice(p.volumes, cfg.train);

    json rep;
    rep["train"] = {{"start", cfg.train.start.str()}, {"end", cfg.train.end.str()}};
    json hours = json::array();
    for (int h = 0; h < epf::kHours; ++h) {
        Eigen::VectorXd y = train_prices.values.col(h);
        json e;
        e["hour"] = h;
        e["adf"] = stat_test_json(epf::stats::adf_test(y));
        e["kpss"] = stat_test_json(epf::stats::kpss_test(y));
        e["ch"] = ch_test_json(epf::stats::ch_test(y, 7));
        hours.push_back(e);
    }
    rep["hours"] = hours;

    epf::DailySeries vwasp = epf::vwap(train_prices, train_volumes);
    int lags = std::min<int>(max_lag, static_cast<int>(vwasp.size()) / 4);
    auto a = epf::stats::acf(vwasp.values, lags);
    json acf_j;
    acf_j["max_lag"] = lags;
    json vals = json::array();
    for (Eigen::Index i = 0; i < a.values.size(); ++i) vals.push_back(a.values(i));
    acf_j["values"] = vals;
    acf_j["conf_band"] = a.conf_band;
    rep["acf_vwasp"] = acf_j;

    if (calibrate_ch > 0) {
        double cv = epf::stats::ch_critical_value_mc(7, epf::stats::ChSelection::all_frequencies(),
                                                     epf::stats::HacKernel::bartlett,
                                                     train_prices.days(), calibrate_ch,
                                                     epf::derive_seed(cfg.seed, "ch-calibration", 0));
        json c;
        c["replications"] = calibrate_ch;
        c["level"] = 0.05;
        c["critical_value"] = cv;
        rep["ch_calibration"] = c;
    }

    std::string dir = stage_dir(g, "characterize");
    epf::pipeline::detail::write_json(rep, dir + "/report.json");
    std::printf("characterization report -> %s/report.json\n", dir.c_str());
}

void cmd_decompose(const Globals& g, const std::string& selector) {
    auto cfg = load_config(g);
    auto p = load_panels(cfg);
    auto train_prices = epf::slice(p.prices, cfg.train);

    epf::DailySeries s;
    if (selector == "vwasp") {
        s = epf::vwap(train_prices, epf::slice(p.volumes, cfg.train));
    } else if (selector == "mean") {
        s.dates = train_prices.dates;
        s.values = train_prices.values.rowwise().mean();
        s.name = "daily-mean";
    } else if (selector.rfind("hour", 0) == 0) {
        int h = -1;
        try {
            h = std::stoi(selector.substr(4));
        } catch (...) {
        }
        if (h < 0 || h >= epf::kHours)
            throw epf::ValidationError("decompose: bad hour selector '" + selector + "'");
        s.dates = train_prices.dates;
        s.values = train_prices.values.col(h);
        s.name = selector;
    } else if (selector.rfind("feature:", 0) == 0) {
        std::string name = selector.substr(8);
        auto it = std::find(p.features.names.begin(), p.features.names.end(), name);
        if (it == p.features.names.end())
            throw epf::ValidationError("decompose: unknown feature '" + name + "'");
        s = slice_features(p.features, cfg.train)
                .series(static_cast<int>(it - p.features.names.begin()));
    } else {
        throw epf::ValidationError("decompose: selector must be vwasp, mean, hour<h> or feature:<name>");
    }

    auto dec = epf::decomp::mstd(s, cfg.mstd_periods, cfg.mstd_options);
    std::string slug = s.name;
    for (auto& c : slug)
        if (c == ':' || c == '/' || c == ' ') c = '_';
    std::string dir = stage_dir(g, "decompose");
    std::string path = dir + "/" + slug + ".csv";
    {
        std::vector<std::string> header = {"date", "value", "trend"};
        std::vector<int> periods;
        for (const auto& [period, comp] : dec.seasonals) {
            header.push_back("seasonal_" + std::to_string(period));
            periods.push_back(period);
        }
        header.push_back("remainder");
        epf::csv::Writer w(path);
        w.row(header);
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            std::vector<std::string> row = {s.dates[static_cast<std::size_t>(i)].str(),
                                            epf::csv::format_double(s.values(i)),
                                            epf::csv::format_double(dec.trend.values(i))};
            for (int period : periods)
                row.push_back(epf::csv::format_double(dec.seasonals.at(period).values(i)));
            row.push_back(epf::csv::format_double(dec.remainder.values(i)));
            w.row(row);
        }
    }
    if (!dec.dropped_periods.empty()) {
        std::string dropped;
        for (int period : dec.dropped_periods) dropped += " " + std::to_string(period);
        std::fprintf(stderr, "[epf] decompose: dropped periods%s (series too short)\n", dropped.c_str());
    }
    std::printf("decomposition of %s -> %s\n", s.name.c_str(), path.c_str());
}

void cmd_drivers(const Globals& g) {
    auto cfg = load_config(g);
    auto p = load_panels(cfg);

    epf::drivers::DriverConfig dcfg;
    dcfg.k_max = cfg.k_max;
    dcfg.kmeans_seed = epf::derive_seed(cfg.seed, "kmeans", 0);
    dcfg.alpha = cfg.alpha;
    dcfg.day_d_features = cfg.day_d_features;
    dcfg.periods = cfg.mstd_periods;
    dcfg.sarima_grid = cfg.sarima_grid;
    dcfg.mstd_options = cfg.mstd_options;
    auto dr = epf::drivers::run_driver_pipeline(epf::slice(p.prices, cfg.train),
                                                epf::slice(p.volumes, cfg.train),
                                                slice_features(p.features, cfg.train), dcfg);
    std::string dir = stage_dir(g, "drivers");
    epf::pipeline::detail::write_driver_outputs(dr, cfg.alpha, dir);
    std::printf("k=%d, %zu driver(s):", dr.elbow.k, dr.drivers.ordered_features.size());
    for (const auto& d : dr.drivers.ordered_features) std::printf(" %s", d.c_str());
    std::printf("\nreports -> %s\n", dir.c_str());
}

void cmd_reduce(const Globals& g) {
    auto cfg = load_config(g);
    auto p = load_panels(cfg);

    auto basis = epf::reduce::fit_pca(
        epf::pipeline::detail::joint_matrix(p.prices, p.features, cfg.train),
        epf::pipeline::detail::joint_names(p.features), cfg.pca_standardize);
    std::string dir = stage_dir(g, "reduce");
    epf::reduce::save_pca(basis, dir + "/basis.csv");
    epf::save_features(epf::pipeline::detail::score_matrix(basis, p.prices, p.features,
                                                           {cfg.train.start, cfg.test.end},
                                                           basis.n_components()),
                       dir + "/scores.csv");

    // The component count is tuned downstream: run the combination search and
    // record the full validation curve next to the basis.
    auto cfg2 = cfg;
    cfg2.method = epf::pipeline::CombineMethod::ss_pca;
    epf::models::VarxForecaster varx;
    auto candidates = epf::pipeline::detail::native_candidates(cfg2, p.prices, p.features, varx);
    auto outcome = epf::pipeline::combine_with_method(cfg2, p.prices, p.features, &basis, candidates);

    json j;
    j["standardize"] = cfg.pca_standardize;
    j["n_components"] = basis.n_components();
    if (outcome.result.l_star) j["l_star"] = *outcome.result.l_star;
    json curve = json::array();
    for (const auto& pt : outcome.result.component_curve) {
        json e;
        e["l"] = pt.l;
        if (pt.valid)
            e["validation_rmse"] = pt.rmse;
        else
            e["error"] = pt.error;
        curve.push_back(e);
    }
    j["validation_curve"] = curve;
    epf::pipeline::detail::write_json(j, dir + "/reduce.json");
    if (outcome.result.l_star)
        std::printf("basis: %lld components, l* = %lld -> %s\n",
                    static_cast<long long>(basis.n_components()),
                    static_cast<long long>(*outcome.result.l_star), dir.c_str());
}

void cmd_fit(const Globals& g, const std::string& model, int p_max, int q_max, int lookback,
             int components) {
    auto cfg = load_config(g);
    if (p_max >= 0) cfg.varx_p_max = p_max;
    if (q_max >= 0) cfg.varx_q_max = q_max;
    if (lookback > 0) cfg.lookback = lookback;
    auto p = load_panels(cfg);
    std::string dir = stage_dir(g, "forecasts");

    if (model == "varx") {
        epf::models::VarxForecaster varx;
        varx.fit_auto(p.prices, p.features, cfg.train, cfg.varx_p_max, cfg.varx_q_max);
        auto fcst = varx.forecast(p.prices, p.features,
                                  {cfg.train.start + 7 + varx.model().p, cfg.test.end});
        epf::models::save_forecasts(fcst, dir + "/varx.csv");
        epf::pipeline::detail::write_json(epf::pipeline::detail::varx_model_json(varx),
                                          dir + "/varx.json");
        std::printf("varx(%d,%d) forecasts -> %s/varx.csv\n", varx.model().p, varx.model().q,
                    dir.c_str());
    } else if (model == "naive") {
        epf::models::NaiveSeasonalForecaster naive;
        auto fcst = naive.forecast(p.prices, {cfg.train.start + 7, cfg.test.end});
        epf::models::save_forecasts(fcst, dir + "/naive.csv");
        std::printf("naive forecasts -> %s/naive.csv\n", dir.c_str());
    } else if (model == "reduced-linear") {
        auto basis = epf::reduce::fit_pca(
            epf::pipeline::detail::joint_matrix(p.prices, p.features, cfg.train),
            epf::pipeline::detail::joint_names(p.features), cfg.pca_standardize);
        Eigen::Index l = components > 0 ? std::min<Eigen::Index>(components, basis.n_components())
                                        : basis.n_components();
        auto scores = epf::pipeline::detail::score_matrix(basis, p.prices, p.features,
                                                          {cfg.train.start, cfg.test.end}, l);
        epf::models::ReducedLinearOptions opt;
        opt.lookback = cfg.lookback;
        epf::models::ReducedLinearForecaster rl(opt);
        epf::DateWindow fit_win{cfg.train.start + cfg.lookback, cfg.train.end};
        rl.fit(scores, p.prices, fit_win);
        auto fcst = rl.forecast(scores, {fit_win.start, cfg.test.end});
        epf::models::save_forecasts(fcst, dir + "/reduced-linear.csv");
        json j;
        j["lookback"] = cfg.lookback;
        j["components"] = l;
        j["ridge_lambda"] = rl.ridge_lambda();
        j["validation_rmse"] = rl.validation_rmse();
        epf::pipeline::detail::write_json(j, dir + "/reduced-linear.json");
        std::printf("reduced-linear (l=%lld, lambda=%g) forecasts -> %s/reduced-linear.csv\n",
                    static_cast<long long>(l), rl.ridge_lambda(), dir.c_str());
    } else {
        throw epf::ValidationError("fit: --model must be varx, reduced-linear or naive");
    }
}

void cmd_combine(const Globals& g, const std::string& method, const std::vector<std::string>& tokens,
                 const std::string& pooling, bool clip) {
    auto cfg = load_config(g);
    if (!method.empty()) cfg.method = epf::pipeline::parse_method(method);
    if (!pooling.empty()) {
        if (pooling != "pooled" && pooling != "per-hour")
            throw epf::ValidationError("combine: --pooling must be pooled or per-hour");
        cfg.per_hour = pooling == "per-hour";
    }
    if (clip) cfg.clip_simplex = true;
    auto p = load_panels(cfg);

    epf::models::VarxForecaster varx;
    epf::models::NaiveSeasonalForecaster naive;
    std::vector<epf::models::ForecastSet> candidates;
    if (tokens.empty()) {
        candidates = epf::pipeline::detail::native_candidates(cfg, p.prices, p.features, varx);
    } else {
        epf::models::ForecastRegistry registry;
        for (const auto& tok : tokens) {
            if (fs::exists(tok)) {
                registry.add(epf::models::load_external_forecasts(tok, cfg.train.end));
            } else if (tok == "varx") {
                varx.fit_auto(p.prices, p.features, cfg.train, cfg.varx_p_max, cfg.varx_q_max);
                registry.add(varx.forecast(p.prices, p.features,
                                           {cfg.train.start + 7 + varx.model().p, cfg.test.end}));
            } else if (tok == "naive") {
                registry.add(naive.forecast(p.prices, {cfg.train.start + 7, cfg.test.end}));
            } else {
                throw epf::ValidationError("combine: candidate '" + tok +
                                           "' is neither a forecast file nor a native model id");
            }
        }
        candidates = registry.sets();
    }
    for (const auto& c : candidates)
        if (c.leakage_warning)
            std::fprintf(stderr, "[epf] note: '%s' includes training-window dates\n",
                         c.model_id.c_str());

    epf::reduce::PcaBasis basis;
    bool pca_built = false;
    if (cfg.method == epf::pipeline::CombineMethod::ss_pca) {
        basis = epf::reduce::fit_pca(
            epf::pipeline::detail::joint_matrix(p.prices, p.features, cfg.train),
            epf::pipeline::detail::joint_names(p.features), cfg.pca_standardize);
        pca_built = true;
    }
    auto outcome = epf::pipeline::combine_with_method(cfg, p.prices, p.features,
                                                      pca_built ? &basis : nullptr, candidates);

    std::string dir = stage_dir(g, "combine");
    epf::models::save_forecasts(outcome.result.combined, dir + "/combined.csv");
    for (const auto& m : outcome.result.members)
        epf::models::save_forecasts(m, dir + "/member_" + m.model_id + ".csv");
    epf::pipeline::detail::write_json(epf::pipeline::weights_report_json(cfg, outcome.result),
                                      dir + "/weights.json");

    json reports = json::array();
    reports.push_back(epf::pipeline::detail::eval_report_json(*outcome.result.test_eval));
    std::set<std::string> seen{outcome.result.combined.model_id};
    for (const auto& c : outcome.aligned)
        if (seen.insert(c.model_id).second)
            reports.push_back(epf::pipeline::detail::eval_report_json(
                epf::ensemble::evaluate(p.prices, epf::models::slice(c, cfg.test), cfg.test)));
    json rj;
    rj["test"] = {{"start", cfg.test.start.str()}, {"end", cfg.test.end.str()}};
    rj["reports"] = reports;
    epf::pipeline::detail::write_json(rj, dir + "/report.json");

    if (!outcome.result.component_curve.empty()) {
        epf::csv::Writer w(dir + "/component_curve.csv");
        w.row({"l", "validation_rmse", "status"});
        for (const auto& pt : outcome.result.component_curve)
            w.row({std::to_string(pt.l), pt.valid ? epf::csv::format_double(pt.rmse) : "",
                   pt.valid ? "ok" : pt.error});
    }
    std::printf("combined avg RMSE %.4f over %s..%s -> %s\n", outcome.result.test_eval->average,
                cfg.test.start.str().c_str(), cfg.test.end.str().c_str(), dir.c_str());
}

void cmd_robustness(const Globals& g, int n, long long seed, const std::string& window) {
    auto cfg = load_config(g);
    if (n > 0) cfg.robustness_n = n;
    if (seed >= 0) cfg.robustness_seed = static_cast<std::uint64_t>(seed);
    if (!window.empty()) {
        auto colon = window.find(':');
        if (colon == std::string::npos)
            throw epf::ValidationError("robustness: --window wants start:end");
        cfg.test = {epf::Date::parse(window.substr(0, colon)),
                    epf::Date::parse(window.substr(colon + 1))};
        cfg.test.check();
        if (!(cfg.train.end < cfg.test.start))
            throw epf::ValidationError("robustness: window must start after the training window");
    }
    auto p = load_panels(cfg);

    epf::reduce::PcaBasis basis;
    bool pca_built = false;
    if (cfg.method == epf::pipeline::CombineMethod::ss_pca) {
        basis = epf::reduce::fit_pca(
            epf::pipeline::detail::joint_matrix(p.prices, p.features, cfg.train),
            epf::pipeline::detail::joint_names(p.features), cfg.pca_standardize);
        pca_built = true;
    }
    epf::models::VarxForecaster varx;
    epf::models::NaiveSeasonalForecaster naive;
    auto candidates = epf::pipeline::detail::native_candidates(cfg, p.prices, p.features, varx);
    auto outcome = epf::pipeline::combine_with_method(cfg, p.prices, p.features,
                                                      pca_built ? &basis : nullptr, candidates);

    auto datasets = epf::robustness::resample_synthetic(p.prices, p.features, cfg.test,
                                                        cfg.robustness_n, cfg.robustness_seed);
    auto rebuild = epf::pipeline::make_rebuilder(cfg, outcome, varx, naive, basis, candidates);
    auto summary = epf::robustness::batch_evaluate(datasets, rebuild);

    std::string dir = stage_dir(g, "robustness");
    epf::pipeline::detail::write_robustness_outputs(summary, dir);
    std::printf("%d resampled dataset(s), %d ok -> %s\n", cfg.robustness_n, summary.n_ok, dir.c_str());
    for (std::size_t m = 0; m < summary.model_ids.size(); ++m)
        std::printf("  %-20s %.4f +- %.4f\n", summary.model_ids[m].c_str(),
                    summary.mean_average(static_cast<Eigen::Index>(m)),
                    summary.std_average(static_cast<Eigen::Index>(m)));
}

void cmd_run(const Globals& g) {
    auto cfg = load_config(g);
    auto res = epf::pipeline::run_pipeline(cfg, g.out_dir, make_logger(g));
    std::printf("run complete -> %s\n", g.out_dir.c_str());
    for (const auto& r : res.test_reports)
        std::printf("  %-20s avg RMSE %.4f (per-hour std %.4f)\n", r.model_id.c_str(), r.average,
                    r.std_across_hours);
    if (res.robustness_summary)
        std::printf("  robustness: %d dataset(s) ok\n", res.robustness_summary->n_ok);
}

}  // namespace

int main(int argc, char** argv) {
    Globals g;
    CLI::App app{"Day-ahead electricity price forecasting pipeline"};
    app.require_subcommand(1);
    app.add_option("--config", g.config_path, "Run configuration JSON");
    app.add_option("--out", g.out_dir, "Output directory (default: out)");
    app.add_option("--seed", g.seed, "Override the config's master seed");
    app.add_option("--log-level", g.log_level, "info or quiet")
        ->check(CLI::IsMember({"info", "quiet"}));

    auto* sim = app.add_subcommand("simulate", "Generate a synthetic market fixture");
    int sim_days = 1095;
    long long sim_seed = -1;
    double sim_strength = 1.0, sim_noise = 1.5;
    bool sim_spikes = false;
    std::string sim_start;
    sim->add_option("--days", sim_days, "Number of days (>= 400)");
    sim->add_option("--sim-seed", sim_seed, "Generator seed");
    sim->add_option("--driver-strength", sim_strength, "Scale of the planted driver effects");
    sim->add_option("--noise-sigma", sim_noise, "Price innovation scale");
    sim->add_flag("--spikes", sim_spikes, "Add occasional price spikes");
    sim->add_option("--start", sim_start, "First date (YYYY-MM-DD)");

    auto* ingest = app.add_subcommand("ingest", "Load, repair and re-emit the data panels");
    auto* charac = app.add_subcommand("characterize", "Stationarity and seasonality tests per hour");
    int calibrate_ch = 0, max_lag = 50;
    charac->add_option("--calibrate-ch", calibrate_ch, "Monte Carlo CH critical value (replications)");
    charac->add_option("--max-lag", max_lag, "ACF horizon");

    auto* decomp = app.add_subcommand("decompose", "Trend/seasonal/remainder split of one series");
    std::string selector = "vwasp";
    decomp->add_option("--series", selector, "vwasp, mean, hour<h> or feature:<name>");

    auto* drv = app.add_subcommand("drivers", "Cluster prices and identify significant drivers");
    auto* red = app.add_subcommand("reduce", "Fit the component basis and tune the retained count");

    auto* fit = app.add_subcommand("fit", "Fit one forecaster and emit its forecasts");
    std::string fit_model;
    int fit_pmax = -1, fit_qmax = -1, fit_lookback = 0, fit_components = 0;
    fit->add_option("--model", fit_model, "varx, reduced-linear or naive")->required();
    fit->add_option("--p-max", fit_pmax, "VARX AR order bound");
    fit->add_option("--q-max", fit_qmax, "VARX exogenous lag bound");
    fit->add_option("--lookback", fit_lookback, "Reduced-model lookback window");
    fit->add_option("--components", fit_components, "Retained components (0: all)");

    auto* comb = app.add_subcommand("combine", "Weight candidate forecasts and evaluate");
    std::string comb_method, comb_pooling;
    std::vector<std::string> comb_candidates;
    bool comb_clip = false;
    comb->add_option("--method", comb_method, "ss, ss-pca, simav, cls or irmse");
    comb->add_option("--candidates", comb_candidates,
                     "Forecast CSV paths or native ids (default: varx naive)");
    comb->add_option("--pooling", comb_pooling, "pooled or per-hour");
    comb->add_flag("--clip-simplex", comb_clip, "Clip negative weights to the simplex");

    auto* rob = app.add_subcommand("robustness", "Evaluate the combination on resampled datasets");
    int rob_n = 0;
    long long rob_seed = -1;
    std::string rob_window;
    rob->add_option("--n", rob_n, "Number of resampled datasets");
    rob->add_option("--resample-seed", rob_seed, "Resampling seed");
    rob->add_option("--window", rob_window, "Evaluation window start:end");

    auto* run = app.add_subcommand("run", "Full pipeline: ingest through robustness");

    for (auto* s : app.get_subcommands({})) s->fallthrough();

    sim->callback([&] { cmd_simulate(g, sim_days, sim_seed, sim_strength, sim_noise, sim_spikes, sim_start); });
    ingest->callback([&] { cmd_ingest(g); });
    charac->callback([&] { cmd_characterize(g, calibrate_ch, max_lag); });
    decomp->callback([&] { cmd_decompose(g, selector); });
    drv->callback([&] { cmd_drivers(g); });
    red->callback([&] { cmd_reduce(g); });
    fit->callback([&] { cmd_fit(g, fit_model, fit_pmax, fit_qmax, fit_lookback, fit_components); });
    comb->callback([&] { cmd_combine(g, comb_method, comb_candidates, comb_pooling, comb_clip); });
    rob->callback([&] { cmd_robustness(g, rob_n, rob_seed, rob_window); });
    run->callback([&] { cmd_run(g); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const epf::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
    return 0;
}
