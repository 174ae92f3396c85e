#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epf/core/csv.hpp"
#include "epf/drivers/pipeline.hpp"
#include "epf/ensemble/selection.hpp"
#include "epf/models/reduced_linear.hpp"
#include "epf/models/varx.hpp"
#include "epf/pipeline/config.hpp"
#include "epf/pipeline/manifest.hpp"
#include "epf/reduce/pca.hpp"
#include "epf/robustness/batch.hpp"
#include "epf/robustness/resample.hpp"
#include "epf/stats/acf.hpp"
#include "epf/stats/adf.hpp"
#include "epf/stats/ch.hpp"
#include "epf/stats/kpss.hpp"

namespace epf::pipeline {

using LogFn = std::function<void(const std::string&)>;

struct RunResult {
    RunManifest manifest;
    RepairLog repairs;
    drivers::DriverPipelineResult driver_result;
    ensemble::SsResult combined;
    std::vector<ensemble::EvalReport> test_reports;  // combined first, then members
    std::optional<robustness::BatchSummary> robustness_summary;
};

namespace detail {

inline void log_to(const LogFn& log, const std::string& msg) {
    if (log) log(msg);
}

inline std::string ensure_dir(const std::string& out_root, const std::string& stage) {
    std::filesystem::path p = std::filesystem::path(out_root) / stage;
    std::filesystem::create_directories(p);
    return p.string();
}

inline void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("pipeline: cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

inline json weight_json(const ensemble::WeightVector& w) {
    json j = json::object();
    for (Eigen::Index m = 0; m < w.omega.size(); ++m)
        j[w.model_ids[static_cast<std::size_t>(m)]] = w.omega(m);
    return j;
}

// Joint [price hours | features] rows over a window, the PCA input.
inline Eigen::MatrixXd joint_matrix(const PricePanel& prices, const FeatureMatrix& features,
                                    DateWindow w) {
    auto pw = epf::slice(prices, w);
    int f0 = features.row_of(w.start), f1 = features.row_of(w.end);
    if (f0 < 0 || f1 < 0) throw DataError("pipeline: features do not cover " + w.start.str() +
                                          ".." + w.end.str());
    Eigen::MatrixXd joint(pw.days(), kHours + features.n_features());
    joint.leftCols(kHours) = pw.values;
    joint.rightCols(features.n_features()) = features.values.middleRows(f0, f1 - f0 + 1);
    return joint;
}

inline std::vector<std::string> joint_names(const FeatureMatrix& features) {
    std::vector<std::string> names;
    for (int h = 0; h < kHours; ++h) names.push_back("h" + std::to_string(h));
    for (const auto& n : features.names) names.push_back(n);
    return names;
}

inline FeatureMatrix score_matrix(const reduce::PcaBasis& basis, const PricePanel& prices,
                                  const FeatureMatrix& features, DateWindow w, Eigen::Index l) {
    FeatureMatrix scores;
    for (Date d = w.start; d <= w.end; ++d) scores.dates.push_back(d);
    for (Eigen::Index c = 0; c < l; ++c) scores.names.push_back("pc" + std::to_string(c + 1));
    scores.values = reduce::project(basis, joint_matrix(prices, features, w), l);
    scores.check();
    return scores;
}

inline json eval_report_json(const ensemble::EvalReport& r) {
    json j;
    j["model"] = r.model_id;
    j["avg_rmse"] = r.average;
    j["std_rmse"] = r.std_across_hours;
    j["n_days"] = r.n_days;
    json ph = json::array();
    for (Eigen::Index h = 0; h < r.per_hour_rmse.size(); ++h) ph.push_back(r.per_hour_rmse(h));
    j["per_hour_rmse"] = ph;
    return j;
}

inline json drivers_report_json(const drivers::DriverPipelineResult& dr, double alpha) {
    json j;
    j["elbow_k"] = dr.elbow.k;
    j["inertias"] = dr.elbow.inertias;
    {
        json cs = json::array();
        for (Eigen::Index c = 0; c < dr.clusters.centroids.size(); ++c) cs.push_back(dr.clusters.centroids(c));
        j["centroids"] = cs;
    }
    j["alpha"] = alpha;
    json regs = json::array();
    for (const auto& rep : dr.regressions) {
        json r;
        r["cluster"] = rep.cluster;
        r["n_obs"] = rep.n_obs;
        r["r2_uncentered"] = rep.r2_uncentered;
        r["covariance"] = rep.covariance;
        json terms = json::array();
        for (const auto& t : rep.terms) {
            json e;
            e["feature"] = t.feature;
            e["lag"] = t.lag;
            e["estimate"] = t.stat.estimate;
            e["std_error"] = t.stat.std_error;
            e["t_stat"] = t.stat.t_stat;
            e["p_value"] = t.stat.p_value;
            e["significant"] = t.stat.p_value < alpha;
            terms.push_back(e);
        }
        r["terms"] = terms;
        regs.push_back(r);
    }
    j["regressions"] = regs;
    json ds = json::array();
    for (const auto& f : dr.drivers.ordered_features) ds.push_back(f);
    j["drivers"] = ds;
    json by = json::object();
    for (const auto& [cluster, names] : dr.drivers.by_cluster) {
        json arr = json::array();
        for (const auto& n : names) arr.push_back(n);
        by[std::to_string(cluster)] = arr;
    }
    j["by_cluster"] = by;
    return j;
}

inline std::vector<std::string> write_driver_outputs(const drivers::DriverPipelineResult& dr,
                                                     double alpha, const std::string& dir) {
    {
        csv::Writer w(dir + "/clusters.csv");
        w.row({"date", "cluster", "vwasp"});
        for (Eigen::Index i = 0; i < dr.system_price.size(); ++i)
            w.row({dr.system_price.dates[static_cast<std::size_t>(i)].str(),
                   std::to_string(dr.clusters.assignments[static_cast<std::size_t>(i)]),
                   csv::format_double(dr.system_price.values(i))});
    }
    {
        csv::Writer w(dir + "/regressions.csv");
        w.row({"cluster", "feature", "lag", "estimate", "std_error", "t_stat", "p_value"});
        for (const auto& rep : dr.regressions)
            for (const auto& term : rep.terms)
                w.row({std::to_string(rep.cluster), term.feature, std::to_string(term.lag),
                       csv::format_double(term.stat.estimate), csv::format_double(term.stat.std_error),
                       csv::format_double(term.stat.t_stat), csv::format_double(term.stat.p_value)});
    }
    write_json(drivers_report_json(dr, alpha), dir + "/drivers.json");
    return {dir + "/clusters.csv", dir + "/regressions.csv", dir + "/drivers.json"};
}

inline std::vector<std::string> write_robustness_outputs(const robustness::BatchSummary& s,
                                                         const std::string& dir) {
    {
        std::vector<std::string> header = {"model", "mean_avg_rmse", "std_avg_rmse"};
        for (int h = 0; h < kHours; ++h) header.push_back("h" + std::to_string(h));
        csv::Writer w(dir + "/table.csv");
        w.row(header);
        for (std::size_t m = 0; m < s.model_ids.size(); ++m) {
            std::vector<std::string> row = {
                s.model_ids[m], csv::format_double(s.mean_average(static_cast<Eigen::Index>(m))),
                csv::format_double(s.std_average(static_cast<Eigen::Index>(m)))};
            for (int h = 0; h < kHours; ++h)
                row.push_back(csv::format_double(s.mean_per_hour(static_cast<Eigen::Index>(m), h)));
            w.row(row);
        }
    }
    {
        csv::Writer w(dir + "/datasets.csv");
        w.row({"dataset", "status", "error"});
        for (const auto& item : s.items)
            w.row({std::to_string(item.dataset), item.ok ? "ok" : "failed", item.error});
    }
    return {dir + "/table.csv", dir + "/datasets.csv"};
}

inline json varx_model_json(const models::VarxForecaster& varx) {
    json j;
    j["p"] = varx.model().p;
    j["q"] = varx.model().q;
    j["bic"] = varx.model().bic;
    if (varx.selection()) {
        json t = json::array();
        for (const auto& [p, q, bic] : varx.selection()->bic_table) {
            json e;
            e["p"] = p;
            e["q"] = q;
            e["bic"] = bic;
            t.push_back(e);
        }
        j["bic_table"] = t;
    }
    return j;
}

// Fits the VARX model and gathers every fixed candidate with in-sample and
// test coverage. The naive forecaster starts one season in; VARX once its
// longest lag is available.
inline std::vector<models::ForecastSet> native_candidates(const RunConfig& cfg,
                                                          const PricePanel& prices,
                                                          const FeatureMatrix& features,
                                                          models::VarxForecaster& varx) {
    varx.fit_auto(prices, features, cfg.train, cfg.varx_p_max, cfg.varx_q_max);
    models::NaiveSeasonalForecaster naive;
    Date varx_first = cfg.train.start + 7 + varx.model().p;
    std::vector<models::ForecastSet> candidates;
    candidates.push_back(varx.forecast(prices, features, DateWindow{varx_first, cfg.test.end}));
    candidates.push_back(naive.forecast(prices, DateWindow{cfg.train.start + 7, cfg.test.end}));
    for (const auto& path : cfg.external_forecast_paths)
        candidates.push_back(models::load_external_forecasts(path, cfg.train.end));
    return candidates;
}

// The reduced model's refit hook for the component search. Captures the basis
// and panels by reference; keep them alive for the search's duration.
inline ensemble::ComponentSearch make_component_search(const RunConfig& cfg,
                                                       const reduce::PcaBasis& basis,
                                                       const PricePanel& prices,
                                                       const FeatureMatrix& features) {
    ensemble::ComponentSearch search;
    int l_hi = cfg.l_max > 0 ? std::min<int>(cfg.l_max, static_cast<int>(basis.n_components()))
                             : static_cast<int>(basis.n_components());
    for (int l = cfg.l_min; l <= l_hi; l += cfg.l_step) search.candidates.push_back(l);
    int lookback = cfg.lookback;
    search.refit = [&basis, &prices, &features, lookback](Eigen::Index l, DateWindow fit,
                                                          DateWindow predict) {
        DateWindow need{fit.start - lookback, predict.end};
        FeatureMatrix scores = score_matrix(basis, prices, features, need, l);
        models::ReducedLinearOptions opt;
        opt.lookback = lookback;
        models::ReducedLinearForecaster rl(opt);
        rl.fit(scores, prices, fit);
        return rl.forecast(scores, DateWindow{fit.start, predict.end});
    };
    return search;
}

}  // namespace detail

// Everything the combination step produces, plus what the robustness batch
// later needs to rebuild member forecasts on resampled data.
struct CombineOutcome {
    ensemble::SsResult result;
    DateWindow ens_train;
    ensemble::SsOptions sopt;
    std::vector<models::ForecastSet> aligned;  // candidates sliced to ens_train.start..test.end
    models::ReducedLinearForecaster reduced;   // fitted only on the ss-pca path
};

// Dispatch on the configured combination method. `basis` may be null for
// every method except ss-pca. Candidate sets must cover the test window and
// reach back far enough into training for weight estimation.
inline CombineOutcome combine_with_method(const RunConfig& cfg, const PricePanel& prices,
                                          const FeatureMatrix& features,
                                          const reduce::PcaBasis* basis,
                                          const std::vector<models::ForecastSet>& candidates) {
    if (candidates.empty()) throw ValidationError("combine: no candidate forecasts");
    if (cfg.method == CombineMethod::ss_pca && basis == nullptr)
        throw ValidationError("combine: ss-pca needs a fitted component basis");

    CombineOutcome out;
    Date ens_start = cfg.train.start;
    for (const auto& c : candidates) ens_start = std::max(ens_start, c.dates.front());
    if (cfg.method == CombineMethod::ss_pca)
        ens_start = std::max(ens_start, cfg.train.start + cfg.lookback);
    out.ens_train = DateWindow{ens_start, cfg.train.end};
    if (out.ens_train.length() < 30)
        throw DataError("combine: fewer than 30 usable ensemble training days");

    for (const auto& c : candidates)
        out.aligned.push_back(models::slice(c, DateWindow{out.ens_train.start, cfg.test.end}));

    out.sopt.selection_threshold = cfg.selection_threshold;
    out.sopt.pooling = cfg.per_hour ? ensemble::Pooling::per_hour : ensemble::Pooling::pooled;
    out.sopt.clip_simplex = cfg.clip_simplex;
    out.sopt.combined_id = std::string("combined-") + to_string(cfg.method);

    models::ReducedLinearOptions rl_opt;
    rl_opt.lookback = cfg.lookback;
    out.reduced = models::ReducedLinearForecaster(rl_opt);

    switch (cfg.method) {
        case CombineMethod::ss:
            out.result =
                ensemble::run_selection_shrinkage(prices, out.aligned, out.ens_train, cfg.test, out.sopt);
            break;
        case CombineMethod::ss_pca: {
            ensemble::ComponentSearch search = detail::make_component_search(cfg, *basis, prices, features);
            out.result = ensemble::run_selection_shrinkage(prices, out.aligned, out.ens_train, cfg.test,
                                                           search, out.sopt);
            if (out.result.l_star) {
                DateWindow need{out.ens_train.start - cfg.lookback, cfg.test.end};
                FeatureMatrix scores =
                    detail::score_matrix(*basis, prices, features, need, *out.result.l_star);
                out.reduced.fit(scores, prices, out.ens_train);
            }
            break;
        }
        case CombineMethod::simav: {
            std::vector<models::ForecastSet> members;
            for (const auto& c : out.aligned) members.push_back(models::slice(c, cfg.test));
            out.result.weights = ensemble::equal_weights(out.aligned);
            out.result.combined = ensemble::combine(members, out.result.weights, out.sopt.combined_id);
            out.result.members = std::move(members);
            break;
        }
        case CombineMethod::cls: {
            std::vector<models::ForecastSet> members;
            for (const auto& c : out.aligned) members.push_back(models::slice(c, cfg.test));
            out.result.weights = ensemble::cls_weights(prices, out.aligned, out.ens_train);
            out.result.combined = ensemble::combine(members, out.result.weights, out.sopt.combined_id);
            out.result.members = std::move(members);
            break;
        }
        case CombineMethod::irmse: {
            std::vector<models::ForecastSet> members;
            std::vector<ensemble::EvalReport> reports;
            for (const auto& c : out.aligned) {
                members.push_back(models::slice(c, cfg.test));
                reports.push_back(ensemble::evaluate(prices, c, out.ens_train));
            }
            out.result.weights = ensemble::irmse_weights(reports);
            out.result.combined = ensemble::combine(members, out.result.weights, out.sopt.combined_id);
            out.result.members = std::move(members);
            break;
        }
    }
    if (!out.result.test_eval)
        out.result.test_eval = ensemble::evaluate(prices, out.result.combined, cfg.test);
    return out;
}

inline json weights_report_json(const RunConfig& cfg, const ensemble::SsResult& r) {
    json j;
    j["method"] = to_string(cfg.method);
    j["pooling"] = cfg.per_hour ? "per-hour" : "pooled";
    if (!r.selection.selected.empty()) j["selected"] = r.selection.selected;
    j["weights"] = detail::weight_json(r.weights);
    if (cfg.per_hour && !r.weights_by_hour.empty()) {
        json hours = json::array();
        for (const auto& w : r.weights_by_hour) hours.push_back(detail::weight_json(w));
        j["weights_by_hour"] = hours;
    }
    if (r.l_star) j["l_star"] = *r.l_star;
    j["clip_simplex"] = r.clipped;
    j["covariance_repaired"] = r.covariance_repaired;
    return j;
}

// Rebuild hook for the resampling batch: member forecasts are regenerated on
// each resampled panel with the models and weights fixed at their original
// fits. External candidates have no model to re-drive, so their stored
// forecasts stay as they are. Every reference argument must outlive the
// returned callable.
inline std::function<std::vector<ensemble::EvalReport>(const robustness::ResampledDataset&, std::size_t)>
make_rebuilder(const RunConfig& cfg, const CombineOutcome& outcome,
               const models::VarxForecaster& varx, const models::NaiveSeasonalForecaster& naive,
               const reduce::PcaBasis& basis, const std::vector<models::ForecastSet>& candidates) {
    Eigen::Index l_sel = outcome.result.l_star ? *outcome.result.l_star : 0;
    return [&cfg, &outcome, &varx, &naive, &basis, &candidates,
            l_sel](const robustness::ResampledDataset& ds, std::size_t) {
        std::vector<models::ForecastSet> members;
        for (const auto& id : outcome.result.weights.model_ids) {
            if (id == varx.id())
                members.push_back(varx.forecast(ds.prices, ds.features, cfg.test));
            else if (id == naive.id())
                members.push_back(naive.forecast(ds.prices, cfg.test));
            else if (id == outcome.reduced.id() && l_sel > 0) {
                DateWindow need{cfg.test.start - cfg.lookback, cfg.test.end};
                FeatureMatrix scores = detail::score_matrix(basis, ds.prices, ds.features, need, l_sel);
                members.push_back(outcome.reduced.forecast(scores, cfg.test));
            } else {
                bool found = false;
                for (const auto& c : candidates)
                    if (c.model_id == id) {
                        members.push_back(models::slice(c, cfg.test));
                        found = true;
                    }
                if (!found) throw DataError("robustness: no source for model '" + id + "'");
            }
        }
        models::ForecastSet comb =
            (cfg.per_hour && !outcome.result.weights_by_hour.empty())
                ? ensemble::combine_per_hour(members, outcome.result.weights_by_hour,
                                             outcome.sopt.combined_id)
                : ensemble::combine(members, outcome.result.weights, outcome.sopt.combined_id);
        std::vector<ensemble::EvalReport> reports;
        reports.push_back(ensemble::evaluate(ds.prices, comb, cfg.test));
        for (const auto& m : members) reports.push_back(ensemble::evaluate(ds.prices, m, cfg.test));
        return reports;
    };
}

// The full flow: ingest, characterize, drivers, reduce, fit, combine,
// evaluate, and optionally the resampling robustness batch. Every stage
// persists its outputs under out_root/<stage>/ and registers them in the
// manifest.
inline RunResult run_pipeline(const RunConfig& cfg, const std::string& out_root,
                              const LogFn& log = {}) {
    namespace fs = std::filesystem;
    RunResult res;
    res.manifest.config = cfg.raw;
    res.manifest.seed = cfg.seed;
    StageTimer timer;
    auto emit = [&](const std::string& path) { res.manifest.add_output(path, out_root); };

    // ---- ingest ----
    timer.start("ingest");
    detail::log_to(log, "ingest: loading panels");
    res.manifest.add_input(cfg.prices_path);
    res.manifest.add_input(cfg.volumes_path);
    res.manifest.add_input(cfg.features_path);
    for (const auto& p : cfg.external_forecast_paths) res.manifest.add_input(p);

    PricePanel prices = load_price_panel(cfg.prices_path, res.repairs);
    VolumePanel volumes = load_volume_panel(cfg.volumes_path, res.repairs);
    FeatureMatrix features = load_features(cfg.features_path, res.repairs);
    if (prices.dates != volumes.dates || prices.dates != features.dates)
        throw DataError("pipeline: price, volume and feature files cover different dates");
    if (prices.row_of(cfg.train.start) < 0 || prices.row_of(cfg.test.end) < 0)
        throw DataError("pipeline: data does not cover the configured windows");

    std::string ingest_dir = detail::ensure_dir(out_root, "ingest");
    save_hourly_panel(prices, ingest_dir + "/prices.csv");
    save_hourly_panel(volumes, ingest_dir + "/volumes.csv");
    save_features(features, ingest_dir + "/features.csv");
    {
        csv::Writer w(ingest_dir + "/repairs.csv");
        w.row({"date", "hour", "action", "detail"});
        for (const auto& e : res.repairs.entries)
            w.row({e.date.str(), std::to_string(e.hour), e.action, e.detail});
    }
    emit(ingest_dir + "/prices.csv");
    emit(ingest_dir + "/volumes.csv");
    emit(ingest_dir + "/features.csv");
    emit(ingest_dir + "/repairs.csv");
    timer.stop();

    PricePanel train_prices = epf::slice(prices, cfg.train);

    // ---- characterize ----
    timer.start("characterize");
    detail::log_to(log, "characterize: descriptive statistics and stationarity tests");
    std::string ch_dir = detail::ensure_dir(out_root, "characterize");
    {
        auto stats_rows = descriptive_stats(train_prices);
        csv::Writer w(ch_dir + "/hour_stats.csv");
        w.row({"hour", "mean", "std", "min", "q25", "median", "q75", "max"});
        for (int h = 0; h < kHours; ++h) {
            const auto& s = stats_rows[static_cast<std::size_t>(h)];
            w.row({std::to_string(h), csv::format_double(s.mean), csv::format_double(s.stddev),
                   csv::format_double(s.min), csv::format_double(s.q25), csv::format_double(s.median),
                   csv::format_double(s.q75), csv::format_double(s.max)});
        }
    }
    {
        csv::Writer w(ch_dir + "/stationarity.csv");
        w.row({"hour", "adf_stat", "adf_decision", "kpss_stat", "kpss_decision", "ch_stat", "ch_decision"});
        for (int h = 0; h < kHours; ++h) {
            Eigen::VectorXd y = train_prices.values.col(h);
            auto adf = stats::adf_test(y);
            auto kpss = stats::kpss_test(y);
            auto ch = stats::ch_test(y, 7);
            w.row({std::to_string(h), csv::format_double(adf.statistic), to_string(adf.decision),
                   csv::format_double(kpss.statistic), to_string(kpss.decision),
                   csv::format_double(ch.l_statistic), to_string(ch.decision)});
        }
    }
    DailySeries vwasp_train = vwap(train_prices, epf::slice(volumes, cfg.train));
    {
        auto a = stats::acf(vwasp_train.values, std::min<int>(50, static_cast<int>(vwasp_train.size()) / 4));
        csv::Writer w(ch_dir + "/acf_vwasp.csv");
        w.row({"lag", "acf", "conf_band"});
        for (Eigen::Index i = 0; i < a.values.size(); ++i)
            w.row({std::to_string(i), csv::format_double(a.values(i)), csv::format_double(a.conf_band)});
    }
    emit(ch_dir + "/hour_stats.csv");
    emit(ch_dir + "/stationarity.csv");
    emit(ch_dir + "/acf_vwasp.csv");
    timer.stop();

    // ---- drivers ----
    timer.start("drivers");
    detail::log_to(log, "drivers: clustering, residualization and cluster regressions");
    drivers::DriverConfig dcfg;
    dcfg.k_max = cfg.k_max;
    dcfg.kmeans_seed = derive_seed(cfg.seed, "kmeans", 0);
    dcfg.alpha = cfg.alpha;
    dcfg.day_d_features = cfg.day_d_features;
    dcfg.periods = cfg.mstd_periods;
    dcfg.sarima_grid = cfg.sarima_grid;
    dcfg.mstd_options = cfg.mstd_options;
    res.driver_result = drivers::run_driver_pipeline(train_prices, epf::slice(volumes, cfg.train),
                                                     [&] {
                                                         FeatureMatrix f = features;
                                                         int i0 = f.row_of(cfg.train.start);
                                                         int i1 = f.row_of(cfg.train.end);
                                                         f.values = features.values.middleRows(i0, i1 - i0 + 1);
                                                         f.dates.assign(features.dates.begin() + i0,
                                                                        features.dates.begin() + i1 + 1);
                                                         return f;
                                                     }(),
                                                     dcfg);

    std::string dr_dir = detail::ensure_dir(out_root, "drivers");
    for (const auto& p : detail::write_driver_outputs(res.driver_result, cfg.alpha, dr_dir)) emit(p);
    timer.stop();

    // ---- reduce ----
    reduce::PcaBasis basis;
    bool pca_built = false;
    if (cfg.method == CombineMethod::ss_pca) {
        timer.start("reduce");
        detail::log_to(log, "reduce: fitting the joint PCA basis");
        basis = reduce::fit_pca(detail::joint_matrix(prices, features, cfg.train),
                                detail::joint_names(features), cfg.pca_standardize);
        pca_built = true;
        std::string rd_dir = detail::ensure_dir(out_root, "reduce");
        reduce::save_pca(basis, rd_dir + "/basis.csv");
        {
            DateWindow full{cfg.train.start, cfg.test.end};
            FeatureMatrix scores =
                detail::score_matrix(basis, prices, features, full, basis.n_components());
            save_features(scores, rd_dir + "/scores.csv");
        }
        emit(rd_dir + "/basis.csv");
        emit(rd_dir + "/scores.csv");
        timer.stop();
    }

    // ---- fit ----
    timer.start("fit");
    detail::log_to(log, "fit: native forecasters");
    models::VarxForecaster varx;
    models::NaiveSeasonalForecaster naive;
    std::vector<models::ForecastSet> candidates = detail::native_candidates(cfg, prices, features, varx);

    std::string fit_dir = detail::ensure_dir(out_root, "fit");
    for (const auto& c : candidates) {
        models::save_forecasts(c, fit_dir + "/forecasts_" + c.model_id + ".csv");
        emit(fit_dir + "/forecasts_" + c.model_id + ".csv");
    }
    detail::write_json(detail::varx_model_json(varx), fit_dir + "/varx.json");
    emit(fit_dir + "/varx.json");
    timer.stop();

    // ---- combine ----
    timer.start("combine");
    detail::log_to(log, std::string("combine: method ") + to_string(cfg.method));
    CombineOutcome outcome =
        combine_with_method(cfg, prices, features, pca_built ? &basis : nullptr, candidates);
    res.combined = outcome.result;

    std::string cb_dir = detail::ensure_dir(out_root, "combine");
    models::save_forecasts(res.combined.combined, cb_dir + "/combined.csv");
    for (const auto& m : res.combined.members) {
        models::save_forecasts(m, cb_dir + "/member_" + m.model_id + ".csv");
        emit(cb_dir + "/member_" + m.model_id + ".csv");
    }
    detail::write_json(weights_report_json(cfg, res.combined), cb_dir + "/weights.json");
    emit(cb_dir + "/combined.csv");
    emit(cb_dir + "/weights.json");
    if (!res.combined.component_curve.empty()) {
        csv::Writer w(cb_dir + "/component_curve.csv");
        w.row({"l", "validation_rmse", "status"});
        for (const auto& pt : res.combined.component_curve)
            w.row({std::to_string(pt.l), pt.valid ? csv::format_double(pt.rmse) : "",
                   pt.valid ? "ok" : pt.error});
        emit(cb_dir + "/component_curve.csv");
    }
    timer.stop();

    // ---- evaluate ----
    timer.start("evaluate");
    detail::log_to(log, "evaluate: test-window reports");
    res.test_reports.push_back(*res.combined.test_eval);
    std::set<std::string> reported{res.combined.combined.model_id};
    for (const auto& m : res.combined.members)
        if (reported.insert(m.model_id).second)
            res.test_reports.push_back(ensemble::evaluate(prices, m, cfg.test));
    for (const auto& c : outcome.aligned)
        if (reported.insert(c.model_id).second)
            res.test_reports.push_back(ensemble::evaluate(prices, models::slice(c, cfg.test), cfg.test));

    std::string ev_dir = detail::ensure_dir(out_root, "evaluate");
    {
        std::vector<std::string> header = {"model", "avg_rmse", "std_rmse"};
        for (int h = 0; h < kHours; ++h) header.push_back("h" + std::to_string(h));
        csv::Writer w(ev_dir + "/report.csv");
        w.row(header);
        for (const auto& r : res.test_reports) {
            std::vector<std::string> row = {r.model_id, csv::format_double(r.average),
                                            csv::format_double(r.std_across_hours)};
            for (int h = 0; h < kHours; ++h) row.push_back(csv::format_double(r.per_hour_rmse(h)));
            w.row(row);
        }
    }
    if (!cfg.per_hour) {
        auto amb = ensemble::ambiguity_decomposition(prices, res.combined.members,
                                                     res.combined.weights, cfg.test);
        csv::Writer w(ev_dir + "/ambiguity.csv");
        w.row({"date", "combined_sq_error", "weighted_model_error", "weighted_ambiguity"});
        for (Eigen::Index i = 0; i < amb.combined_sq_error.rows(); ++i)
            w.row({(cfg.test.start + static_cast<int>(i)).str(),
                   csv::format_double(amb.combined_sq_error.row(i).mean()),
                   csv::format_double(amb.weighted_model_error.row(i).mean()),
                   csv::format_double(amb.weighted_ambiguity.row(i).mean())});
        emit(ev_dir + "/ambiguity.csv");
    }
    emit(ev_dir + "/report.csv");
    timer.stop();

    // ---- robustness ----
    if (cfg.robustness_enabled) {
        timer.start("robustness");
        detail::log_to(log, "robustness: resampled evaluation batch");
        auto datasets = robustness::resample_synthetic(prices, features, cfg.test,
                                                       cfg.robustness_n, cfg.robustness_seed);

        auto rebuild = make_rebuilder(cfg, outcome, varx, naive, basis, candidates);
        res.robustness_summary = robustness::batch_evaluate(datasets, rebuild);

        std::string rb_dir = detail::ensure_dir(out_root, "robustness");
        for (const auto& p : detail::write_robustness_outputs(*res.robustness_summary, rb_dir)) emit(p);
        timer.stop();
    }

    res.manifest.stage_seconds = timer.timings();
    res.manifest.write((fs::path(out_root) / "manifest.json").string());
    return res;
}

}  // namespace epf::pipeline
