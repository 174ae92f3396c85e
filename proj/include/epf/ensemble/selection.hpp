#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "epf/core/error.hpp"
#include "epf/ensemble/combine.hpp"
#include "epf/ensemble/qp.hpp"
#include "epf/ensemble/shrinkage.hpp"
#include "epf/ensemble/types.hpp"

namespace epf::ensemble {

struct SelectionResult {
    WeightVector qp_weights;            // simplex least-squares over every candidate
    std::vector<std::string> selected;  // ids whose weight clears the threshold
    double threshold = 0.0;
};

// Stage one: constrained least squares on the simplex, then keep the models
// whose weight exceeds the threshold.
inline SelectionResult select_models(const PricePanel& actual, const std::vector<ForecastSet>& fs,
                                     const DateWindow& window, double threshold = 1e-3) {
    if (!(threshold > 0.0 && threshold < 1.0 / static_cast<double>(std::max<std::size_t>(fs.size(), 1))))
        throw ValidationError("select_models: threshold must lie in (0, 1/n)");
    SelectionResult out;
    out.threshold = threshold;
    out.qp_weights = cls_weights(actual, fs, window);
    for (Eigen::Index m = 0; m < out.qp_weights.omega.size(); ++m)
        if (out.qp_weights.omega(m) > threshold)
            out.selected.push_back(out.qp_weights.model_ids[static_cast<std::size_t>(m)]);
    if (out.selected.empty())
        throw NumericalError("select_models: no model cleared the threshold");
    return out;
}

struct ComponentSearch {
    std::vector<Eigen::Index> candidates;
    // Rebuild the dimension-reduced forecaster with l components, fitting on
    // the first window. The returned set must cover both windows: in-sample
    // forecasts over `fit` feed selection and covariance estimation, the
    // `predict` part is what gets combined.
    std::function<ForecastSet(Eigen::Index l, DateWindow fit, DateWindow predict)> refit;
};

struct ComponentPoint {
    Eigen::Index l = 0;
    double rmse = 0.0;
    bool valid = false;
    std::string error;
};

struct SsOptions {
    double selection_threshold = 1e-3;
    Pooling pooling = Pooling::pooled;
    bool clip_simplex = false;
    double validation_fraction = 0.2;
    std::string combined_id = "combined-ss";
};

struct SsResult {
    SelectionResult selection;
    ErrorCovariance covariance;              // over the selected models, full training window
    WeightVector weights;                    // pooled shrinkage weights
    std::vector<WeightVector> weights_by_hour;
    bool covariance_repaired = false;
    bool clipped = false;
    std::vector<ForecastSet> members;        // selected models over the test window
    ForecastSet combined;                    // over the test window
    std::optional<EvalReport> test_eval;     // present when actuals cover the test window
    std::optional<Eigen::Index> l_star;
    std::vector<ComponentPoint> component_curve;
};

namespace detail {

inline std::pair<DateWindow, DateWindow> split_validation_tail(DateWindow train, double fraction) {
    train.check();
    int len = train.length();
    int val = std::max(1, static_cast<int>(std::llround(len * fraction)));
    if (len - val < 2)
        throw ValidationError("selection-shrinkage: training window too short to hold out a "
                              "validation tail");
    DateWindow est{train.start, train.start + (len - val - 1)};
    DateWindow tail{train.start + (len - val), train.end};
    return {est, tail};
}

inline std::vector<ForecastSet> keep_selected(const std::vector<ForecastSet>& fs,
                                              const std::vector<std::string>& ids) {
    std::set<std::string> want(ids.begin(), ids.end());
    std::vector<ForecastSet> out;
    for (const auto& f : fs)
        if (want.count(f.model_id)) out.push_back(f);
    return out;
}

// Selection, covariance and shrinkage on `fit`, combination over `predict`.
inline SsResult ss_core(const PricePanel& actual, const std::vector<ForecastSet>& fs,
                        const DateWindow& fit, const DateWindow& predict, const SsOptions& opt) {
    SsResult out;
    out.selection = select_models(actual, fs, fit, opt.selection_threshold);
    std::vector<ForecastSet> kept = keep_selected(fs, out.selection.selected);

    std::vector<ForecastSet> kept_predict;
    for (const auto& f : kept) kept_predict.push_back(models::slice(f, predict));

    out.covariance = error_covariance(actual, kept, fit, opt.pooling);
    if (opt.pooling == Pooling::pooled) {
        MevSolution mev = mev_weights(out.covariance, opt.clip_simplex);
        out.weights = mev.weights;
        out.covariance_repaired = mev.repaired;
        out.clipped = mev.clipped;
        out.combined = combine(kept_predict, out.weights, opt.combined_id);
    } else {
        out.weights_by_hour.resize(kHours);
        for (int h = 0; h < kHours; ++h) {
            ErrorCovariance one;
            one.model_ids = out.covariance.model_ids;
            one.pooling = Pooling::pooled;
            one.sigma = out.covariance.by_hour[static_cast<std::size_t>(h)];
            one.n_samples = out.covariance.n_samples;
            one.window = out.covariance.window;
            MevSolution mev = mev_weights(one, opt.clip_simplex);
            out.weights_by_hour[static_cast<std::size_t>(h)] = mev.weights;
            out.covariance_repaired = out.covariance_repaired || mev.repaired;
            out.clipped = out.clipped || mev.clipped;
        }
        out.weights = out.weights_by_hour.front();
        out.combined = combine_per_hour(kept_predict, out.weights_by_hour, opt.combined_id);
    }
    if (actual.row_of(predict.start) >= 0 && actual.row_of(predict.end) >= 0)
        out.test_eval = evaluate(actual, out.combined, predict);
    out.members = std::move(kept_predict);
    return out;
}

}  // namespace detail

// Selection then shrinkage over a fixed candidate set.
inline SsResult run_selection_shrinkage(const PricePanel& actual,
                                        const std::vector<ForecastSet>& candidates,
                                        const DateWindow& train, const DateWindow& test,
                                        const SsOptions& opt = {}) {
    train.check();
    test.check();
    if (!(train.end < test.start))
        throw ValidationError("selection-shrinkage: training window must precede the test window");
    return detail::ss_core(actual, candidates, train, test, opt);
}

// Joint search over the number of retained components and the combination
// weights. Each candidate l is scored by refitting the reduced model on the
// head of the training window and measuring combined RMSE on the held-out
// tail; the smallest l attaining the minimum wins and the final model is
// refit on the full training window.
inline SsResult run_selection_shrinkage(const PricePanel& actual,
                                        const std::vector<ForecastSet>& candidates,
                                        const DateWindow& train, const DateWindow& test,
                                        const ComponentSearch& search, const SsOptions& opt = {}) {
    train.check();
    test.check();
    if (!(train.end < test.start))
        throw ValidationError("selection-shrinkage: training window must precede the test window");
    if (search.candidates.empty() || !search.refit)
        throw ValidationError("selection-shrinkage: empty component search");

    auto [est, tail] = detail::split_validation_tail(train, opt.validation_fraction);

    std::vector<ComponentPoint> curve;
    bool any_valid = false;
    Eigen::Index l_star = 0;
    double best = 0.0;
    for (Eigen::Index l : search.candidates) {
        ComponentPoint pt;
        pt.l = l;
        try {
            ForecastSet reduced = search.refit(l, est, tail);
            std::vector<ForecastSet> with = candidates;
            with.push_back(reduced);
            SsResult val = detail::ss_core(actual, with, est, tail, opt);
            if (!val.test_eval)
                throw DataError("component search: no actuals over the validation tail");
            pt.rmse = val.test_eval->average;
            pt.valid = true;
        } catch (const Error& e) {
            pt.error = e.what();
        }
        if (pt.valid && (!any_valid || pt.rmse < best - 1e-12 ||
                         (pt.rmse <= best + 1e-12 && l < l_star))) {
            any_valid = true;
            best = pt.rmse;
            l_star = l;
        }
        curve.push_back(std::move(pt));
    }
    if (!any_valid)
        throw NumericalError("component search: every candidate failed");

    ForecastSet reduced = search.refit(l_star, train, test);
    std::vector<ForecastSet> with = candidates;
    with.push_back(reduced);
    SsResult out = detail::ss_core(actual, with, train, test, opt);
    out.l_star = l_star;
    out.component_curve = std::move(curve);
    return out;
}

}  // namespace epf::ensemble
