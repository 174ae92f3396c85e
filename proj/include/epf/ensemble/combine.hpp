#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "epf/core/error.hpp"
#include "epf/ensemble/qp.hpp"
#include "epf/ensemble/shrinkage.hpp"
#include "epf/ensemble/types.hpp"
#include "epf/models/forecast_set.hpp"
#include "epf/panel/transforms.hpp"

namespace epf::ensemble {

inline ForecastSet combine(const std::vector<ForecastSet>& fs, const WeightVector& w,
                           const std::string& id) {
    if (fs.empty()) throw ValidationError("combine: no forecast sets");
    if (static_cast<Eigen::Index>(fs.size()) != w.omega.size())
        throw ValidationError("combine: weight length mismatch");
    w.check();
    for (std::size_t m = 0; m < fs.size(); ++m) {
        if (fs[m].model_id != w.model_ids[m])
            throw ValidationError("combine: weight order does not match forecast order");
        if (fs[m].dates != fs[0].dates)
            throw DataError("combine: forecast sets cover different dates");
    }
    ForecastSet out;
    out.model_id = id;
    out.dates = fs[0].dates;
    out.values = Eigen::MatrixXd::Zero(fs[0].values.rows(), kHours);
    for (std::size_t m = 0; m < fs.size(); ++m)
        out.values += w.omega(static_cast<Eigen::Index>(m)) * fs[m].values;
    out.check();
    return out;
}

// Per-hour weights: one weight vector per hour of the day.
inline ForecastSet combine_per_hour(const std::vector<ForecastSet>& fs,
                                    const std::vector<WeightVector>& w, const std::string& id) {
    if (static_cast<Eigen::Index>(w.size()) != kHours)
        throw ValidationError("combine_per_hour: expected one weight vector per hour");
    ForecastSet out;
    bool first = true;
    for (Eigen::Index h = 0; h < kHours; ++h) {
        ForecastSet col = combine(fs, w[static_cast<std::size_t>(h)], id);
        if (first) {
            out = col;
            first = false;
        }
        out.values.col(h) = col.values.col(h);
    }
    return out;
}

inline WeightVector equal_weights(const std::vector<ForecastSet>& fs) {
    if (fs.empty()) throw ValidationError("equal_weights: no forecast sets");
    WeightVector w;
    for (const auto& f : fs) w.model_ids.push_back(f.model_id);
    w.omega = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(fs.size()),
                                        1.0 / static_cast<double>(fs.size()));
    return w;
}

inline ForecastSet simav(const std::vector<ForecastSet>& fs) {
    return combine(fs, equal_weights(fs), "simav");
}

inline EvalReport evaluate(const PricePanel& actual, const ForecastSet& fs,
                           const DateWindow& window) {
    auto cube = detail::error_panels(actual, {fs}, window);
    const Eigen::MatrixXd& e = cube.front();
    EvalReport rep;
    rep.model_id = fs.model_id;
    rep.n_days = e.rows();
    rep.per_hour_rmse = e.array().square().colwise().mean().sqrt();
    rep.average = rep.per_hour_rmse.mean();
    rep.std_across_hours = sample_std(rep.per_hour_rmse);
    return rep;
}

// Weights proportional to inverse average RMSE. A model with zero error takes
// the whole weight (shared evenly if several are exact).
inline WeightVector irmse_weights(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw ValidationError("irmse_weights: no evaluations");
    WeightVector w;
    Eigen::VectorXd raw(static_cast<Eigen::Index>(reports.size()));
    std::vector<Eigen::Index> exact;
    for (std::size_t m = 0; m < reports.size(); ++m) {
        w.model_ids.push_back(reports[m].model_id);
        double r = reports[m].average;
        if (r < 0) throw ValidationError("irmse_weights: negative rmse");
        if (r == 0.0) exact.push_back(static_cast<Eigen::Index>(m));
        raw(static_cast<Eigen::Index>(m)) = r;
    }
    if (!exact.empty()) {
        w.omega = Eigen::VectorXd::Zero(raw.size());
        for (Eigen::Index i : exact) w.omega(i) = 1.0 / static_cast<double>(exact.size());
        return w;
    }
    w.omega = raw.cwiseInverse();
    w.omega /= w.omega.sum();
    return w;
}

// Constrained least squares: regress actual prices on the candidate forecasts
// with weights on the simplex.
inline WeightVector cls_weights(const PricePanel& actual, const std::vector<ForecastSet>& fs,
                                const DateWindow& window) {
    auto cube = detail::error_panels(actual, fs, window);
    Eigen::Index rows = cube.front().rows() * kHours;
    Eigen::Index k = static_cast<Eigen::Index>(fs.size());

    // || p - F w ||^2 with sum w = 1 is || E w ||^2 in the error panels, so the
    // Gram matrix of pooled errors drives the fit.
    Eigen::MatrixXd e(rows, k);
    for (Eigen::Index m = 0; m < k; ++m)
        e.col(m) = cube[static_cast<std::size_t>(m)].reshaped();

    WeightVector w;
    for (const auto& f : fs) w.model_ids.push_back(f.model_id);
    w.omega = simplex_quadratic(e.transpose() * e, Eigen::VectorXd::Zero(k));
    w.check(true);
    return w;
}

// Squared combined error split into average model error minus ambiguity,
// evaluated cell by cell over the window.
inline AmbiguityReport ambiguity_decomposition(const PricePanel& actual,
                                               const std::vector<ForecastSet>& fs,
                                               const WeightVector& w, const DateWindow& window) {
    if (static_cast<Eigen::Index>(fs.size()) != w.omega.size())
        throw ValidationError("ambiguity: weight length mismatch");
    w.check();
    auto cube = detail::error_panels(actual, fs, window);
    Eigen::Index days = cube.front().rows();

    AmbiguityReport rep;
    rep.combined_sq_error = Eigen::MatrixXd::Zero(days, kHours);
    rep.weighted_model_error = Eigen::MatrixXd::Zero(days, kHours);
    rep.weighted_ambiguity = Eigen::MatrixXd::Zero(days, kHours);

    Eigen::MatrixXd combined_err = Eigen::MatrixXd::Zero(days, kHours);
    for (std::size_t m = 0; m < fs.size(); ++m)
        combined_err += w.omega(static_cast<Eigen::Index>(m)) * cube[m];
    rep.combined_sq_error = combined_err.array().square();

    for (std::size_t m = 0; m < fs.size(); ++m) {
        double wk = w.omega(static_cast<Eigen::Index>(m));
        rep.weighted_model_error += wk * cube[m].array().square().matrix();
        // f_k - f_bar equals combined error minus model error.
        rep.weighted_ambiguity += wk * (combined_err - cube[m]).array().square().matrix();
    }

    rep.mean_combined = rep.combined_sq_error.mean();
    rep.mean_model_error = rep.weighted_model_error.mean();
    rep.mean_ambiguity = rep.weighted_ambiguity.mean();
    return rep;
}

struct SensitivityPoint {
    double delta = 0.0;
    double rmse = 0.0;
};

// Perturb one weight by +/- delta, renormalizing the rest proportionally, and
// re-evaluate; maps the flatness of the combination objective.
inline std::vector<SensitivityPoint> weight_sensitivity(const PricePanel& actual,
                                                        const std::vector<ForecastSet>& fs,
                                                        const WeightVector& w, Eigen::Index model,
                                                        const DateWindow& window,
                                                        const std::vector<double>& deltas) {
    if (model < 0 || model >= w.omega.size())
        throw ValidationError("weight_sensitivity: model index out of range");
    std::vector<SensitivityPoint> out;
    for (double d : deltas) {
        WeightVector wp = w;
        double target = w.omega(model) + d;
        double rest = 1.0 - w.omega(model);
        wp.omega(model) = target;
        if (std::abs(rest) > 1e-14) {
            double scale = (1.0 - target) / rest;
            for (Eigen::Index j = 0; j < wp.omega.size(); ++j)
                if (j != model) wp.omega(j) = w.omega(j) * scale;
        } else {
            double share = (1.0 - target) / static_cast<double>(w.omega.size() - 1);
            for (Eigen::Index j = 0; j < wp.omega.size(); ++j)
                if (j != model) wp.omega(j) = share;
        }
        ForecastSet c = combine(fs, wp, "sensitivity");
        out.push_back({d, evaluate(actual, c, window).average});
    }
    return out;
}

}  // namespace epf::ensemble
