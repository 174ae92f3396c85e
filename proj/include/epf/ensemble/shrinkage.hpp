#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "epf/core/error.hpp"
#include "epf/ensemble/qp.hpp"
#include "epf/ensemble/types.hpp"
#include "epf/models/forecast_set.hpp"
#include "epf/panel/types.hpp"

namespace epf::ensemble {

namespace detail {

// days x models matrix of errors for one hour, plus the model order.
inline void check_alignment(const PricePanel& actual, const std::vector<ForecastSet>& fs,
                            const DateWindow& window) {
    if (fs.empty()) throw ValidationError("ensemble: no forecast sets supplied");
    if (actual.row_of(window.start) < 0 || actual.row_of(window.end) < 0)
        throw DataError("ensemble: actual prices do not cover " + window.start.str() + ".." +
                        window.end.str());
    for (const auto& f : fs)
        if (f.row_of(window.start) < 0 || f.row_of(window.end) < 0)
            throw DataError("ensemble: model '" + f.model_id + "' does not cover " +
                            window.start.str() + ".." + window.end.str());
}

// Error cube: e(k) is a (days x kHours) matrix of actual - forecast.
inline std::vector<Eigen::MatrixXd> error_panels(const PricePanel& actual,
                                                 const std::vector<ForecastSet>& fs,
                                                 const DateWindow& window) {
    check_alignment(actual, fs, window);
    Eigen::Index days = window.length();
    std::vector<Eigen::MatrixXd> out;
    out.reserve(fs.size());
    for (const auto& f : fs) {
        Eigen::MatrixXd e(days, kHours);
        for (Eigen::Index i = 0; i < days; ++i) {
            Date d = window.start + static_cast<std::int32_t>(i);
            e.row(i) = actual.values.row(actual.row_of(d)) - f.values.row(f.row_of(d));
        }
        out.push_back(std::move(e));
    }
    return out;
}

inline Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& obs) {
    Eigen::Index n = obs.rows();
    if (n < 2) throw DataError("error covariance: fewer than 2 observations");
    Eigen::MatrixXd centered = obs.rowwise() - obs.colwise().mean();
    return (centered.transpose() * centered) / static_cast<double>(n - 1);
}

}  // namespace detail

inline ErrorCovariance error_covariance(const PricePanel& actual, const std::vector<ForecastSet>& fs,
                                        const DateWindow& window, Pooling pooling = Pooling::pooled) {
    window.check();
    auto cube = detail::error_panels(actual, fs, window);
    Eigen::Index k = static_cast<Eigen::Index>(fs.size());
    Eigen::Index days = window.length();

    ErrorCovariance out;
    for (const auto& f : fs) out.model_ids.push_back(f.model_id);
    out.pooling = pooling;
    out.window = window;

    if (pooling == Pooling::pooled) {
        Eigen::MatrixXd obs(days * kHours, k);
        for (Eigen::Index m = 0; m < k; ++m)
            obs.col(m) = cube[static_cast<std::size_t>(m)].reshaped();
        out.sigma = detail::sample_covariance(obs);
        out.n_samples = obs.rows();
    } else {
        out.by_hour.resize(kHours);
        for (Eigen::Index h = 0; h < kHours; ++h) {
            Eigen::MatrixXd obs(days, k);
            for (Eigen::Index m = 0; m < k; ++m)
                obs.col(m) = cube[static_cast<std::size_t>(m)].col(h);
            out.by_hour[static_cast<std::size_t>(h)] = detail::sample_covariance(obs);
        }
        out.n_samples = days;
    }
    return out;
}

namespace detail {

// Solve sigma * x = rhs, applying a small diagonal repair if the factorization
// fails or the residual shows the matrix is effectively singular.
inline Eigen::VectorXd solve_spd(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& rhs,
                                 bool* repaired = nullptr) {
    auto attempt = [&](const Eigen::MatrixXd& m, Eigen::VectorXd& x) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
        if (ldlt.info() != Eigen::Success) return false;
        x = ldlt.solve(rhs);
        double rel = (m * x - rhs).norm() / std::max(1e-300, rhs.norm());
        return rel < 1e-8;
    };
    Eigen::VectorXd x;
    if (attempt(sigma, x)) {
        if (repaired) *repaired = false;
        return x;
    }
    double delta = 1e-8 * sigma.diagonal().mean();
    if (!(delta > 0)) delta = 1e-12;
    Eigen::MatrixXd fixed = sigma;
    fixed.diagonal().array() += delta;
    if (attempt(fixed, x)) {
        if (repaired) *repaired = true;
        return x;
    }
    throw NumericalError("covariance solve failed even after diagonal repair");
}

}  // namespace detail

struct MevSolution {
    WeightVector weights;
    double variance = 0.0;
    bool repaired = false;
    bool clipped = false;
};

// Global minimum-variance combination. Weights may be negative; when
// clip_to_simplex is set, the exact constrained minimizer is used instead and
// the flag records that clipping changed the solution.
inline MevSolution mev_weights(const ErrorCovariance& cov, bool clip_to_simplex = false) {
    if (cov.pooling != Pooling::pooled)
        throw ValidationError("mev_weights: pass one pooled covariance (per-hour handled by caller)");
    Eigen::Index n = cov.sigma.rows();
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    MevSolution out;
    out.weights.model_ids = cov.model_ids;
    Eigen::VectorXd u = detail::solve_spd(cov.sigma, ones, &out.repaired);
    double c = ones.dot(u);
    if (!(c > 0))
        throw NumericalError("mev_weights: 1' sigma^-1 1 is not positive");
    out.weights.omega = u / c;
    out.variance = 1.0 / c;

    if (clip_to_simplex && (out.weights.omega.array() < -1e-12).any()) {
        out.weights.omega = simplex_min_variance(cov.sigma);
        out.variance = out.weights.omega.dot(cov.sigma * out.weights.omega);
        out.clipped = true;
    }
    out.weights.check(clip_to_simplex);
    return out;
}

// Mean-error frontier: minimum variance subject to a target combined mean
// error. e holds the per-model mean errors over the estimation window.
inline FrontierSolution frontier_weights(const ErrorCovariance& cov, const Eigen::VectorXd& e,
                                         double e_star) {
    if (cov.pooling != Pooling::pooled)
        throw ValidationError("frontier_weights: requires a pooled covariance");
    Eigen::Index n = cov.sigma.rows();
    if (e.size() != n) throw ValidationError("frontier_weights: mean error length mismatch");
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    Eigen::VectorXd si_one = detail::solve_spd(cov.sigma, ones);
    Eigen::VectorXd si_e = detail::solve_spd(cov.sigma, e);

    FrontierSolution out;
    out.a = ones.dot(si_e);
    out.b = e.dot(si_e);
    out.c = ones.dot(si_one);
    out.d = out.b * out.c - out.a * out.a;
    out.target_mean_error = e_star;

    if (out.d <= 1e-10 * std::max(std::abs(out.b * out.c), 1e-300))
        throw DegenerateFrontierError("frontier: B*C - A^2 is numerically zero (identical mean errors)");

    out.weights.model_ids = cov.model_ids;
    out.weights.omega =
        (out.b * si_one - out.a * si_e + e_star * (out.c * si_e - out.a * si_one)) / out.d;
    out.variance = (out.b - 2.0 * e_star * out.a + e_star * e_star * out.c) / out.d;
    out.weights.check();
    return out;
}

inline Eigen::VectorXd mean_errors(const PricePanel& actual, const std::vector<ForecastSet>& fs,
                                   const DateWindow& window) {
    auto cube = detail::error_panels(actual, fs, window);
    Eigen::VectorXd e(static_cast<Eigen::Index>(cube.size()));
    for (std::size_t m = 0; m < cube.size(); ++m)
        e(static_cast<Eigen::Index>(m)) = cube[m].mean();
    return e;
}

}  // namespace epf::ensemble
