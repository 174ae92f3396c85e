#pragma once

#include <Eigen/Eigenvalues>
#include <optional>
#include <sstream>
#include <vector>

#include "epf/core/optim.hpp"
#include "epf/decomp/mstd.hpp"
#include "epf/stats/ols.hpp"

namespace epf::decomp {

struct SarimaOrder {
    int p = 0, d = 0, q = 0;
    int P = 0, D = 0, Q = 0;
    int s = 7;

    int n_coefficients() const { return p + q + P + Q; }

    std::string str() const {
        std::ostringstream os;
        os << "(" << p << "," << d << "," << q << ")(" << P << "," << D << "," << Q << ")[" << s << "]";
        return os.str();
    }
};

struct SarimaFit {
    SarimaOrder order;
    bool include_mean = true;
    double mu = 0.0;
    Eigen::VectorXd phi, theta, sphi, stheta;
    double sigma2 = 0.0;
    double loglik = 0.0, aic = 0.0, bic = 0.0;
    Eigen::VectorXd residuals;    // length = input length - d - s*D
    Eigen::Index n_conditioning = 0;  // leading residuals computed with a truncated recursion
};

namespace detail {

// all reciprocal roots strictly inside the unit circle
inline bool poly_stable(const Eigen::VectorXd& coef, double margin = 1e-6) {
    Eigen::Index m = coef.size();
    while (m > 0 && std::abs(coef(m - 1)) < 1e-14) --m;
    if (m == 0) return true;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    companion.row(0) = coef.head(m).transpose();
    for (Eigen::Index i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
    Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(companion, false).eigenvalues();
    return (ev.array().abs() < 1.0 - margin).all();
}

// (1 - sum a_i B^i)(1 - sum b_j B^{s j}) -> combined lag coefficients
inline Eigen::VectorXd expand_product(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int s,
                                      double sign) {
    // sign +1: both polynomials of form 1 - sum; result coefficients c with
    // poly = 1 - sum c_k B^k. sign -1: form 1 + sum (moving-average side).
    Eigen::Index la = a.size(), lb = b.size();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(la + s * lb);
    for (Eigen::Index i = 0; i < la; ++i) c(i) += a(i);
    for (Eigen::Index j = 0; j < lb; ++j) c(s * (j + 1) - 1) += b(j);
    for (Eigen::Index i = 0; i < la; ++i)
        for (Eigen::Index j = 0; j < lb; ++j) c(i + s * (j + 1)) -= sign * a(i) * b(j);
    return c;
}

inline Eigen::VectorXd difference(const Eigen::VectorXd& y, int lag, int times) {
    Eigen::VectorXd w = y;
    for (int k = 0; k < times; ++k) {
        if (w.size() <= lag) throw DataError("sarima: series exhausted by differencing");
        w = (w.tail(w.size() - lag) - w.head(w.size() - lag)).eval();
    }
    return w;
}

struct CssWork {
    Eigen::VectorXd w;  // differenced series
    SarimaOrder order;
    bool include_mean;
    Eigen::Index t0;    // objective skips the conditioning range

    struct Params {
        double mu;
        Eigen::VectorXd phi, theta, sphi, stheta;
    };

    Params unpack(const Eigen::VectorXd& x) const {
        Params p;
        Eigen::Index at = 0;
        p.mu = include_mean ? x(at++) : 0.0;
        auto take = [&](int len) {
            Eigen::VectorXd v = x.segment(at, len);
            at += len;
            return v;
        };
        p.phi = take(order.p);
        p.theta = take(order.q);
        p.sphi = take(order.P);
        p.stheta = take(order.Q);
        return p;
    }

    Eigen::VectorXd residuals(const Params& p) const {
        Eigen::VectorXd ar = expand_product(p.phi, p.sphi, order.s, +1.0);
        Eigen::VectorXd ma = expand_product(p.theta, p.stheta, order.s, -1.0);
        Eigen::Index n = w.size();
        Eigen::VectorXd c = w.array() - p.mu;
        Eigen::VectorXd eps(n);
        for (Eigen::Index t = 0; t < n; ++t) {
            double v = c(t);
            for (Eigen::Index j = 0; j < ar.size() && j < t; ++j) v -= ar(j) * c(t - j - 1);
            for (Eigen::Index j = 0; j < ma.size() && j < t; ++j) v -= ma(j) * eps(t - j - 1);
            eps(t) = v;
        }
        return eps;
    }

    double objective(const Eigen::VectorXd& x) const {
        Params p = unpack(x);
        if (!poly_stable(p.phi) || !poly_stable(p.sphi) || !poly_stable(-p.theta) ||
            !poly_stable(-p.stheta))
            return std::numeric_limits<double>::infinity();
        Eigen::VectorXd eps = residuals(p);
        return eps.tail(eps.size() - t0).squaredNorm();
    }
};

inline Eigen::VectorXd shrink_until_stable(Eigen::VectorXd v, bool ma) {
    for (int i = 0; i < 60 && !poly_stable(ma ? Eigen::VectorXd(-v) : v); ++i) v *= 0.9;
    if (!poly_stable(ma ? Eigen::VectorXd(-v) : v)) v.setZero();
    return v;
}

// OLS on own lags for starting AR values; moving-average terms start at zero.
inline Eigen::VectorXd sarima_init(const CssWork& work) {
    const auto& o = work.order;
    Eigen::Index n = work.w.size();
    double mean = work.w.mean();
    Eigen::VectorXd x0(static_cast<Eigen::Index>(work.include_mean) + o.n_coefficients());
    x0.setZero();
    if (work.include_mean) x0(0) = mean;
    if (o.p + o.P == 0) return x0;

    std::vector<int> lags;
    for (int i = 1; i <= o.p; ++i) lags.push_back(i);
    for (int I = 1; I <= o.P; ++I) lags.push_back(o.s * I);
    int maxlag = lags.back();
    if (n <= maxlag + static_cast<Eigen::Index>(lags.size()) + 2) return x0;

    Eigen::MatrixXd X(n - maxlag, static_cast<Eigen::Index>(lags.size()));
    Eigen::VectorXd yv(n - maxlag);
    Eigen::VectorXd c = work.w.array() - mean;
    for (Eigen::Index t = maxlag; t < n; ++t) {
        yv(t - maxlag) = c(t);
        for (std::size_t j = 0; j < lags.size(); ++j)
            X(t - maxlag, static_cast<Eigen::Index>(j)) = c(t - lags[j]);
    }
    Eigen::VectorXd beta;
    try {
        beta = stats::ols(X, yv).beta;
    } catch (const Error&) {
        return x0;
    }
    Eigen::Index at = work.include_mean ? 1 : 0;
    x0.segment(at, o.p) = shrink_until_stable(beta.head(o.p), false);
    if (o.P > 0) x0.segment(at + o.p + o.q, o.P) = shrink_until_stable(beta.tail(o.P), false);
    return x0;
}

}  // namespace detail

// Conditional sum of squares fit. The recursion treats pre-sample values as
// zero; the first p + s*P residuals carry that transient and are excluded
// from the objective (and from sigma2 / likelihood). `min_conditioning`
// widens that exclusion so fits of different orders can share an objective
// sample; order selection relies on it.
inline SarimaFit fit_sarima(const Eigen::VectorXd& y, SarimaOrder order, bool include_mean = true,
                            Eigen::Index min_conditioning = 0) {
    if (order.p < 0 || order.d < 0 || order.q < 0 || order.P < 0 || order.D < 0 || order.Q < 0 ||
        order.s < 1)
        throw ValidationError("sarima: negative order component");
    if ((order.P > 0 || order.Q > 0 || order.D > 0) && y.size() < 3 * order.s)
        throw DataError("sarima: seasonal terms need at least three seasons of data");

    detail::CssWork work;
    work.w = detail::difference(detail::difference(y, 1, order.d), order.s, order.D);
    work.order = order;
    work.include_mean = include_mean;
    work.t0 = std::max<Eigen::Index>(order.p + static_cast<Eigen::Index>(order.s) * order.P,
                                     min_conditioning);
    Eigen::Index n_obj = work.w.size() - work.t0;
    if (n_obj < order.n_coefficients() + (include_mean ? 1 : 0) + 4)
        throw DataError("sarima: too few observations for order " + order.str());

    Eigen::VectorXd x0 = detail::sarima_init(work);
    Eigen::VectorXd best_x = x0;
    double best_f;
    if (x0.size() == 0 || order.n_coefficients() == 0) {
        // pure mean model: closed form
        if (include_mean) best_x(0) = work.w.mean();
        best_f = work.objective(best_x);
    } else {
        auto obj = [&work](const Eigen::VectorXd& x) { return work.objective(x); };
        if (!std::isfinite(work.objective(x0))) x0.setZero();  // re-seed from the white-noise point
        auto r1 = nelder_mead(obj, x0);
        auto r2 = nelder_mead(obj, r1.x);  // one restart from the incumbent
        best_x = r2.value <= r1.value ? r2.x : r1.x;
        best_f = std::min(r1.value, r2.value);
        if (!std::isfinite(best_f))
            throw NumericalError("sarima: no stationary and invertible optimum found for " + order.str());
    }

    auto params = work.unpack(best_x);
    SarimaFit fit;
    fit.order = order;
    fit.include_mean = include_mean;
    fit.mu = params.mu;
    fit.phi = params.phi;
    fit.theta = params.theta;
    fit.sphi = params.sphi;
    fit.stheta = params.stheta;
    fit.residuals = work.residuals(params);
    fit.n_conditioning = work.t0;
    fit.sigma2 = best_f / static_cast<double>(n_obj);
    fit.loglik = -0.5 * static_cast<double>(n_obj) * (std::log(2.0 * M_PI * fit.sigma2) + 1.0);
    double k = order.n_coefficients() + (include_mean ? 1 : 0) + 1;  // + sigma2
    fit.aic = -2.0 * fit.loglik + 2.0 * k;
    fit.bic = -2.0 * fit.loglik + k * std::log(static_cast<double>(n_obj));
    return fit;
}

struct SarimaGrid {
    int p_max = 3, q_max = 3, P_max = 1, Q_max = 1;
    int d = 0, D = 0, s = 7;
};

struct SarimaSelection {
    SarimaFit best;
    std::vector<std::pair<SarimaOrder, double>> aic_table;  // order -> AIC (inf where the fit failed)
};

// AIC minimization over the order grid; ties go to fewer coefficients, then
// lexicographic (p, q, P, Q). Candidates share one conditioning region (the
// largest in the grid) so their likelihoods cover the same observations; the
// winning order is refit with its natural conditioning.
inline SarimaSelection select_sarima_order(const Eigen::VectorXd& y, SarimaGrid grid = {},
                                           bool include_mean = true) {
    SarimaSelection sel;
    Eigen::Index common = grid.p_max + static_cast<Eigen::Index>(grid.s) * grid.P_max;
    std::optional<SarimaOrder> best;
    double best_aic = std::numeric_limits<double>::infinity();
    auto better = [&](const SarimaOrder& cand, double aic) {
        if (!best) return true;
        if (aic < best_aic - 1e-9) return true;
        if (aic > best_aic + 1e-9) return false;
        auto key = [](const SarimaOrder& o) {
            return std::make_tuple(o.n_coefficients(), o.p, o.q, o.P, o.Q);
        };
        return key(cand) < key(*best);
    };
    std::string failures;
    for (int p = 0; p <= grid.p_max; ++p)
        for (int q = 0; q <= grid.q_max; ++q)
            for (int P = 0; P <= grid.P_max; ++P)
                for (int Q = 0; Q <= grid.Q_max; ++Q) {
                    SarimaOrder o{p, grid.d, q, P, grid.D, Q, grid.s};
                    try {
                        SarimaFit f = fit_sarima(y, o, include_mean, common);
                        sel.aic_table.emplace_back(o, f.aic);
                        if (better(o, f.aic)) {
                            best = o;
                            best_aic = f.aic;
                        }
                    } catch (const Error& e) {
                        sel.aic_table.emplace_back(o, std::numeric_limits<double>::infinity());
                        failures += o.str() + ": " + e.what() + "; ";
                    }
                }
    if (!best) throw NumericalError("sarima selection: every candidate order failed (" + failures + ")");
    sel.best = fit_sarima(y, *best, include_mean);
    return sel;
}

struct ResidualizeResult {
    MstdResult decomposition;
    SarimaFit sarima;
    DailySeries residuals;
};

// Strip seasonal structure, then whiten what remains with the AIC-selected
// model; the residual series is what drivers regressions consume.
inline ResidualizeResult residualize(const DailySeries& series, const std::vector<int>& periods,
                                     SarimaGrid grid = {}, MstdOptions mstd_opt = {}) {
    ResidualizeResult out;
    out.decomposition = mstd(series, periods, mstd_opt);
    Eigen::VectorXd deseasonalized = out.decomposition.trend.values + out.decomposition.remainder.values;
    out.sarima = select_sarima_order(deseasonalized, grid).best;
    // Entries inside the conditioning region lean on zero-initialized lags and
    // carry no information, so they are cut from the aligned residual series.
    Eigen::Index skip =
        series.size() - out.sarima.residuals.size() + out.sarima.n_conditioning;
    out.residuals.dates.assign(series.dates.begin() + skip, series.dates.end());
    out.residuals.values = out.sarima.residuals.tail(out.sarima.residuals.size() -
                                                     out.sarima.n_conditioning);
    out.residuals.name = series.name + "_resid";
    return out;
}

}  // namespace epf::decomp
