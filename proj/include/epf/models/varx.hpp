#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "epf/models/forecast_set.hpp"
#include "epf/panel/transforms.hpp"

namespace epf::models {

// VAR with exogenous lags, estimated equation by equation (shared design, one
// least-squares solve for all equations).
struct VarxModel {
    int p = 0, q = 0;
    Eigen::VectorXd mu;
    std::vector<Eigen::MatrixXd> A;  // endogenous lag matrices, A[i] for lag i+1
    std::vector<Eigen::MatrixXd> B;  // exogenous lag matrices, B[j] for lag j+1
    Eigen::MatrixXd residual_cov;
    double bic = 0.0;
    Eigen::Index t_effective = 0;

    Eigen::Index dim() const { return mu.size(); }

    void check() const {
        Eigen::Index m = mu.size();
        if (static_cast<int>(A.size()) != p || static_cast<int>(B.size()) != q)
            throw NumericalError("varx model: lag matrix count mismatch");
        for (const auto& a : A)
            if (a.rows() != m || a.cols() != m) throw NumericalError("varx model: A dimension mismatch");
        for (const auto& b : B)
            if (b.rows() != m) throw NumericalError("varx model: B dimension mismatch");
        if (residual_cov.rows() != m || residual_cov.cols() != m ||
            !residual_cov.isApprox(residual_cov.transpose(), 1e-8))
            throw NumericalError("varx model: residual covariance not symmetric");
    }
};

namespace varx_detail {

struct CoreFit {
    VarxModel model;
    Eigen::MatrixXd residuals;
};

// `conditioning` pins the first regression row so fits with different lag
// orders can be compared on one sample.
inline CoreFit fit_core(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, int p, int q,
                        Eigen::Index conditioning = -1) {
    if (p < 0 || q < 0) throw ValidationError("varx: negative lag order");
    Eigen::Index t_all = y.rows(), m = y.cols(), n = x.cols();
    if (q > 0 && x.rows() != t_all) throw DataError("varx: endogenous/exogenous row mismatch");
    Eigen::Index lead = std::max<Eigen::Index>({p, q > 0 ? q : 0, conditioning});
    Eigen::Index t_eff = t_all - lead;
    Eigen::Index cols = 1 + m * p + n * q;
    if (t_eff <= cols)
        throw DataError("varx(p=" + std::to_string(p) + ",q=" + std::to_string(q) + "): " +
                        std::to_string(t_eff) + " usable rows for " + std::to_string(cols) +
                        " regressors");

    Eigen::MatrixXd Z(t_eff, cols);
    for (Eigen::Index i = 0; i < t_eff; ++i) {
        Eigen::Index t = lead + i;
        Eigen::Index c = 0;
        Z(i, c++) = 1.0;
        for (int lag = 1; lag <= p; ++lag) {
            Z.row(i).segment(c, m) = y.row(t - lag);
            c += m;
        }
        for (int lag = 1; lag <= q; ++lag) {
            Z.row(i).segment(c, n) = x.row(t - lag);
            c += n;
        }
    }
    Eigen::MatrixXd target = y.bottomRows(t_eff);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    if (qr.rank() < cols)
        throw NumericalError("varx: collinear design (rank " + std::to_string(qr.rank()) + " of " +
                             std::to_string(cols) + ")");
    Eigen::MatrixXd coef = qr.solve(target);  // cols x m

    CoreFit out;
    out.model.p = p;
    out.model.q = q;
    out.model.mu = coef.row(0).transpose();
    Eigen::Index c = 1;
    for (int lag = 1; lag <= p; ++lag) {
        out.model.A.push_back(coef.middleRows(c, m).transpose());
        c += m;
    }
    for (int lag = 1; lag <= q; ++lag) {
        out.model.B.push_back(coef.middleRows(c, n).transpose());
        c += n;
    }
    out.residuals = target - Z * coef;
    out.model.residual_cov = out.residuals.transpose() * out.residuals / static_cast<double>(t_eff);
    out.model.t_effective = t_eff;

    Eigen::LLT<Eigen::MatrixXd> llt(out.model.residual_cov +
                                    1e-12 * Eigen::MatrixXd::Identity(m, m));
    if (llt.info() != Eigen::Success) throw NumericalError("varx: residual covariance not PSD");
    double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    double k = static_cast<double>(m) * static_cast<double>(cols);
    out.model.bic = static_cast<double>(t_eff) * logdet + k * std::log(static_cast<double>(t_eff));
    return out;
}

inline Eigen::VectorXd predict_core(const VarxModel& model, const Eigen::MatrixXd& y_hist,
                                    const Eigen::MatrixXd& x_hist) {
    Eigen::Index m = model.dim();
    if (y_hist.rows() < model.p) throw DataError("varx predict: insufficient endogenous history");
    if (model.q > 0 && x_hist.rows() < model.q)
        throw DataError("varx predict: insufficient exogenous history");
    Eigen::VectorXd out = model.mu;
    for (int lag = 1; lag <= model.p; ++lag)
        out += model.A[static_cast<std::size_t>(lag - 1)] * y_hist.row(y_hist.rows() - lag).transpose();
    for (int lag = 1; lag <= model.q; ++lag)
        out += model.B[static_cast<std::size_t>(lag - 1)] * x_hist.row(x_hist.rows() - lag).transpose();
    if (out.size() != m) throw NumericalError("varx predict: dimension error");
    return out;
}

struct OrderSelection {
    int p = 0, q = 0;
    std::vector<std::tuple<int, int, double>> bic_table;
};

// BIC over the (p, q) grid on a common estimation sample; ties prefer fewer
// total lags, then smaller p, then smaller q.
inline OrderSelection select_core(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x, int p_max,
                                  int q_max) {
    if (p_max < 0 || q_max < 0) throw ValidationError("varx selection: negative grid bound");
    OrderSelection sel;
    Eigen::Index conditioning = std::max(p_max, q_max);
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    auto better = [&](int p, int q, double bic) {
        if (!found) return true;
        if (bic < best - 1e-9) return true;
        if (bic > best + 1e-9) return false;
        return std::make_tuple(p + q, p, q) < std::make_tuple(sel.p + sel.q, sel.p, sel.q);
    };
    for (int p = 0; p <= p_max; ++p)
        for (int q = 0; q <= q_max; ++q) {
            double bic;
            try {
                bic = fit_core(y, x, p, q, conditioning).model.bic;
            } catch (const Error&) {
                bic = std::numeric_limits<double>::infinity();
                sel.bic_table.emplace_back(p, q, bic);
                continue;
            }
            sel.bic_table.emplace_back(p, q, bic);
            if (better(p, q, bic)) {
                best = bic;
                sel.p = p;
                sel.q = q;
                found = true;
            }
        }
    if (!found) throw NumericalError("varx selection: every candidate order failed");
    return sel;
}

}  // namespace varx_detail

// Panel-level model: weekly-differenced prices on weekly-differenced
// features, forecasts inverted through the actual price seven days earlier.
class VarxForecaster {
public:
    VarxForecaster() = default;

    void fit(const PricePanel& prices, const FeatureMatrix& features, DateWindow train, int p, int q) {
        auto pw = epf::slice(prices, train);
        Eigen::MatrixXd y = diff_rows(pw.values);
        Eigen::MatrixXd x;
        if (q > 0) {
            auto fw = slice_features(features, train);
            x = diff_rows(fw);
        }
        fit_ = varx_detail::fit_core(y, x, p, q).model;
        fit_->check();
        fitted_ = true;
    }

    void fit_auto(const PricePanel& prices, const FeatureMatrix& features, DateWindow train, int p_max,
                  int q_max) {
        auto pw = epf::slice(prices, train);
        Eigen::MatrixXd y = diff_rows(pw.values);
        Eigen::MatrixXd x;
        if (q_max > 0) x = diff_rows(slice_features(features, train));
        auto sel = varx_detail::select_core(y, x, p_max, q_max);
        fit(prices, features, train, sel.p, sel.q);
        selection_ = sel;
    }

    bool fitted() const { return fitted_; }
    std::string id() const { return "varx"; }
    std::string input_kind() const { return "prices+features"; }
    const VarxModel& model() const { return require_fit(); }
    const std::optional<varx_detail::OrderSelection>& selection() const { return selection_; }

    // One-day-ahead forecasts for each target day, conditioning on actual
    // history up to the previous day.
    ForecastSet forecast(const PricePanel& prices, const FeatureMatrix& features,
                         DateWindow target) const {
        const VarxModel& m = require_fit();
        ForecastSet fs;
        fs.model_id = id();
        int lag_need = m.p + 7;  // differenced lags reach p + 7 days back
        Eigen::MatrixXd vals(target.length(), kHours);
        for (Date d = target.start; d <= target.end; ++d) {
            int row = prices.row_of(d - 1);
            if (row < 0 || prices.row_of(d - lag_need) < 0)
                throw DataError("varx forecast: price history missing before " + d.str());
            Eigen::MatrixXd y_hist(m.p, kHours);
            for (int lag = 1; lag <= m.p; ++lag)
                y_hist.row(m.p - lag) = prices.values.row(prices.row_of(d - lag)) -
                                        prices.values.row(prices.row_of(d - lag - 7));
            Eigen::MatrixXd x_hist;
            if (m.q > 0) {
                x_hist.resize(m.q, features.n_features());
                for (int lag = 1; lag <= m.q; ++lag) {
                    int fr = features.row_of(d - lag), fr7 = features.row_of(d - lag - 7);
                    if (fr < 0 || fr7 < 0)
                        throw DataError("varx forecast: feature history missing before " + d.str());
                    x_hist.row(m.q - lag) = features.values.row(fr) - features.values.row(fr7);
                }
            }
            Eigen::VectorXd zeta = varx_detail::predict_core(m, y_hist, x_hist);
            vals.row(d - target.start) =
                prices.values.row(prices.row_of(d - 7)) + zeta.transpose();
            fs.dates.push_back(d);
        }
        fs.values = std::move(vals);
        fs.check();
        return fs;
    }

private:
    static Eigen::MatrixXd diff_rows(const Eigen::MatrixXd& v) {
        if (v.rows() <= 7) throw DataError("varx: training window shorter than the weekly lag");
        return v.bottomRows(v.rows() - 7) - v.topRows(v.rows() - 7);
    }

    static Eigen::MatrixXd slice_features(const FeatureMatrix& f, DateWindow w) {
        int i0 = f.row_of(w.start), i1 = f.row_of(w.end);
        if (i0 < 0 || i1 < 0)
            throw DataError("varx: features do not cover " + w.start.str() + ".." + w.end.str());
        return f.values.middleRows(i0, i1 - i0 + 1);
    }

    const VarxModel& require_fit() const {
        if (!fitted_) throw ValidationError("varx: predict before fit");
        return *fit_;
    }

    std::optional<VarxModel> fit_;
    std::optional<varx_detail::OrderSelection> selection_;
    bool fitted_ = false;
};

// Order search on whole panels, mostly useful for poking at the BIC table
// without building a forecaster.
inline varx_detail::OrderSelection select_varx_order(const PricePanel& prices,
                                                     const FeatureMatrix& features, int p_max,
                                                     int q_max) {
    if (prices.values.rows() <= 7) throw DataError("varx: panel shorter than the weekly lag");
    Eigen::MatrixXd y =
        prices.values.bottomRows(prices.values.rows() - 7) - prices.values.topRows(prices.values.rows() - 7);
    Eigen::MatrixXd x;
    if (q_max > 0) {
        if (features.values.rows() != prices.values.rows())
            throw DataError("varx: price and feature panels differ in length");
        x = features.values.bottomRows(features.values.rows() - 7) -
            features.values.topRows(features.values.rows() - 7);
    }
    return varx_detail::select_core(y, x, p_max, q_max);
}

// p_{d-7} carried forward.
class NaiveSeasonalForecaster {
public:
    std::string id() const { return "naive"; }
    std::string input_kind() const { return "prices"; }
    bool fitted() const { return true; }

    ForecastSet forecast(const PricePanel& prices, DateWindow target) const {
        ForecastSet fs;
        fs.model_id = id();
        fs.values.resize(target.length(), kHours);
        for (Date d = target.start; d <= target.end; ++d) {
            int row = prices.row_of(d - 7);
            if (row < 0) throw DataError("naive forecast: no price seven days before " + d.str());
            fs.values.row(d - target.start) = prices.values.row(row);
            fs.dates.push_back(d);
        }
        fs.check();
        return fs;
    }
};

}  // namespace epf::models
