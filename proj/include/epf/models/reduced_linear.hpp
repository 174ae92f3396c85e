#pragma once

#include <Eigen/Dense>
#include <optional>

#include "epf/models/forecast_set.hpp"

namespace epf::models {

struct ReducedLinearOptions {
    int lookback = 20;
    std::vector<double> ridge_grid{0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4};
};

// Windowed linear map from the last `lookback` days of component scores to
// the next day's 24 prices, one ridge regression per hour with a shared
// design. Ridge strength is picked by validation RMSE on the chronological
// last 20% of the training rows, then the model is refit on all of them.
class ReducedLinearForecaster {
public:
    using Options = ReducedLinearOptions;

    explicit ReducedLinearForecaster(Options opt = {}) : opt_(opt) {
        if (opt_.lookback < 1) throw ValidationError("reduced linear: lookback must be positive");
        if (opt_.ridge_grid.empty()) throw ValidationError("reduced linear: empty ridge grid");
    }

    void fit(const FeatureMatrix& scores, const PricePanel& prices, DateWindow train) {
        auto pw = epf::slice(prices, train);
        int s0 = scores.row_of(train.start), s1 = scores.row_of(train.end);
        if (s0 < 0 || s1 < 0)
            throw DataError("reduced linear: scores do not cover the training window");
        Eigen::MatrixXd z = scores.values.middleRows(s0, s1 - s0 + 1);

        Eigen::Index days = z.rows();
        Eigen::Index L = opt_.lookback;
        if (days <= L + 1) throw DataError("reduced linear: training window shorter than lookback");
        Eigen::Index rows = days - L;
        Eigen::Index feat = L * z.cols();

        Eigen::MatrixXd f(rows, feat);
        Eigen::MatrixXd targets(rows, kHours);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index l = 0; l < L; ++l)
                f.row(i).segment(l * z.cols(), z.cols()) = z.row(i + l);
            targets.row(i) = pw.values.row(L + i);
        }

        Eigen::Index val_rows = std::max<Eigen::Index>(1, rows / 5);
        Eigen::Index est_rows = rows - val_rows;
        if (est_rows < 1) throw DataError("reduced linear: no estimation rows left after validation split");

        double best_lambda = opt_.ridge_grid.front();
        double best_rmse = std::numeric_limits<double>::infinity();
        for (double lambda : opt_.ridge_grid) {
            Solution s = solve(f.topRows(est_rows), targets.topRows(est_rows), lambda);
            Eigen::MatrixXd pred = apply(s, f.bottomRows(val_rows));
            double rmse = std::sqrt((pred - targets.bottomRows(val_rows)).squaredNorm() /
                                    static_cast<double>(val_rows * kHours));
            if (rmse < best_rmse - 1e-15) {
                best_rmse = rmse;
                best_lambda = lambda;
            }
        }
        solution_ = solve(f, targets, best_lambda);
        lambda_ = best_lambda;
        validation_rmse_ = best_rmse;
        n_score_cols_ = z.cols();
    }

    bool fitted() const { return solution_.has_value(); }
    std::string id() const { return "reduced-linear"; }
    std::string input_kind() const { return "reduced"; }
    double ridge_lambda() const { return lambda_; }
    double validation_rmse() const { return validation_rmse_; }

    ForecastSet forecast(const FeatureMatrix& scores, DateWindow target) const {
        if (!solution_) throw ValidationError("reduced linear: predict before fit");
        ForecastSet fs;
        fs.model_id = id();
        fs.values.resize(target.length(), kHours);
        Eigen::Index L = opt_.lookback;
        for (Date d = target.start; d <= target.end; ++d) {
            int last = scores.row_of(d - 1);
            if (last < 0 || last + 1 < L)
                throw DataError("reduced linear forecast: need " + std::to_string(L) +
                                " days of scores before " + d.str());
            if (scores.n_features() != n_score_cols_)
                throw DataError("reduced linear forecast: score dimension changed since fit");
            Eigen::RowVectorXd row(L * n_score_cols_);
            for (Eigen::Index l = 0; l < L; ++l)
                row.segment(l * n_score_cols_, n_score_cols_) =
                    scores.values.row(last + 1 - L + l);
            fs.values.row(d - target.start) = apply(*solution_, row);
            fs.dates.push_back(d);
        }
        fs.check();
        return fs;
    }

private:
    struct Solution {
        Eigen::RowVectorXd means;
        Eigen::RowVectorXd scales;
        Eigen::MatrixXd coef;       // feat x kHours on the standardized scale
        Eigen::RowVectorXd intercept;
    };

    static Solution solve(const Eigen::MatrixXd& f, const Eigen::MatrixXd& targets, double lambda) {
        Solution s;
        s.means = f.colwise().mean();
        Eigen::MatrixXd c = f.rowwise() - s.means;
        s.scales.resize(f.cols());
        for (Eigen::Index j = 0; j < f.cols(); ++j) {
            double sd = std::sqrt(c.col(j).squaredNorm() / std::max<Eigen::Index>(1, f.rows() - 1));
            s.scales(j) = sd > 0.0 ? sd : 1.0;
        }
        c = c.array().rowwise() / s.scales.array();
        Eigen::RowVectorXd ymean = targets.colwise().mean();
        Eigen::MatrixXd yc = targets.rowwise() - ymean;
        if (lambda > 0.0) {
            Eigen::MatrixXd gram = c.transpose() * c;
            gram.diagonal().array() += lambda;
            s.coef = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(c.transpose() * yc);
        } else {
            s.coef = Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(c).solve(yc);
        }
        s.intercept = ymean;
        return s;
    }

    static Eigen::MatrixXd apply(const Solution& s, const Eigen::MatrixXd& f) {
        Eigen::MatrixXd c = f.rowwise() - s.means;
        c = c.array().rowwise() / s.scales.array();
        return (c * s.coef).rowwise() + s.intercept;
    }

    Options opt_;
    std::optional<Solution> solution_;
    double lambda_ = 0.0;
    double validation_rmse_ = 0.0;
    Eigen::Index n_score_cols_ = 0;
};

}  // namespace epf::models
