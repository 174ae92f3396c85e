#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <string>
#include <vector>

#include "epf/core/error.hpp"
#include "epf/models/forecast_set.hpp"

namespace epf::ensemble {

using models::ForecastSet;

struct WeightVector {
    std::vector<std::string> model_ids;
    Eigen::VectorXd omega;

    void check(bool simplex = false) const {
        if (static_cast<Eigen::Index>(model_ids.size()) != omega.size())
            throw NumericalError("weights: id/value length mismatch");
        if (std::abs(omega.sum() - 1.0) > 1e-10)
            throw NumericalError("weights: sum " + std::to_string(omega.sum()) + " != 1");
        if (simplex && (omega.array() < -1e-12).any())
            throw NumericalError("weights: negative entry under a simplex constraint");
    }
};

enum class Pooling { pooled, per_hour };

struct ErrorCovariance {
    std::vector<std::string> model_ids;
    Pooling pooling = Pooling::pooled;
    Eigen::MatrixXd sigma;                  // pooled
    std::vector<Eigen::MatrixXd> by_hour;   // per-hour variant, kHours entries
    Eigen::Index n_samples = 0;
    DateWindow window{};

    void check() const {
        auto check_one = [&](const Eigen::MatrixXd& s) {
            Eigen::Index n = static_cast<Eigen::Index>(model_ids.size());
            if (s.rows() != n || s.cols() != n)
                throw NumericalError("error covariance: dimension mismatch");
            if (!s.isApprox(s.transpose(), 1e-10))
                throw NumericalError("error covariance: not symmetric");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
            if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()))
                throw NumericalError("error covariance: negative eigenvalue");
        };
        if (pooling == Pooling::pooled)
            check_one(sigma);
        else
            for (const auto& s : by_hour) check_one(s);
    }
};

struct EvalReport {
    std::string model_id;
    Eigen::VectorXd per_hour_rmse;  // kHours entries
    double average = 0.0;
    double std_across_hours = 0.0;
    Eigen::Index n_days = 0;
};

struct AmbiguityReport {
    Eigen::MatrixXd combined_sq_error;      // (p - f_bar)^2 per day and hour
    Eigen::MatrixXd weighted_model_error;   // sum_k w_k (p - f_k)^2
    Eigen::MatrixXd weighted_ambiguity;     // sum_k w_k (f_k - f_bar)^2
    double mean_combined = 0.0, mean_model_error = 0.0, mean_ambiguity = 0.0;
};

struct FrontierSolution {
    WeightVector weights;
    double variance = 0.0;
    double target_mean_error = 0.0;
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

}  // namespace epf::ensemble
