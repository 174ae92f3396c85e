#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "epf/core/rng.hpp"
#include "epf/stats/adf.hpp"

namespace epf::stats {

enum class HacKernel { bartlett, quadratic_spectral };

// Which seasonal coefficients the stability hypothesis covers: the whole
// spectrum (rank s-1) or one harmonic pair (rank 2).
struct ChSelection {
    bool all = true;
    int harmonic = 0;  // 1-based, used when all == false

    static ChSelection all_frequencies() { return {true, 0}; }
    static ChSelection single(int k) { return {false, k}; }

    std::string str() const { return all ? "all" : "harmonic-" + std::to_string(harmonic); }
};

struct ChTestResult {
    double l_statistic = 0.0;
    int rank = 0;
    int bandwidth = 0;
    HacKernel kernel = HacKernel::bartlett;
    ChSelection selection;
    std::map<double, double> critical_values;
    Decision decision = Decision::fail_to_reject;
};

namespace detail {

// Hansen's von Mises critical values, indexed by rank 1..12.
inline std::map<double, double> von_mises_critical_values(int q) {
    static constexpr double cv10[12] = {0.353, 0.610, 0.846, 1.07, 1.28, 1.49,
                                        1.69, 1.89, 2.10, 2.29, 2.49, 2.69};
    static constexpr double cv5[12] = {0.470, 0.749, 1.01, 1.24, 1.47, 1.68,
                                       1.90, 2.11, 2.32, 2.54, 2.75, 2.96};
    static constexpr double cv1[12] = {0.748, 1.07, 1.35, 1.60, 1.88, 2.12,
                                       2.35, 2.59, 2.82, 3.05, 3.27, 3.51};
    if (q < 1 || q > 12) throw ValidationError("ch: no critical values for rank " + std::to_string(q));
    return {{0.10, cv10[q - 1]}, {0.05, cv5[q - 1]}, {0.01, cv1[q - 1]}};
}

inline double qs_weight(double x) {
    if (x == 0.0) return 1.0;
    double z = 6.0 * M_PI * x / 5.0;
    return 25.0 / (12.0 * M_PI * M_PI * x * x) * (std::sin(z) / z - std::cos(z));
}

// Trigonometric seasonal regressors; for even periods the last column is the
// alternating Nyquist term.
inline Eigen::MatrixXd seasonal_harmonics(Eigen::Index n, int period) {
    int pairs = (period - 1) / 2;
    int cols = period - 1;
    Eigen::MatrixXd F(n, cols);
    for (Eigen::Index t = 0; t < n; ++t) {
        double base = 2.0 * M_PI * static_cast<double>(t + 1) / period;
        for (int k = 1; k <= pairs; ++k) {
            F(t, 2 * (k - 1)) = std::cos(k * base);
            F(t, 2 * (k - 1) + 1) = std::sin(k * base);
        }
        if (period % 2 == 0) F(t, cols - 1) = ((t + 1) % 2 == 0) ? 1.0 : -1.0;
    }
    return F;
}

}  // namespace detail

// Canova-Hansen style test for instability of deterministic seasonality:
// H0 fixed seasonal coefficients, H1 a random-walk drift in them. The score
// process of the seasonal regressors is cumulated and weighted by a HAC
// estimate of its long-run covariance; large L rejects stability.
inline ChTestResult ch_test(const Eigen::VectorXd& series, int period = 7,
                            ChSelection selection = ChSelection::all_frequencies(),
                            int difference_lag = 0, HacKernel kernel = HacKernel::bartlett,
                            int bandwidth = -1, double level = 0.05) {
    if (period < 2) throw ValidationError("ch: period must be at least 2");
    Eigen::VectorXd y = series;
    if (difference_lag > 0) {
        if (series.size() <= difference_lag) throw DataError("ch: series shorter than difference lag");
        y = series.tail(series.size() - difference_lag) - series.head(series.size() - difference_lag);
    }
    Eigen::Index n = y.size();
    if (n < 2 * period) throw DataError("ch: need at least two full cycles");

    int f_cols = period - 1;
    Eigen::MatrixXd F = detail::seasonal_harmonics(n, period);
    Eigen::MatrixXd X(n, f_cols + 1);
    X.col(0).setOnes();
    X.rightCols(f_cols) = F;
    OlsFit fit = ols(X, y);
    if (fit.ssr <= 0.0) throw DataError("ch: degenerate series, zero residual variance");

    // scores and their cumulative sums
    Eigen::MatrixXd G = F.array().colwise() * fit.residuals.array();
    Eigen::MatrixXd cumG = G;
    for (Eigen::Index t = 1; t < n; ++t) cumG.row(t) += cumG.row(t - 1);
    Eigen::MatrixXd S = cumG.transpose() * cumG;

    if (bandwidth < 0)
        bandwidth = static_cast<int>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
    Eigen::MatrixXd omega = G.transpose() * G / static_cast<double>(n);
    for (int k = 1; k <= bandwidth && k < n; ++k) {
        double w = kernel == HacKernel::bartlett
                       ? 1.0 - static_cast<double>(k) / (static_cast<double>(bandwidth) + 1.0)
                       : detail::qs_weight(static_cast<double>(k) / bandwidth);
        Eigen::MatrixXd gk = G.bottomRows(n - k).transpose() * G.topRows(n - k) / static_cast<double>(n);
        omega += w * (gk + gk.transpose());
    }

    int rank;
    Eigen::MatrixXd omega_sel, s_sel;
    if (selection.all) {
        rank = f_cols;
        omega_sel = omega;
        s_sel = S;
    } else {
        int pairs = (period - 1) / 2;
        if (selection.harmonic < 1 || selection.harmonic > pairs)
            throw ValidationError("ch: harmonic out of range");
        int c0 = 2 * (selection.harmonic - 1);
        rank = 2;
        omega_sel = omega.block(c0, c0, 2, 2);
        s_sel = S.block(c0, c0, 2, 2);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(omega_sel);
    if (ldlt.info() != Eigen::Success)
        throw NumericalError("ch: singular long-run covariance");
    double l_stat = ldlt.solve(s_sel).trace() / (static_cast<double>(n) * static_cast<double>(n));

    ChTestResult r;
    r.l_statistic = l_stat;
    r.rank = rank;
    r.bandwidth = bandwidth;
    r.kernel = kernel;
    r.selection = selection;
    r.critical_values = detail::von_mises_critical_values(rank);
    r.decision = l_stat > r.critical_values.at(level) ? Decision::reject : Decision::fail_to_reject;
    return r;
}

// Finite-sample recalibration: the same statistic under a white-noise null.
inline double ch_critical_value_mc(int period, ChSelection selection, HacKernel kernel, Eigen::Index n,
                                   int reps, std::uint64_t seed, double level = 0.05) {
    if (reps < 100) throw ValidationError("ch calibration: need at least 100 replications");
    std::vector<double> stats;
    stats.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        Rng rng(derive_seed(seed, "ch-calibration", static_cast<std::uint64_t>(r)));
        Eigen::VectorXd y(n);
        for (Eigen::Index t = 0; t < n; ++t) y(t) = rng.normal();
        stats.push_back(ch_test(y, period, selection, 0, kernel).l_statistic);
    }
    std::sort(stats.begin(), stats.end());
    double pos = (1.0 - level) * (static_cast<double>(stats.size()) - 1.0);
    auto lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= stats.size()) return stats.back();
    return stats[lo] * (1.0 - frac) + stats[lo + 1] * frac;
}

}  // namespace epf::stats
