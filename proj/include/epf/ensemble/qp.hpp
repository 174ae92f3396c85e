#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>

#include "epf/core/error.hpp"

namespace epf::ensemble {

// Minimize w' G w - 2 b' w subject to sum(w) = 1, w >= 0, solved exactly by
// enumerating active sets and checking the KKT conditions of each candidate.
// G is symmetrized and given a tiny ridge so duplicated columns (identical
// models) split their weight evenly instead of producing an arbitrary vertex.
inline Eigen::VectorXd simplex_quadratic(const Eigen::MatrixXd& g_in, const Eigen::VectorXd& b) {
    Eigen::Index n = g_in.rows();
    if (n == 0 || g_in.cols() != n || b.size() != n)
        throw ValidationError("simplex qp: bad dimensions");
    if (n > 16)
        throw ValidationError("simplex qp: more than 16 models is not supported");

    Eigen::MatrixXd g = 0.5 * (g_in + g_in.transpose());
    double scale = std::max({1.0, g.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
    double ridge = 1e-10 * scale;
    g.diagonal().array() += ridge;

    double feas_tol = 1e-11;
    double kkt_tol = 1e-8 * scale;

    Eigen::VectorXd best = Eigen::VectorXd::Zero(n);
    double best_obj = std::numeric_limits<double>::infinity();
    bool best_is_kkt = false;

    Eigen::VectorXd fallback = best;
    double fallback_obj = best_obj;

    std::uint32_t limit = std::uint32_t{1} << n;
    for (std::uint32_t mask = 1; mask < limit; ++mask) {
        Eigen::Index m = 0;
        Eigen::Index idx[16];
        for (Eigen::Index j = 0; j < n; ++j)
            if (mask & (std::uint32_t{1} << j)) idx[m++] = j;

        // KKT system for the equality-constrained subproblem on the support.
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
        Eigen::VectorXd rhs(m + 1);
        for (Eigen::Index r = 0; r < m; ++r) {
            for (Eigen::Index c = 0; c < m; ++c) kkt(r, c) = 2.0 * g(idx[r], idx[c]);
            kkt(r, m) = 1.0;
            kkt(m, r) = 1.0;
            rhs(r) = 2.0 * b(idx[r]);
        }
        rhs(m) = 1.0;

        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible()) continue;
        Eigen::VectorXd sol = lu.solve(rhs);

        bool feasible = true;
        for (Eigen::Index r = 0; r < m; ++r)
            if (sol(r) < -feas_tol) { feasible = false; break; }
        if (!feasible) continue;

        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        for (Eigen::Index r = 0; r < m; ++r) w(idx[r]) = std::max(0.0, sol(r));
        w /= w.sum();

        double obj = w.dot(g * w) - 2.0 * b.dot(w);
        if (obj < fallback_obj) { fallback_obj = obj; fallback = w; }

        // Multiplier check on the inactive coordinates.
        double nu = sol(m);
        Eigen::VectorXd grad = 2.0 * (g * w - b);
        bool kkt_ok = true;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (mask & (std::uint32_t{1} << j)) continue;
            if (grad(j) + nu < -kkt_tol) { kkt_ok = false; break; }
        }
        if (!kkt_ok) continue;

        if (!best_is_kkt || obj < best_obj - 1e-14 * scale) {
            best = w;
            best_obj = obj;
            best_is_kkt = true;
        }
    }

    if (best_is_kkt) return best;
    if (fallback_obj < std::numeric_limits<double>::infinity()) return fallback;
    throw NumericalError("simplex qp: no feasible support found");
}

// Least squares on the simplex: minimize || y - F w ||^2 with w in the simplex.
inline Eigen::VectorXd simplex_lsq(const Eigen::MatrixXd& f, const Eigen::VectorXd& y) {
    if (f.rows() != y.size())
        throw ValidationError("simplex lsq: row mismatch");
    if (f.rows() == 0)
        throw ValidationError("simplex lsq: empty sample");
    Eigen::MatrixXd g = f.transpose() * f;
    Eigen::VectorXd b = f.transpose() * y;
    return simplex_quadratic(g, b);
}

// Minimum-variance point of the simplex, used when clipping shrinkage weights.
inline Eigen::VectorXd simplex_min_variance(const Eigen::MatrixXd& sigma) {
    return simplex_quadratic(sigma, Eigen::VectorXd::Zero(sigma.rows()));
}

}  // namespace epf::ensemble
