#pragma once

// Deliberately naive reference implementations. Everything here recomputes
// results from first principles with its own linear algebra so that agreement
// with the library is evidence, not circularity.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double mean(const Eigen::VectorXd& v) { return v.sum() / static_cast<double>(v.size()); }

inline double sample_std(const Eigen::VectorXd& v) {
    double m = mean(v);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) ss += (v(i) - m) * (v(i) - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double ma = mean(a), mb = mean(b), num = 0.0, da = 0.0, db = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        num += (a(i) - ma) * (b(i) - mb);
        da += (a(i) - ma) * (a(i) - ma);
        db += (b(i) - mb) * (b(i) - mb);
    }
    return num / std::sqrt(da * db);
}

inline double acf_at(const Eigen::VectorXd& x, int lag) {
    double m = mean(x), num = 0.0, den = 0.0;
    Eigen::Index n = x.size();
    for (Eigen::Index t = 0; t < n; ++t) den += (x(t) - m) * (x(t) - m);
    for (Eigen::Index t = 0; t + lag < n; ++t) num += (x(t) - m) * (x(t + lag) - m);
    return num / den;
}

// Gaussian elimination with partial pivoting; no Eigen decompositions so the
// solve path shares nothing with the code under test.
inline Eigen::VectorXd solve_linear(Eigen::MatrixXd a, Eigen::VectorXd b) {
    Eigen::Index n = a.rows();
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index piv = col;
        for (Eigen::Index r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) < 1e-14) throw std::runtime_error("oracle solve: singular");
        if (piv != col) {
            a.row(piv).swap(a.row(col));
            std::swap(b(piv), b(col));
        }
        for (Eigen::Index r = col + 1; r < n; ++r) {
            double f = a(r, col) / a(col, col);
            a.row(r).tail(n - col) -= f * a.row(col).tail(n - col);
            b(r) -= f * b(col);
        }
    }
    Eigen::VectorXd x(n);
    for (Eigen::Index r = n - 1; r >= 0; --r) {
        double s = b(r);
        for (Eigen::Index c = r + 1; c < n; ++c) s -= a(r, c) * x(c);
        x(r) = s / a(r, r);
    }
    return x;
}

inline Eigen::MatrixXd invert(const Eigen::MatrixXd& a) {
    Eigen::Index n = a.rows();
    Eigen::MatrixXd inv(n, n);
    for (Eigen::Index c = 0; c < n; ++c) inv.col(c) = solve_linear(a, Eigen::VectorXd::Unit(n, c));
    return inv;
}

// min x'Qx/2 subject to A x = b via the KKT system.
inline Eigen::VectorXd qp_equality(const Eigen::MatrixXd& q, const Eigen::MatrixXd& a,
                                   const Eigen::VectorXd& b) {
    Eigen::Index n = q.rows(), m = a.rows();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = q;
    kkt.topRightCorner(n, m) = a.transpose();
    kkt.bottomLeftCorner(m, n) = a;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + m);
    rhs.tail(m) = b;
    return solve_linear(kkt, rhs).head(n);
}

inline Eigen::VectorXd project_simplex(Eigen::VectorXd v) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    int rho = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) {
            rho = static_cast<int>(i + 1);
            theta = t;
        }
    }
    (void)rho;
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = std::max(0.0, v(i) - theta);
    return v;
}

// min x'Qx/2 + c'x on the probability simplex by projected gradient with a
// conservative step; slow and simple on purpose.
inline Eigen::VectorXd qp_simplex(const Eigen::MatrixXd& q, const Eigen::VectorXd& c,
                                  int iters = 200000) {
    Eigen::Index n = q.rows();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
    double lip = std::max(es.eigenvalues().maxCoeff(), 1e-12);
    double step = 1.0 / lip;
    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd g = q * x + c;
        Eigen::VectorXd nx = project_simplex(x - step * g);
        if ((nx - x).lpNorm<Eigen::Infinity>() < 1e-14) return nx;
        x = nx;
    }
    return x;
}

// Cyclic Jacobi sweeps for a symmetric matrix, applying each plane rotation
// to the affected rows and columns in place. Returns eigenvalues in `evals`
// (descending) and matching eigenvectors as columns.
inline Eigen::MatrixXd jacobi_eigen(Eigen::MatrixXd s, Eigen::VectorXd& evals) {
    Eigen::Index n = s.rows();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
        if (off < 1e-26 * (s.diagonal().cwiseAbs().sum() + 1e-300)) break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(s(p, q)) < 1e-300) continue;
                double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
                for (Eigen::Index i = 0; i < n; ++i) {
                    double sip = s(i, p), siq = s(i, q);
                    s(i, p) = c * sip - sn * siq;
                    s(i, q) = sn * sip + c * siq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    double spi = s(p, i), sqi = s(q, i);
                    s(p, i) = c * spi - sn * sqi;
                    s(q, i) = sn * spi + c * sqi;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - sn * viq;
                    v(i, q) = sn * vip + c * viq;
                }
            }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return s(a, a) > s(b, b); });
    evals.resize(n);
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        evals(i) = s(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        out.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

struct Hc3 {
    Eigen::VectorXd beta;
    Eigen::VectorXd std_error;
};

// Direct leverage-weighted covariance: (X'X)^-1 X' diag(e^2/(1-h)^2) X (X'X)^-1.
inline Hc3 hc3(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd xtx_inv = invert(x.transpose() * x);
    Eigen::VectorXd beta = xtx_inv * (x.transpose() * y);
    Eigen::VectorXd resid = y - x * beta;
    Eigen::Index n = x.rows(), k = x.cols();
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        double h = (x.row(i) * xtx_inv * x.row(i).transpose())(0, 0);
        double wt = resid(i) * resid(i) / ((1.0 - h) * (1.0 - h));
        meat += wt * x.row(i).transpose() * x.row(i);
    }
    Eigen::MatrixXd cov = xtx_inv * meat * xtx_inv;
    Hc3 out;
    out.beta = beta;
    out.std_error = cov.diagonal().cwiseSqrt();
    return out;
}

// Exact 1-d k-means for small inputs: optimal clusters are contiguous in
// sorted order, so enumerate split points.
inline double exact_kmeans_inertia(std::vector<double> vals, int k) {
    std::sort(vals.begin(), vals.end());
    int n = static_cast<int>(vals.size());
    auto cost = [&](int lo, int hi) {  // [lo, hi)
        double m = 0.0;
        for (int i = lo; i < hi; ++i) m += vals[static_cast<std::size_t>(i)];
        m /= static_cast<double>(hi - lo);
        double c = 0.0;
        for (int i = lo; i < hi; ++i) {
            double d = vals[static_cast<std::size_t>(i)] - m;
            c += d * d;
        }
        return c;
    };
    std::vector<std::vector<double>> dp(static_cast<std::size_t>(k + 1),
                                        std::vector<double>(static_cast<std::size_t>(n + 1), 1e300));
    dp[0][0] = 0.0;
    for (int g = 1; g <= k; ++g)
        for (int end = g; end <= n; ++end)
            for (int start = g - 1; start < end; ++start) {
                double c = dp[static_cast<std::size_t>(g - 1)][static_cast<std::size_t>(start)] +
                           cost(start, end);
                if (c < dp[static_cast<std::size_t>(g)][static_cast<std::size_t>(end)])
                    dp[static_cast<std::size_t>(g)][static_cast<std::size_t>(end)] = c;
            }
    return dp[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
}

inline Eigen::MatrixXd random_psd(int n, std::mt19937_64& rng, double jitter = 1e-3) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
    Eigen::MatrixXd s = g.transpose() * g / static_cast<double>(n);
    s.diagonal().array() += jitter;
    return s;
}

inline Eigen::VectorXd random_simplex(int n, std::mt19937_64& rng) {
    std::exponential_distribution<double> ex(1.0);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) w(i) = ex(rng);
    return w / w.sum();
}

}  // namespace oracle
