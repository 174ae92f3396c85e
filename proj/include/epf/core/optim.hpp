#pragma once

#include <Eigen/Dense>
#include <functional>

#include "epf/core/error.hpp"

namespace epf {

struct NelderMeadOptions {
    int max_iterations = 0;  // 0: 400 * dimension
    double f_tolerance = 1e-12;
    double x_tolerance = 1e-10;
    double initial_step = 0.1;
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
};

// Downhill simplex; `f` may return +inf to veto infeasible points.
inline NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& x0, NelderMeadOptions opt = {}) {
    const Eigen::Index n = x0.size();
    if (n == 0) throw ValidationError("nelder_mead: empty parameter vector");
    int max_iter = opt.max_iterations > 0 ? opt.max_iterations : 400 * static_cast<int>(n);

    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
    std::vector<double> vals(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i < n; ++i) {
        double step = x0(i) != 0.0 ? opt.initial_step * std::abs(x0(i)) : opt.initial_step;
        pts[static_cast<std::size_t>(i + 1)](i) += step;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f(pts[i]);

    auto order = [&] {
        std::vector<std::size_t> idx(pts.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<Eigen::VectorXd> p2;
        std::vector<double> v2;
        for (std::size_t i : idx) {
            p2.push_back(pts[i]);
            v2.push_back(vals[i]);
        }
        pts.swap(p2);
        vals.swap(v2);
    };

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        order();
        double spread = vals.back() - vals.front();
        double scale = 1.0 + std::abs(vals.front());
        double xspread = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i)
            xspread = std::max(xspread, (pts[i] - pts[0]).cwiseAbs().maxCoeff());
        if (spread < opt.f_tolerance * scale && xspread < opt.x_tolerance) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
        centroid /= static_cast<double>(n);

        Eigen::VectorXd xr = centroid + (centroid - pts.back());
        double fr = f(xr);
        if (fr < vals.front()) {
            Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts.back());
            double fe = f(xe);
            if (fe < fr) {
                pts.back() = xe;
                vals.back() = fe;
            } else {
                pts.back() = xr;
                vals.back() = fr;
            }
        } else if (fr < vals[vals.size() - 2]) {
            pts.back() = xr;
            vals.back() = fr;
        } else {
            Eigen::VectorXd xc = centroid + 0.5 * ((fr < vals.back() ? xr : pts.back()) - centroid);
            double fc = f(xc);
            if (fc < std::min(fr, vals.back())) {
                pts.back() = xc;
                vals.back() = fc;
            } else {
                for (std::size_t i = 1; i < pts.size(); ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    return {pts.front(), vals.front(), iter};
}

}  // namespace epf
