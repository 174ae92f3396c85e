#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <vector>

#include "epf/core/rng.hpp"
#include "epf/panel/types.hpp"

namespace epf::drivers {

struct ClusterModel {
    int k = 0;
    Eigen::VectorXd centroids;       // ascending
    std::vector<int> assignments;    // index into centroids, one per observation
    double inertia = 0.0;
    int iterations = 0;
};

// Lloyd's algorithm with D^2 ("k-means++") seeding on scalar data.
inline ClusterModel kmeans_1d(const Eigen::VectorXd& values, int k, std::uint64_t seed,
                              int max_iterations = 300) {
    if (k < 1) throw ValidationError("kmeans: k must be positive");
    Eigen::Index n = values.size();
    if (n == 0) throw DataError("kmeans: empty input");
    std::set<double> distinct(values.data(), values.data() + n);
    if (static_cast<std::size_t>(k) > distinct.size())
        throw DataError("kmeans: k=" + std::to_string(k) + " exceeds " +
                        std::to_string(distinct.size()) + " distinct values");

    Rng rng(seed);
    std::vector<double> centers;
    centers.push_back(values(static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(n)))));
    Eigen::VectorXd d2(n);
    while (static_cast<int>(centers.size()) < k) {
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centers) best = std::min(best, (values(i) - c) * (values(i) - c));
            d2(i) = best;
        }
        double total = d2.sum();
        if (total <= 0.0) {
            // all mass on existing centers; pick any value not yet a center
            for (double v : distinct)
                if (std::find(centers.begin(), centers.end(), v) == centers.end()) {
                    centers.push_back(v);
                    break;
                }
            continue;
        }
        double u = rng.uniform() * total;
        Eigen::Index pick = n - 1;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            acc += d2(i);
            if (u < acc) {
                pick = i;
                break;
            }
        }
        centers.push_back(values(pick));
    }

    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double bestd = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double d = std::abs(values(i) - centers[static_cast<std::size_t>(c)]);
                if (d < bestd) {
                    bestd = d;
                    best = c;
                }
            }
            if (assign[static_cast<std::size_t>(i)] != best) {
                assign[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;
        for (int c = 0; c < k; ++c) {
            double sum = 0.0;
            int count = 0;
            for (Eigen::Index i = 0; i < n; ++i)
                if (assign[static_cast<std::size_t>(i)] == c) {
                    sum += values(i);
                    ++count;
                }
            if (count > 0) centers[static_cast<std::size_t>(c)] = sum / count;
        }
    }

    // relabel so centroids are ascending
    std::vector<int> order(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) order[static_cast<std::size_t>(c)] = c;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return centers[static_cast<std::size_t>(a)] < centers[static_cast<std::size_t>(b)]; });
    std::vector<int> rank(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;

    ClusterModel m;
    m.k = k;
    m.centroids.resize(k);
    for (int r = 0; r < k; ++r) m.centroids(r) = centers[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
    m.assignments.resize(static_cast<std::size_t>(n));
    m.inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int c = rank[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
        m.assignments[static_cast<std::size_t>(i)] = c;
        double d = values(i) - m.centroids(c);
        m.inertia += d * d;
    }
    m.iterations = iter;
    return m;
}

struct ElbowResult {
    int k = 1;
    std::vector<double> inertias;  // index 0 -> k=1
};

// Elbow rule on the inertia curve. The bend is scored on log-inertia: the raw
// second difference is dominated by the first (largest) drop even when the
// curve keeps falling steeply, while the log curve flattens exactly where
// additional clusters stop paying for themselves.
inline ElbowResult elbow_k(const Eigen::VectorXd& values, int k_max, std::uint64_t seed) {
    if (k_max < 1) throw ValidationError("elbow: k_max must be positive");
    std::set<double> distinct(values.data(), values.data() + values.size());
    k_max = std::min<int>(k_max, static_cast<int>(distinct.size()));

    ElbowResult res;
    for (int k = 1; k <= k_max; ++k)
        res.inertias.push_back(kmeans_1d(values, k, derive_seed(seed, "elbow", static_cast<std::uint64_t>(k))).inertia);

    if (k_max < 3) {
        // not enough curve for a second difference; accept 2 only on a
        // near-total collapse of within-cluster variance
        res.k = (k_max == 2 && res.inertias[1] < 0.1 * res.inertias[0]) ? 2 : 1;
        return res;
    }

    double floor_val = std::max(res.inertias[0], 1.0) * 1e-12;
    auto lg = [&](double v) { return std::log(std::max(v, floor_val)); };
    int best_k = 2;
    double best_bend = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= k_max - 1; ++k) {
        double bend = lg(res.inertias[static_cast<std::size_t>(k - 2)]) -
                      2.0 * lg(res.inertias[static_cast<std::size_t>(k - 1)]) +
                      lg(res.inertias[static_cast<std::size_t>(k)]);
        if (bend > best_bend + 1e-12) {
            best_bend = bend;
            best_k = k;
        }
    }
    res.k = best_k;
    return res;
}

}  // namespace epf::drivers
