#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "epf/drivers/kmeans.hpp"
#include "epf/drivers/pipeline.hpp"
#include "epf/drivers/regression.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace epf;
using namespace epf::drivers;

TEST_CASE("kmeans reaches the exact optimum on separated data", "[drivers]") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> raw;
    Eigen::VectorXd v(90);
    for (int i = 0; i < 90; ++i) {
        double center = i < 30 ? 10.0 : (i < 60 ? 42.0 : 95.0);
        v(i) = center + noise(rng);
        raw.push_back(v(i));
    }
    for (int k : {2, 3}) {
        auto model = kmeans_1d(v, k, 7);
        CHECK(model.inertia == Catch::Approx(oracle::exact_kmeans_inertia(raw, k)).epsilon(1e-9));
    }
}

TEST_CASE("kmeans output is a lloyd fixpoint with ascending centroids", "[drivers]") {
    std::mt19937_64 rng(32);
    std::normal_distribution<double> noise(30.0, 20.0);
    Eigen::VectorXd v(200);
    for (int i = 0; i < 200; ++i) v(i) = noise(rng);

    auto model = kmeans_1d(v, 4, 11);
    REQUIRE(model.k == 4);
    for (int c = 1; c < 4; ++c) CHECK(model.centroids(c) > model.centroids(c - 1));

    // every point sits with its nearest centroid
    for (int i = 0; i < 200; ++i) {
        int a = model.assignments[static_cast<std::size_t>(i)];
        for (int c = 0; c < 4; ++c)
            CHECK(std::abs(v(i) - model.centroids(a)) <=
                  std::abs(v(i) - model.centroids(c)) + 1e-12);
    }
    // every centroid is the mean of its members
    for (int c = 0; c < 4; ++c) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < 200; ++i)
            if (model.assignments[static_cast<std::size_t>(i)] == c) {
                sum += v(i);
                ++count;
            }
        REQUIRE(count > 0);
        CHECK(model.centroids(c) == Catch::Approx(sum / count).epsilon(1e-12));
    }

    auto again = kmeans_1d(v, 4, 11);
    CHECK(again.assignments == model.assignments);
    CHECK(again.inertia == model.inertia);

    CHECK_THROWS_AS(kmeans_1d(Eigen::VectorXd::Constant(10, 1.0), 2, 3), DataError);
}

TEST_CASE("elbow finds the obvious cluster count", "[drivers]") {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> noise(0.0, 1.5);
    Eigen::VectorXd v(240);
    for (int i = 0; i < 240; ++i) {
        double center = i % 3 == 0 ? 15.0 : (i % 3 == 1 ? 60.0 : 130.0);
        v(i) = center + noise(rng);
    }
    auto res = elbow_k(v, 7, 5);
    CHECK(res.k == 3);
    REQUIRE(res.inertias.size() == 7);
    for (std::size_t i = 1; i < res.inertias.size(); ++i)
        CHECK(res.inertias[i] <= res.inertias[i - 1] + 1e-9);
}

namespace {

DailySeries named_series(Date start, const Eigen::VectorXd& v, const char* name) {
    DailySeries s;
    s.dates = builders::date_run(start, static_cast<int>(v.size()));
    s.values = v;
    s.name = name;
    return s;
}

}  // namespace

TEST_CASE("cluster regression matches the leverage-weighted oracle", "[drivers]") {
    std::mt19937_64 rng(34);
    std::normal_distribution<double> noise;
    Date start = Date::from_ymd(2022, 1, 1);
    int n = 150;

    Eigen::VectorXd x1 = builders::white_noise(n, 1.0, rng);
    Eigen::VectorXd x2 = builders::white_noise(n, 2.0, rng);
    Eigen::VectorXd y(n);
    // heteroskedastic errors are the whole point of HC3
    for (int i = 0; i < n; ++i) y(i) = 1.5 * x1(i) - 0.8 * x2(i) + (0.3 + std::abs(x1(i))) * noise(rng);

    std::vector<DailySeries> feats{named_series(start, x1, "a"), named_series(start, x2, "b")};
    std::set<Date> members(feats[0].dates.begin(), feats[0].dates.end());
    auto rep = cluster_regression(named_series(start, y, "p"), feats, {0, 0}, members, 0);

    Eigen::MatrixXd X(n, 2);
    X.col(0) = x1;
    X.col(1) = x2;
    auto ref = oracle::hc3(X, y);
    REQUIRE(rep.terms.size() == 2);
    for (int j = 0; j < 2; ++j) {
        CHECK(rep.terms[static_cast<std::size_t>(j)].stat.estimate ==
              Catch::Approx(ref.beta(j)).margin(1e-10));
        CHECK(rep.terms[static_cast<std::size_t>(j)].stat.std_error ==
              Catch::Approx(ref.std_error(j)).margin(1e-10));
    }
    CHECK(rep.covariance == "HC3");
    CHECK(rep.n_obs == n);
}

TEST_CASE("cluster regression honors lags and membership", "[drivers]") {
    Date start = Date::from_ymd(2022, 3, 1);
    int n = 60;
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = std::sin(0.37 * i) + 0.01 * i;
    // y depends on yesterday's x exactly
    Eigen::VectorXd y(n);
    y(0) = 0.0;
    for (int i = 1; i < n; ++i) y(i) = 2.0 * x(i - 1);

    std::vector<DailySeries> feats{named_series(start, x, "x")};
    std::set<Date> members;
    for (int i = 1; i < n; ++i) members.insert(start + i);
    auto rep = cluster_regression(named_series(start, y, "p"), feats, {1}, members, 2);
    CHECK(rep.cluster == 2);
    CHECK(rep.n_obs == n - 1);
    CHECK(rep.terms[0].lag == 1);
    CHECK(rep.terms[0].stat.estimate == Catch::Approx(2.0).margin(1e-8));
    CHECK(rep.r2_uncentered == Catch::Approx(1.0).margin(1e-10));

    // the first member day needs x at start-1, which does not exist
    members.insert(start);
    auto rep2 = cluster_regression(named_series(start, y, "p"), feats, {1}, members, 2);
    CHECK(rep2.n_obs == n - 1);

    std::set<Date> tiny{start + 1};
    CHECK_THROWS_AS(cluster_regression(named_series(start, y, "p"), feats, {1}, tiny, 0), DataError);
}

TEST_CASE("significance cut is strict and keeps cluster order", "[drivers]") {
    RegressionReport r0, r1;
    r0.cluster = 1;
    r1.cluster = 0;
    stats::CoefficientStat in{1.0, 0.1, 10.0, 0.049, 0.8, 1.2};
    stats::CoefficientStat edge{1.0, 0.1, 10.0, 0.05, 0.8, 1.2};
    stats::CoefficientStat out{0.1, 0.1, 1.0, 0.3, -0.1, 0.3};
    r0.terms = {{"gas", 1, in}, {"coal", 1, edge}};
    r1.terms = {{"wind", 1, in}, {"gas", 1, in}, {"hydro", 1, out}};

    CHECK(select_significant(r0) == std::vector<std::string>{"gas"});
    CHECK_THROWS_AS(select_significant(r0, 0.0), ValidationError);

    auto ds = union_drivers({r0, r1});
    // cluster 0 scanned first, duplicates dropped on later clusters
    CHECK(ds.ordered_features == std::vector<std::string>{"wind", "gas"});
    CHECK(ds.by_cluster.at(0) == std::vector<std::string>{"wind", "gas"});
    CHECK(ds.by_cluster.at(1) == std::vector<std::string>{"gas"});
}

TEST_CASE("driver pipeline recovers two planted drivers", "[drivers][slow]") {
    int hits = 0, seeds = 6;
    for (int seed = 1; seed <= seeds; ++seed) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(900 + seed));
        std::normal_distribution<double> noise;
        int n = 420;
        Date start = Date::from_ymd(2021, 6, 1);

        Eigen::VectorXd x1 = builders::ar1(n, 0.5, 1.5, rng);
        Eigen::VectorXd x2 = builders::ar1(n, 0.4, 1.2, rng);
        Eigen::VectorXd d1 = builders::ar1(n, 0.6, 1.0, rng);
        Eigen::VectorXd d2 = builders::ar1(n, 0.3, 2.0, rng);
        Eigen::VectorXd d3 = builders::white_noise(n, 1.0, rng);
        Eigen::VectorXd base = builders::ar1(n, 0.5, 0.8, rng);

        double pattern[7] = {2.0, 1.0, 0.0, -0.5, -1.0, -1.5, 0.0};
        PricePanel prices = builders::make_prices(start, n, [&](int d, int h) {
            double daily = 25.0 + pattern[d % 7] + base(d) + (d > 0 ? 1.2 * x1(d - 1) : 0.0) +
                           0.9 * x2(d);
            return daily + 0.15 * (h - 12) + 0.3 * noise(rng);
        });
        VolumePanel volumes = builders::flat_volumes(start, n);
        FeatureMatrix features =
            builders::make_features(start, n, {"x1", "x2", "d1", "d2", "d3"}, [&](int d, int c) {
                switch (c) {
                    case 0: return x1(d);
                    case 1: return x2(d);
                    case 2: return d1(d);
                    case 3: return d2(d);
                    default: return d3(d);
                }
            });

        DriverConfig cfg;
        cfg.k_max = 4;
        cfg.kmeans_seed = static_cast<std::uint64_t>(seed);
        cfg.day_d_features = {"x2"};
        cfg.sarima_grid.p_max = 1;
        cfg.sarima_grid.q_max = 1;
        cfg.sarima_grid.Q_max = 0;

        auto res = run_driver_pipeline(prices, volumes, features, cfg);
        REQUIRE(res.feature_lags.size() == 5);
        CHECK(res.feature_lags[0] == 1);
        CHECK(res.feature_lags[1] == 0);

        bool x1_ok = false, x2_ok = false;
        for (const auto& rep : res.regressions)
            for (const auto& t : rep.terms) {
                if (t.feature == "x1" && t.lag == 1 && t.stat.p_value < cfg.alpha) x1_ok = true;
                if (t.feature == "x2" && t.lag == 0 && t.stat.p_value < cfg.alpha) x2_ok = true;
            }
        hits += x1_ok && x2_ok;
    }
    CHECK(hits >= 5);
}
