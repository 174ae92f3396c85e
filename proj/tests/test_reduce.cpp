#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "epf/reduce/pca.hpp"
#include "support/oracles.hpp"

using namespace epf;
using namespace epf::reduce;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::mt19937_64& rng, double spread = 1.0) {
    std::normal_distribution<double> gauss(0.0, spread);
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = gauss(rng);
    return m;
}

}  // namespace

TEST_CASE("pca matches an independent jacobi eigensolver", "[reduce]") {
    std::mt19937_64 rng(71);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::MatrixXd m = random_matrix(60, 8, rng);
        // stretch some columns so the spectrum is far from flat
        for (int c = 0; c < 8; ++c) m.col(c) *= 1.0 + 0.7 * c;

        auto basis = fit_pca(m);
        Eigen::MatrixXd centered = m.rowwise() - m.colwise().mean();
        Eigen::MatrixXd sc = centered.transpose() * centered;

        Eigen::VectorXd ref_vals;
        Eigen::MatrixXd ref_vecs = oracle::jacobi_eigen(sc, ref_vals);

        REQUIRE(basis.n_components() == 8);
        for (int c = 0; c < 8; ++c) {
            CHECK(basis.eigenvalues(c) == Catch::Approx(ref_vals(c)).epsilon(1e-9));
            // same axis up to sign
            double dot = std::abs(basis.weights.col(c).dot(ref_vecs.col(c)));
            CHECK(dot == Catch::Approx(1.0).margin(1e-8));
        }
        // eigen residual against the matrix itself
        for (int c = 0; c < 8; ++c)
            CHECK((sc * basis.weights.col(c) - basis.eigenvalues(c) * basis.weights.col(c)).norm() <
                  1e-8 * sc.norm());
    }
}

TEST_CASE("pca basis is orthonormal with decorrelated scores", "[reduce]") {
    std::mt19937_64 rng(72);
    Eigen::MatrixXd m = random_matrix(120, 10, rng, 3.0);
    auto basis = fit_pca(m);

    Eigen::MatrixXd gram = basis.weights.transpose() * basis.weights;
    CHECK((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::MatrixXd scores = project(basis, m, basis.n_components());
    Eigen::MatrixXd centered_scores = scores.rowwise() - scores.colwise().mean();
    Eigen::MatrixXd cov = centered_scores.transpose() * centered_scores /
                          static_cast<double>(scores.rows() - 1);
    double max_var = cov.diagonal().maxCoeff();
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            if (i != j) CHECK(std::abs(cov(i, j)) < 1e-8 * max_var);

    // score variances follow the eigenvalues in order
    for (int i = 1; i < 10; ++i) CHECK(cov(i, i) <= cov(i - 1, i - 1) + 1e-9);

    // eigenvalues exhaust the total centered sum of squares
    Eigen::MatrixXd centered = m.rowwise() - m.colwise().mean();
    CHECK(basis.eigenvalues.sum() == Catch::Approx(centered.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("pca reconstruction with every component is exact", "[reduce]") {
    std::mt19937_64 rng(73);
    Eigen::MatrixXd m = random_matrix(50, 6, rng);
    auto basis = fit_pca(m);
    Eigen::MatrixXd scores = project(basis, m, 6);
    Eigen::MatrixXd back = scores * basis.weights.transpose();
    back.rowwise() += basis.column_means.transpose();
    CHECK((back - m).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("pca sign convention pins the dominant loading positive", "[reduce]") {
    std::mt19937_64 rng(74);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::MatrixXd m = random_matrix(40, 5, rng);
        auto basis = fit_pca(m);
        for (int c = 0; c < basis.n_components(); ++c) {
            Eigen::Index dom = 0;
            basis.weights.col(c).cwiseAbs().maxCoeff(&dom);
            CHECK(basis.weights(dom, c) > 0.0);
        }
    }
}

TEST_CASE("pca standardization divides by the sample deviation", "[reduce]") {
    std::mt19937_64 rng(75);
    Eigen::MatrixXd m = random_matrix(80, 4, rng);
    m.col(2) *= 50.0;  // dominant raw scale

    auto plain = fit_pca(m);
    auto standardized = fit_pca(m, {}, true);
    REQUIRE(standardized.standardized);

    // without standardization the big column owns the first component
    Eigen::Index dom = 0;
    plain.weights.col(0).cwiseAbs().maxCoeff(&dom);
    CHECK(dom == 2);

    for (int c = 0; c < 4; ++c) {
        Eigen::VectorXd col = m.col(c);
        double sd = std::sqrt((col.array() - col.mean()).square().sum() /
                              static_cast<double>(col.size() - 1));
        CHECK(standardized.column_scales(c) == Catch::Approx(sd).epsilon(1e-12));
    }
    CHECK(plain.column_scales.isOnes());
}

TEST_CASE("pca truncates rank-deficient input", "[reduce]") {
    std::mt19937_64 rng(76);
    Eigen::MatrixXd m = random_matrix(30, 3, rng);
    Eigen::MatrixXd wide(30, 5);
    wide << m, m.col(0), m.col(1) - m.col(2);
    auto basis = fit_pca(wide);
    CHECK(basis.rank_truncated);
    CHECK(basis.n_components() == 3);
}

TEST_CASE("projection validates the component count", "[reduce]") {
    std::mt19937_64 rng(77);
    Eigen::MatrixXd m = random_matrix(40, 6, rng);
    auto basis = fit_pca(m);
    CHECK(project(basis, m, 2).cols() == 2);
    CHECK_THROWS_AS(project(basis, m, 0), ValidationError);
    CHECK_THROWS_AS(project(basis, m, 7), ValidationError);
    Eigen::MatrixXd wrong(40, 5);
    wrong.setZero();
    CHECK_THROWS_AS(project(basis, wrong, 2), ValidationError);
}

TEST_CASE("pca round-trips through its csv form", "[reduce]") {
    std::mt19937_64 rng(78);
    Eigen::MatrixXd m = random_matrix(40, 5, rng);
    auto basis = fit_pca(m, {"p0", "p1", "p2", "load", "wind"}, true);

    auto dir = std::filesystem::temp_directory_path() / "epf-reduce-test";
    std::filesystem::create_directories(dir);
    std::string path = (dir / "basis.csv").string();
    save_pca(basis, path);
    auto loaded = load_pca(path);

    CHECK(loaded.column_names == basis.column_names);
    CHECK(loaded.standardized == basis.standardized);
    CHECK((loaded.weights - basis.weights).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((loaded.eigenvalues - basis.eigenvalues).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((loaded.column_means - basis.column_means).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((loaded.column_scales - basis.column_scales).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::MatrixXd s1 = project(basis, m, 3), s2 = project(loaded, m, 3);
    CHECK((s1 - s2).cwiseAbs().maxCoeff() < 1e-9);
}
