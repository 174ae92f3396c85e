#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <numeric>
#include <string>
#include <vector>

#include "epf/core/csv.hpp"
#include "epf/core/error.hpp"

namespace epf::reduce {

struct PcaBasis {
    std::vector<std::string> column_names;
    Eigen::VectorXd column_means;
    Eigen::VectorXd column_scales;  // all ones unless standardized
    Eigen::MatrixXd weights;        // one orthonormal column per component
    Eigen::VectorXd eigenvalues;    // descending, of the centered cross-product matrix
    bool standardized = false;
    bool rank_truncated = false;

    Eigen::Index n_components() const { return weights.cols(); }
};

namespace detail {

// Dominant-loading sign convention: the largest-magnitude entry of each
// component is positive. Among equal eigenvalues, components are ordered by
// the original column index of that dominant entry.
inline Eigen::Index dominant_row(const Eigen::VectorXd& v) {
    Eigen::Index best = 0;
    double bestabs = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        double a = std::abs(v(i));
        if (a > bestabs + 1e-15) {
            bestabs = a;
            best = i;
        }
    }
    return best;
}

}  // namespace detail

// Eigendecomposition of the column-centered cross-product matrix
// (X - mean)' (X - mean); eigenvalues therefore sum to the total centered
// sum of squares. Optional standardization divides columns by sample std.
inline PcaBasis fit_pca(const Eigen::MatrixXd& joint, const std::vector<std::string>& names = {},
                        bool standardize = false) {
    Eigen::Index rows = joint.rows(), cols = joint.cols();
    if (rows < 2) throw DataError("pca: need at least 2 rows");
    if (cols < 1) throw DataError("pca: empty matrix");
    if (!joint.allFinite()) throw DataError("pca: non-finite entry");
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != cols)
        throw ValidationError("pca: name list does not match columns");

    PcaBasis basis;
    basis.column_names = names;
    basis.standardized = standardize;
    basis.column_means = joint.colwise().mean();
    basis.column_scales = Eigen::VectorXd::Ones(cols);
    Eigen::MatrixXd centered = joint.rowwise() - basis.column_means.transpose();
    if (standardize) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            double sd = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(rows - 1));
            if (sd <= 0.0)
                throw DataError("pca: zero-variance column " + std::to_string(j) +
                                " cannot be standardized");
            basis.column_scales(j) = sd;
        }
        centered = centered.array().rowwise() / basis.column_scales.transpose().array();
    }

    Eigen::MatrixXd m = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw NumericalError("pca: eigendecomposition failed");

    // ascending from Eigen; reorder descending with the tie rule
    Eigen::VectorXd evals = es.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd evecs = es.eigenvectors();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(cols));
    std::iota(idx.begin(), idx.end(), 0);
    double tie_tol = 1e-9 * std::max(1.0, evals.maxCoeff());
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (std::abs(evals(a) - evals(b)) > tie_tol) return evals(a) > evals(b);
        return detail::dominant_row(evecs.col(a)) < detail::dominant_row(evecs.col(b));
    });

    Eigen::Index keep = cols;
    if (rows <= cols) {
        keep = rows - 1;
        basis.rank_truncated = true;
        if (keep < 1) throw DataError("pca: not enough rows for any component");
    }

    basis.weights.resize(cols, keep);
    basis.eigenvalues.resize(keep);
    for (Eigen::Index c = 0; c < keep; ++c) {
        Eigen::VectorXd v = evecs.col(idx[static_cast<std::size_t>(c)]);
        if (v(detail::dominant_row(v)) < 0.0) v = -v;
        basis.weights.col(c) = v;
        basis.eigenvalues(c) = evals(idx[static_cast<std::size_t>(c)]);
    }
    return basis;
}

inline Eigen::MatrixXd project(const PcaBasis& basis, const Eigen::MatrixXd& data, Eigen::Index l) {
    if (l < 1 || l > basis.n_components())
        throw ValidationError("pca project: l=" + std::to_string(l) + " outside 1.." +
                              std::to_string(basis.n_components()));
    if (data.cols() != basis.column_means.size())
        throw DataError("pca project: column count mismatch");
    Eigen::MatrixXd centered = data.rowwise() - basis.column_means.transpose();
    if (basis.standardized)
        centered = centered.array().rowwise() / basis.column_scales.transpose().array();
    return centered * basis.weights.leftCols(l);
}

inline void save_pca(const PcaBasis& basis, const std::string& path) {
    csv::Writer w(path);
    std::vector<std::string> header{"column", "mean", "scale"};
    for (Eigen::Index c = 0; c < basis.n_components(); ++c) header.push_back("w" + std::to_string(c));
    w.row(header);
    std::vector<std::string> eig{"_eigenvalues", "", ""};
    for (Eigen::Index c = 0; c < basis.n_components(); ++c)
        eig.push_back(csv::format_double(basis.eigenvalues(c)));
    w.row(eig);
    for (Eigen::Index j = 0; j < basis.column_means.size(); ++j) {
        std::vector<std::string> row;
        row.push_back(basis.column_names.empty() ? "col" + std::to_string(j)
                                                 : basis.column_names[static_cast<std::size_t>(j)]);
        row.push_back(csv::format_double(basis.column_means(j)));
        row.push_back(csv::format_double(basis.column_scales(j)));
        for (Eigen::Index c = 0; c < basis.n_components(); ++c)
            row.push_back(csv::format_double(basis.weights(j, c)));
        w.row(row);
    }
    w.close();
}

inline PcaBasis load_pca(const std::string& path) {
    auto t = csv::read_file(path);
    if (t.rows.size() < 2 || t.header.size() < 4 || t.rows[0][0] != "_eigenvalues")
        throw DataError(path + ": not a saved component basis");
    Eigen::Index comps = static_cast<Eigen::Index>(t.header.size()) - 3;
    Eigen::Index cols = static_cast<Eigen::Index>(t.rows.size()) - 1;
    PcaBasis b;
    b.eigenvalues.resize(comps);
    for (Eigen::Index c = 0; c < comps; ++c)
        if (!csv::parse_double(t.rows[0][static_cast<std::size_t>(c + 3)], b.eigenvalues(c)))
            throw DataError(path + ": bad eigenvalue");
    b.column_means.resize(cols);
    b.column_scales.resize(cols);
    b.weights.resize(cols, comps);
    for (Eigen::Index j = 0; j < cols; ++j) {
        const auto& row = t.rows[static_cast<std::size_t>(j + 1)];
        b.column_names.push_back(row[0]);
        if (!csv::parse_double(row[1], b.column_means(j)) || !csv::parse_double(row[2], b.column_scales(j)))
            throw DataError(path + ": bad mean/scale row");
        for (Eigen::Index c = 0; c < comps; ++c)
            if (!csv::parse_double(row[static_cast<std::size_t>(c + 3)], b.weights(j, c)))
                throw DataError(path + ": bad weight entry");
    }
    b.standardized = (b.column_scales.array() != 1.0).any();
    return b;
}

struct ComponentSearchPoint {
    Eigen::Index l;
    double value;
    bool valid;
};

struct ComponentSearchResult {
    Eigen::Index l_star = 0;
    std::vector<ComponentSearchPoint> curve;
};

// Evaluates a downstream loss for each candidate component count and returns
// the smallest l attaining the minimum. Candidates whose evaluation throws
// are kept on the curve but marked invalid.
template <typename LossFn>
ComponentSearchResult grid_search_components(const std::vector<Eigen::Index>& candidates, LossFn&& loss) {
    if (candidates.empty()) throw ValidationError("component search: empty candidate list");
    ComponentSearchResult res;
    double best = std::numeric_limits<double>::infinity();
    const double tol = 1e-12;
    for (Eigen::Index l : candidates) {
        ComponentSearchPoint pt{l, std::numeric_limits<double>::quiet_NaN(), false};
        try {
            pt.value = loss(l);
            pt.valid = std::isfinite(pt.value);
        } catch (const Error&) {
            pt.valid = false;
        }
        res.curve.push_back(pt);
        if (!pt.valid) continue;
        bool improves = pt.value < best - tol;
        bool tie_smaller_l = std::abs(pt.value - best) <= tol && res.l_star != 0 && l < res.l_star;
        if (res.l_star == 0 || improves || tie_smaller_l) {
            best = std::min(best, pt.value);
            res.l_star = l;
        }
    }
    if (res.l_star == 0) throw NumericalError("component search: no candidate evaluated successfully");
    return res;
}

}  // namespace epf::reduce
