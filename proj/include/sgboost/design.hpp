#pragma once
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sgboost/error.hpp"

namespace sgb {

// ============================================================================
// Grouped design matrix
// ============================================================================

/// An n x p design matrix together with a partition of its columns into G
/// non-overlapping groups. Immutable after construction; safe to share
/// across threads.
struct GroupedDesign {
    Eigen::MatrixXd X;
    std::vector<int> group_of;                  ///< length p, values 1..G
    std::vector<std::vector<int>> group_cols;   ///< group g -> ascending column ids (index g-1)
    std::vector<std::string> names;             ///< variable names, length p
    std::vector<std::string> group_labels;      ///< original label of each group, length G
    int n = 0, p = 0, G = 0;

    int group_size(int g) const { return static_cast<int>(group_cols[g - 1].size()); }
};

/// Validates entries and the group map, relabels groups 1..G in order of
/// first appearance. Variable names default to x1..xp, group labels to the
/// originals that produced each id.
inline GroupedDesign make_design(Eigen::MatrixXd X,
                                 const std::vector<std::string>& col_group_labels,
                                 std::vector<std::string> names = {}) {
    GroupedDesign gd;
    gd.n = static_cast<int>(X.rows());
    gd.p = static_cast<int>(X.cols());
    if (gd.n < 1 || gd.p < 1) throw validation_error("design must have at least 1 row and 1 column");
    if (static_cast<int>(col_group_labels.size()) != gd.p)
        throw validation_error("group map length " + std::to_string(col_group_labels.size()) +
                               " does not match column count " + std::to_string(gd.p));
    for (int j = 0; j < gd.p; ++j)
        for (int i = 0; i < gd.n; ++i)
            if (!std::isfinite(X(i, j)))
                throw validation_error("non-finite entry at row " + std::to_string(i + 1) +
                                       ", column " + std::to_string(j + 1));

    std::unordered_map<std::string, int> relabel;
    gd.group_of.resize(gd.p);
    for (int j = 0; j < gd.p; ++j) {
        auto it = relabel.find(col_group_labels[j]);
        int g;
        if (it == relabel.end()) {
            g = static_cast<int>(relabel.size()) + 1;
            relabel.emplace(col_group_labels[j], g);
            gd.group_labels.push_back(col_group_labels[j]);
            gd.group_cols.emplace_back();
        } else {
            g = it->second;
        }
        gd.group_of[j] = g;
        gd.group_cols[g - 1].push_back(j);
    }
    gd.G = static_cast<int>(gd.group_cols.size());

    if (names.empty()) {
        names.reserve(gd.p);
        for (int j = 0; j < gd.p; ++j) names.push_back("x" + std::to_string(j + 1));
    }
    if (static_cast<int>(names.size()) != gd.p)
        throw validation_error("variable name list length does not match column count");
    gd.names = std::move(names);
    gd.X = std::move(X);
    return gd;
}

inline GroupedDesign make_design(Eigen::MatrixXd X, const std::vector<int>& col_group_ids,
                                 std::vector<std::string> names = {}) {
    std::vector<std::string> labels;
    labels.reserve(col_group_ids.size());
    for (int g : col_group_ids) labels.push_back(std::to_string(g));
    return make_design(std::move(X), labels, std::move(names));
}

/// Builds a design from row records plus a per-column group label sequence.
inline GroupedDesign load_design(const std::vector<std::vector<double>>& rows,
                                 const std::vector<std::string>& col_group_labels,
                                 std::vector<std::string> names = {}) {
    if (rows.empty()) throw validation_error("no data rows");
    const std::size_t p = rows.front().size();
    if (p == 0) throw validation_error("rows must have at least one column");
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != p)
            throw validation_error("row " + std::to_string(i + 1) + " has " +
                                   std::to_string(rows[i].size()) + " values, expected " +
                                   std::to_string(p));
        for (std::size_t j = 0; j < p; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return make_design(std::move(X), col_group_labels, std::move(names));
}

/// Row-subset copy preserving grouping and names.
inline GroupedDesign subset_rows(const GroupedDesign& gd, const std::vector<int>& rows) {
    if (rows.empty()) throw validation_error("row subset is empty");
    Eigen::MatrixXd S(static_cast<Eigen::Index>(rows.size()), gd.p);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] < 0 || rows[i] >= gd.n) throw validation_error("row index out of range");
        S.row(static_cast<Eigen::Index>(i)) = gd.X.row(rows[i]);
    }
    std::vector<std::string> labels;
    labels.reserve(gd.p);
    for (int j = 0; j < gd.p; ++j) labels.push_back(gd.group_labels[gd.group_of[j] - 1]);
    return make_design(std::move(S), labels, gd.names);
}

// ============================================================================
// Thin SVD
// ============================================================================

/// Thin singular value decomposition M = U diag(d) V^T with the numerically
/// zero part dropped. d is strictly positive and non-increasing; U and V have
/// orthonormal columns. Deterministic for identical input, with the sign of
/// each V column fixed so its first nonzero entry is non-negative.
struct SvdCache {
    Eigen::MatrixXd U;   ///< n x r
    Eigen::VectorXd d;   ///< length r
    Eigen::MatrixXd V;   ///< k x r, k = columns decomposed
    int rank = 0;
};

/// Singular values below 1e-12 * d_max count as zero and are dropped.
inline SvdCache thin_svd(const Eigen::MatrixXd& M) {
    if (M.cols() < 1 || M.rows() < 1) throw validation_error("thin_svd: empty matrix");
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i)
            if (!std::isfinite(M(i, j))) throw validation_error("thin_svd: non-finite entry");

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double d_max = sv.size() > 0 ? sv[0] : 0.0;
    if (!(d_max > 0.0)) throw validation_error("thin_svd: rank zero");

    int r = 0;
    while (r < sv.size() && sv[r] > 1e-12 * d_max) ++r;

    SvdCache cache;
    cache.rank = r;
    cache.U = svd.matrixU().leftCols(r);
    cache.V = svd.matrixV().leftCols(r);
    cache.d = sv.head(r);
    for (int j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < cache.V.rows(); ++i) {
            if (cache.V(i, j) != 0.0) {
                if (cache.V(i, j) < 0.0) {
                    cache.V.col(j) = -cache.V.col(j);
                    cache.U.col(j) = -cache.U.col(j);
                }
                break;
            }
        }
    }
    return cache;
}

} // namespace sgb
