#pragma once
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "sgboost/design.hpp"
#include "sgboost/error.hpp"

namespace sgb {

// ============================================================================
// Degrees of freedom
// ============================================================================

/// Per-direction weight of the one-step ridge smoother in the RSS expansion:
/// 2*d^2/(d^2+lambda) - d^4/(d^2+lambda)^2.
inline double df_weight(double d2, double lambda) {
    const double s = d2 / (d2 + lambda);
    return 2.0 * s - s * s;
}

/// Effective degrees of freedom tr(2H - H^T H) of ridge regression with the
/// given singular values. Equals the rank at lambda = 0 and is strictly
/// decreasing in lambda.
inline double effective_df(const Eigen::VectorXd& d, double lambda) {
    if (d.size() == 0) throw validation_error("effective_df: empty singular values");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw validation_error("effective_df: lambda must be finite and >= 0");
    double sum = 0.0;
    for (Eigen::Index j = 0; j < d.size(); ++j) {
        if (!(d[j] > 0.0)) throw validation_error("effective_df: singular values must be positive");
        sum += df_weight(d[j] * d[j], lambda);
    }
    return sum;
}

/// Trace degrees of freedom tr(H) = sum d_j^2/(d_j^2+lambda).
inline double trace_df(const Eigen::VectorXd& d, double lambda) {
    if (d.size() == 0) throw validation_error("trace_df: empty singular values");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw validation_error("trace_df: lambda must be finite and >= 0");
    double sum = 0.0;
    for (Eigen::Index j = 0; j < d.size(); ++j) sum += d[j] * d[j] / (d[j] * d[j] + lambda);
    return sum;
}

// ============================================================================
// Penalty from a degrees-of-freedom target
// ============================================================================

/// Closed form for a single column with singular value d:
/// lambda = d^2 * ((1 - target) + sqrt(1 - target)) / target,
/// the non-negative root of the df quadratic. target = 1 gives lambda = 0.
inline double lambda_for_df_single(double d, double target) {
    if (!(d > 0.0)) throw validation_error("lambda_for_df_single: d must be positive");
    if (!(target > 0.0) || !(target <= 1.0))
        throw validation_error("lambda_for_df_single: target must be in (0, 1]");
    const double one_minus = 1.0 - target;
    return d * d * (one_minus + std::sqrt(one_minus)) / target;
}

/// Monotone bisection for effective_df(d, lambda) = target. The bracket upper
/// bound grows by doubling from d_1^2 until the df falls below target.
/// Converges to |df - target| <= 1e-12 (well inside the 1e-10 contract) or
/// throws.
inline double lambda_for_df(const Eigen::VectorXd& d, double target) {
    if (d.size() == 0) throw validation_error("lambda_for_df: empty singular values");
    const double r = static_cast<double>(d.size());
    if (!(target > 0.0)) throw validation_error("lambda_for_df: target must be positive");
    if (target >= r) throw validation_error("lambda_for_df: target exceeds rank");

    constexpr double tol = 1e-12;
    double lo = 0.0;
    double hi = d[0] * d[0];
    int grow = 0;
    while (effective_df(d, hi) >= target) {
        hi *= 2.0;
        if (++grow > 200) throw numeric_error("lambda_for_df: bracket growth failed");
    }
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;  // interval exhausted at double precision
        const double v = effective_df(d, mid);
        if (std::abs(v - target) <= tol) return mid;
        if (v > target) lo = mid; else hi = mid;
    }
    const double last = 0.5 * (lo + hi);
    if (std::abs(effective_df(d, last) - target) <= 1e-10) return last;
    throw numeric_error("lambda_for_df: bisection did not converge");
}

// ============================================================================
// Ridge estimates and residual sums of squares, all through the SVD
// ============================================================================

/// Ridge coefficients V diag(d_j/(d_j^2+lambda)) U^T y. No explicit inverse.
inline Eigen::VectorXd ridge_fit(const SvdCache& svd, const Eigen::VectorXd& y, double lambda) {
    if (svd.U.rows() != y.size()) throw validation_error("ridge_fit: row count mismatch");
    if (!(lambda >= 0.0)) throw validation_error("ridge_fit: lambda must be >= 0");
    if (lambda == 0.0 && svd.rank < svd.V.rows())
        throw validation_error("ridge_fit: lambda = 0 requires full column rank");
    Eigen::VectorXd c = svd.U.transpose() * y;
    for (int j = 0; j < svd.rank; ++j) c[j] *= svd.d[j] / (svd.d[j] * svd.d[j] + lambda);
    return svd.V * c;
}

inline Eigen::VectorXd ridge_fit(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, double lambda) {
    return ridge_fit(thin_svd(M), y, lambda);
}

/// RSS after one ridge step:
/// y^T y - sum_j [2 d_j^2/(d_j^2+lambda) - d_j^4/(d_j^2+lambda)^2] (u_j^T y)^2.
inline double rss_one_step(const SvdCache& svd, const Eigen::VectorXd& y, double lambda) {
    if (svd.U.rows() != y.size()) throw validation_error("rss_one_step: row count mismatch");
    Eigen::VectorXd c = svd.U.transpose() * y;
    double explained = 0.0;
    for (int j = 0; j < svd.rank; ++j) explained += df_weight(svd.d[j] * svd.d[j], lambda) * c[j] * c[j];
    return y.squaredNorm() - explained;
}

inline double rss_one_step(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, double lambda) {
    return rss_one_step(thin_svd(M), y, lambda);
}

/// RSS after m boosting steps of the same ridge learner at learning rate 1:
/// y^T (I - H(m))^2 y with H(m) = sum_j (1-(1-d~_j)^{m+1}) u_j u_j^T.
inline double boosted_rss(const SvdCache& svd, const Eigen::VectorXd& y, double lambda, int m) {
    if (m < 0) throw validation_error("boosted_rss: m must be >= 0");
    if (svd.U.rows() != y.size()) throw validation_error("boosted_rss: row count mismatch");
    Eigen::VectorXd c = svd.U.transpose() * y;
    double explained = 0.0;
    for (int j = 0; j < svd.rank; ++j) {
        const double shrink = svd.d[j] * svd.d[j] / (svd.d[j] * svd.d[j] + lambda);
        const double residual_factor = std::pow(1.0 - shrink, m + 1);
        explained += (1.0 - residual_factor * residual_factor) * c[j] * c[j];
    }
    return y.squaredNorm() - explained;
}

inline double boosted_rss(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, double lambda, int m) {
    return boosted_rss(thin_svd(M), y, lambda, m);
}

} // namespace sgb
