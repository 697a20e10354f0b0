#pragma once
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgboost/design.hpp"
#include "sgboost/error.hpp"
#include "sgboost/parallel.hpp"
#include "sgboost/ridge.hpp"

namespace sgb {

// ============================================================================
// Configuration
// ============================================================================

enum class Variant { componentwise, groupwise, sgb_df, sgb_lambda };
enum class Loss { l2, logistic };

inline std::string variant_name(Variant v) {
    switch (v) {
        case Variant::componentwise: return "componentwise";
        case Variant::groupwise: return "groupwise";
        case Variant::sgb_df: return "sgb-df";
        case Variant::sgb_lambda: return "sgb-lambda";
    }
    return "?";
}

struct BoostConfig {
    Variant variant = Variant::sgb_df;
    double alpha = 0.5;            ///< mixing parameter in [0,1]
    double lambda_base = 0.0;      ///< shared penalty scale, sgb-lambda only
    double eta = 0.1;              ///< learning rate in (0,1]
    int iterations = 100;          ///< M >= 1
    Loss loss = Loss::l2;
    double baseline_df = 0.5;      ///< per-learner df for the pure variants
    int threads = 1;
};

inline void validate(const BoostConfig& c) {
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw validation_error("alpha must be in [0,1]");
    if (!(c.eta > 0.0 && c.eta <= 1.0)) throw validation_error("eta must be in (0,1]");
    if (c.iterations < 1) throw validation_error("iterations must be >= 1");
    if (c.variant == Variant::sgb_lambda && !(c.lambda_base > 0.0))
        throw validation_error("sgb-lambda requires a positive lambda_base");
    if (!(c.baseline_df > 0.0)) throw validation_error("baseline_df must be positive");
}

// ============================================================================
// Base-learners
// ============================================================================

/// individual: one column; group: all columns of a group with >= 2 members;
/// singleton: the single learner emitted for a one-column group.
enum class LearnerKind { individual, group, singleton };

struct LearnerSpec {
    LearnerKind kind = LearnerKind::individual;
    int group = 0;                     ///< 1..G
    std::vector<int> columns;          ///< ascending column ids
    double lambda = 0.0;
    std::optional<double> df_target;   ///< absent under sgb-lambda
    SvdCache svd;
    Eigen::VectorXd shrink;            ///< d_j^2/(d_j^2+lambda), cached
    int order_index = 0;               ///< individuals in column order, then groups in group order
};

namespace detail {

inline LearnerSpec make_learner(const GroupedDesign& gd, LearnerKind kind, int group,
                                std::vector<int> columns, double lambda,
                                std::optional<double> df_target) {
    LearnerSpec spec;
    spec.kind = kind;
    spec.group = group;
    spec.columns = std::move(columns);
    Eigen::MatrixXd M(gd.n, static_cast<Eigen::Index>(spec.columns.size()));
    for (std::size_t k = 0; k < spec.columns.size(); ++k) M.col(static_cast<Eigen::Index>(k)) = gd.X.col(spec.columns[k]);
    spec.svd = thin_svd(M);
    spec.lambda = lambda;
    spec.df_target = df_target;
    spec.shrink.resize(spec.svd.rank);
    for (int j = 0; j < spec.svd.rank; ++j) {
        const double d2 = spec.svd.d[j] * spec.svd.d[j];
        spec.shrink[j] = d2 / (d2 + lambda);
    }
    return spec;
}

/// Penalty matching an effective-df target on the learner's singular values.
/// target = rank maps to lambda = 0.
inline double penalty_for_df(const Eigen::VectorXd& d, double target) {
    if (d.size() == 1) {
        if (target > 1.0) throw validation_error("df target exceeds rank");
        return lambda_for_df_single(d[0], target);
    }
    return lambda_for_df(d, target);
}

} // namespace detail

/// Assembles the learner set for a variant.
///
/// sgb-df ties the penalties to the mixing parameter: individual learners get
/// df = alpha, group learners df = 1 - alpha, and a one-column group collapses
/// to a single learner with df = max(alpha, 1-alpha). alpha = 1 emits only
/// individual learners, alpha = 0 only group-side learners.
///
/// sgb-lambda scales a shared penalty: lambda_j = alpha * lambda_base for
/// columns, mu_g = (1-alpha) * lambda_base * sqrt(p_g) for groups; a
/// one-column group gets the smaller of its two candidate penalties.
///
/// The pure variants use baseline_df for every learner.
inline std::vector<LearnerSpec> build_learners(const GroupedDesign& gd, const BoostConfig& config) {
    validate(config);
    for (int j = 0; j < gd.p; ++j)
        if (!(gd.X.col(j).norm() > 0.0))
            throw validation_error("zero-variance column: " + gd.names[j]);

    const double alpha = config.alpha;
    std::vector<LearnerSpec> learners;

    auto add_individual_side = [&](int j) {
        const int g = gd.group_of[j];
        const bool single = gd.group_size(g) == 1;
        switch (config.variant) {
            case Variant::componentwise:
                learners.push_back(detail::make_learner(gd, LearnerKind::individual, g, {j},
                                                        detail::penalty_for_df(thin_svd(gd.X.col(j)).d, config.baseline_df),
                                                        config.baseline_df));
                break;
            case Variant::sgb_df: {
                if (single) {
                    const double t = std::max(alpha, 1.0 - alpha);
                    const double d = gd.X.col(j).norm();
                    learners.push_back(detail::make_learner(gd, LearnerKind::singleton, g, {j},
                                                            lambda_for_df_single(d, t), t));
                } else if (alpha > 0.0) {
                    const double d = gd.X.col(j).norm();
                    learners.push_back(detail::make_learner(gd, LearnerKind::individual, g, {j},
                                                            lambda_for_df_single(d, alpha), alpha));
                }
                break;
            }
            case Variant::sgb_lambda: {
                if (single) {
                    const double lam = std::min(alpha, 1.0 - alpha) * config.lambda_base;
                    learners.push_back(detail::make_learner(gd, LearnerKind::singleton, g, {j}, lam, std::nullopt));
                } else {
                    learners.push_back(detail::make_learner(gd, LearnerKind::individual, g, {j},
                                                            alpha * config.lambda_base, std::nullopt));
                }
                break;
            }
            case Variant::groupwise:
                break;
        }
    };

    auto add_group_side = [&](int g) {
        const auto& cols = gd.group_cols[g - 1];
        switch (config.variant) {
            case Variant::groupwise: {
                Eigen::MatrixXd M(gd.n, static_cast<Eigen::Index>(cols.size()));
                for (std::size_t k = 0; k < cols.size(); ++k) M.col(static_cast<Eigen::Index>(k)) = gd.X.col(cols[k]);
                const double lam = detail::penalty_for_df(thin_svd(M).d, config.baseline_df);
                learners.push_back(detail::make_learner(gd, LearnerKind::group, g, cols, lam, config.baseline_df));
                break;
            }
            case Variant::sgb_df: {
                if (cols.size() == 1 || alpha >= 1.0) break;
                Eigen::MatrixXd M(gd.n, static_cast<Eigen::Index>(cols.size()));
                for (std::size_t k = 0; k < cols.size(); ++k) M.col(static_cast<Eigen::Index>(k)) = gd.X.col(cols[k]);
                const double t = 1.0 - alpha;
                const double mu = detail::penalty_for_df(thin_svd(M).d, t);
                learners.push_back(detail::make_learner(gd, LearnerKind::group, g, cols, mu, t));
                break;
            }
            case Variant::sgb_lambda: {
                if (cols.size() == 1) break;
                const double mu = (1.0 - alpha) * config.lambda_base * std::sqrt(static_cast<double>(cols.size()));
                learners.push_back(detail::make_learner(gd, LearnerKind::group, g, cols, mu, std::nullopt));
                break;
            }
            case Variant::componentwise:
                break;
        }
    };

    if (config.variant != Variant::groupwise)
        for (int j = 0; j < gd.p; ++j) add_individual_side(j);
    if (config.variant != Variant::componentwise)
        for (int g = 1; g <= gd.G; ++g) add_group_side(g);

    if (learners.empty()) throw validation_error("learner set is empty");
    for (std::size_t i = 0; i < learners.size(); ++i) learners[i].order_index = static_cast<int>(i);
    return learners;
}

// ============================================================================
// Loss plumbing
// ============================================================================

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// log(1 + exp(x)) without overflow
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double init_offset(Loss loss, const Eigen::VectorXd& y) {
    if (y.size() == 0) throw validation_error("init_offset: empty outcome");
    if (loss == Loss::l2) return y.mean();
    bool has0 = false, has1 = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] == 0.0) has0 = true;
        else if (y[i] == 1.0) has1 = true;
        else throw validation_error("logistic loss requires outcomes in {0,1}");
    }
    if (!has0 || !has1) throw validation_error("logistic loss requires both classes present");
    const double m = y.mean();
    return std::log(m / (1.0 - m));
}

/// Negative loss gradient at the current fit.
inline Eigen::VectorXd pseudo_residuals(Loss loss, const Eigen::VectorXd& y, const Eigen::VectorXd& f) {
    if (y.size() != f.size()) throw validation_error("pseudo_residuals: length mismatch");
    if (loss == Loss::l2) return y - f;
    Eigen::VectorXd u(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) u[i] = y[i] - sigmoid(f[i]);
    return u;
}

inline double loss_value(Loss loss, const Eigen::VectorXd& y, const Eigen::VectorXd& f) {
    if (loss == Loss::l2) return (y - f).squaredNorm();
    double s = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) s += softplus(f[i]) - y[i] * f[i];
    return s;
}

// ============================================================================
// The boosting loop
// ============================================================================

namespace detail {

inline bool rss_tie(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max({1.0, a, b});
}

/// RSS of every learner's ridge fit to u; winner is the minimum, ties broken
/// by the lowest order index. Evaluations are independent, so the scan over
/// the filled vector keeps the result identical for any worker count.
inline int select_learner(const std::vector<LearnerSpec>& learners, const Eigen::VectorXd& u,
                          int threads, std::vector<double>& rss_out) {
    rss_out.assign(learners.size(), 0.0);
    parallel_for(learners.size(), threads, [&](std::size_t i) {
        const LearnerSpec& lr = learners[i];
        Eigen::VectorXd c = lr.svd.U.transpose() * u;
        Eigen::VectorXd fitted = lr.svd.U * c.cwiseProduct(lr.shrink);
        rss_out[i] = (u - fitted).squaredNorm();
    });
    int winner = 0;
    for (std::size_t i = 1; i < learners.size(); ++i)
        if (rss_out[i] < rss_out[winner] && !rss_tie(rss_out[i], rss_out[winner]))
            winner = static_cast<int>(i);
    return winner;
}

} // namespace detail

struct StepOutcome {
    int winner = 0;             ///< order index of the selected learner
    double rss = 0.0;           ///< RSS of its fit to the pseudo-residuals
    Eigen::VectorXd coef;       ///< unscaled ridge coefficients on its columns
};

/// One selection round: fits every learner to the pseudo-residuals, picks
/// the minimum-RSS fit (ties to the lowest order index) and returns its
/// coefficients. The caller applies the learning rate.
inline StepOutcome boost_step(const std::vector<LearnerSpec>& learners, const Eigen::VectorXd& u,
                              int threads = 1) {
    if (learners.empty()) throw validation_error("boost_step: no learners");
    std::vector<double> rss(learners.size());
    StepOutcome out;
    out.winner = detail::select_learner(learners, u, threads, rss);
    out.rss = rss[static_cast<std::size_t>(out.winner)];
    out.coef = ridge_fit(learners[static_cast<std::size_t>(out.winner)].svd, u,
                         learners[static_cast<std::size_t>(out.winner)].lambda);
    return out;
}

struct FitResult {
    struct LearnerRef {
        LearnerKind kind;
        int group;
        std::vector<int> columns;
    };

    double offset = 0.0;
    double eta = 0.0;
    Loss loss = Loss::l2;
    int p = 0;
    int m_used = 0;
    std::vector<int> group_of;                   ///< per column, 1..G
    std::vector<LearnerRef> learners;
    std::vector<int> selected;                   ///< per iteration, order index
    std::vector<Eigen::VectorXd> increments;     ///< per iteration, eta * coefficient update
    std::vector<double> train_loss;              ///< loss after each iteration
    std::vector<double> train_rss_of_selected;   ///< RSS of the winning fit to the pseudo-residuals

    /// Dense coefficients after m iterations; beta_at(0) is all zero.
    Eigen::VectorXd beta_at(int m) const {
        if (m < 0 || m > m_used) throw validation_error("beta_at: m out of range");
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
        for (int it = 0; it < m; ++it) {
            const auto& cols = learners[selected[it]].columns;
            for (std::size_t k = 0; k < cols.size(); ++k) beta[cols[k]] += increments[it][static_cast<Eigen::Index>(k)];
        }
        return beta;
    }
};

/// Runs the full gradient-descent loop for exactly M iterations (early
/// stopping is the caller's job, via cross-validation). Deterministic for
/// identical inputs regardless of thread count.
inline FitResult fit(const GroupedDesign& gd, const Eigen::VectorXd& y, const BoostConfig& config) {
    validate(config);
    if (y.size() != gd.n) throw validation_error("fit: outcome length does not match design");
    if (gd.n < 2) throw validation_error("fit: need at least 2 observations");

    const auto learners = build_learners(gd, config);
    FitResult result;
    result.offset = init_offset(config.loss, y);
    result.eta = config.eta;
    result.loss = config.loss;
    result.p = gd.p;
    result.group_of = gd.group_of;
    result.learners.reserve(learners.size());
    for (const auto& lr : learners) result.learners.push_back({lr.kind, lr.group, lr.columns});

    Eigen::VectorXd f = Eigen::VectorXd::Constant(gd.n, result.offset);
    std::vector<double> rss_buf;
    for (int m = 0; m < config.iterations; ++m) {
        const Eigen::VectorXd u = pseudo_residuals(config.loss, y, f);
        const int win = detail::select_learner(learners, u, config.threads, rss_buf);
        const LearnerSpec& lr = learners[win];
        Eigen::VectorXd coef = ridge_fit(lr.svd, u, lr.lambda);
        for (std::size_t k = 0; k < lr.columns.size(); ++k)
            f += config.eta * coef[static_cast<Eigen::Index>(k)] * gd.X.col(lr.columns[k]);
        result.selected.push_back(win);
        result.increments.push_back(config.eta * coef);
        result.train_rss_of_selected.push_back(rss_buf[static_cast<std::size_t>(win)]);
        result.train_loss.push_back(loss_value(config.loss, y, f));
    }
    result.m_used = config.iterations;
    return result;
}

/// offset + Xnew * beta_at(m); logistic fits can be mapped to (0,1).
inline Eigen::VectorXd predict(const FitResult& result, const Eigen::MatrixXd& Xnew, int m,
                               bool response_scale = false) {
    if (Xnew.cols() != result.p) throw validation_error("predict: column count mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Constant(Xnew.rows(), result.offset);
    out += Xnew * result.beta_at(m);
    if (response_scale && result.loss == Loss::logistic)
        for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = sigmoid(out[i]);
    return out;
}

struct PathRow {
    int iteration;   ///< 1..m_used
    int variable;    ///< 0-based column
    int group;       ///< 1..G
    double value;
};

/// Dense coefficient table, one row per (iteration, variable).
inline std::vector<PathRow> coefficient_paths(const FitResult& result) {
    std::vector<PathRow> rows;
    rows.reserve(static_cast<std::size_t>(result.m_used) * static_cast<std::size_t>(result.p));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(result.p);
    for (int m = 0; m < result.m_used; ++m) {
        const auto& cols = result.learners[result.selected[m]].columns;
        for (std::size_t k = 0; k < cols.size(); ++k) beta[cols[k]] += result.increments[m][static_cast<Eigen::Index>(k)];
        for (int j = 0; j < result.p; ++j)
            rows.push_back({m + 1, j, result.group_of[j], beta[j]});
    }
    return rows;
}

struct FirstSelection {
    LearnerKind kind;
    int order_index;
};

/// Runs exactly one boosting step and reports which learner won.
inline FirstSelection first_step_selection(const GroupedDesign& gd, const Eigen::VectorXd& y,
                                           const BoostConfig& config) {
    BoostConfig one = config;
    one.iterations = 1;
    const FitResult r = fit(gd, y, one);
    const int win = r.selected.front();
    return {r.learners[win].kind, win};
}

} // namespace sgb
