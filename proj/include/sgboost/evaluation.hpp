#pragma once
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sgboost/boosting.hpp"
#include "sgboost/design.hpp"
#include "sgboost/error.hpp"
#include "sgboost/rng.hpp"

namespace sgb {

// ============================================================================
// Coefficient-recovery metrics
// ============================================================================

/// (1/p) * sqrt(sum_j (beta_j - betahat_j)^2). The 1/p factor sits outside
/// the square root.
inline double rmse(const Eigen::VectorXd& beta_true, const Eigen::VectorXd& beta_hat) {
    if (beta_true.size() != beta_hat.size()) throw validation_error("rmse: length mismatch");
    if (beta_true.size() == 0) throw validation_error("rmse: empty vectors");
    return std::sqrt((beta_true - beta_hat).squaredNorm()) / static_cast<double>(beta_true.size());
}

struct DetectionRates {
    std::optional<double> correct_effects;  ///< absent when beta_true has no nonzeros
    std::optional<double> correct_zeros;    ///< absent when beta_true has no zeros
    double correct_classified = 0.0;        ///< (TP + TN) / p
};

/// Selection indicator: |betahat_j| > zero_tol. Boosting never touches an
/// unselected column, so the default tolerance of 0 means "ever updated".
inline DetectionRates detection_rates(const Eigen::VectorXd& beta_true,
                                      const Eigen::VectorXd& beta_hat, double zero_tol = 0.0) {
    if (beta_true.size() != beta_hat.size()) throw validation_error("detection_rates: length mismatch");
    if (zero_tol < 0.0) throw validation_error("detection_rates: zero_tol must be >= 0");
    long tp = 0, tn = 0, n_eff = 0, n_zero = 0;
    for (Eigen::Index j = 0; j < beta_true.size(); ++j) {
        const bool truth = beta_true[j] != 0.0;
        const bool picked = std::abs(beta_hat[j]) > zero_tol;
        if (truth) {
            ++n_eff;
            if (picked) ++tp;
        } else {
            ++n_zero;
            if (!picked) ++tn;
        }
    }
    DetectionRates out;
    if (n_eff > 0) out.correct_effects = static_cast<double>(tp) / n_eff;
    if (n_zero > 0) out.correct_zeros = static_cast<double>(tn) / n_zero;
    out.correct_classified = static_cast<double>(tp + tn) / static_cast<double>(beta_true.size());
    return out;
}

/// Rank-statistic AUC; tied scores contribute 1/2 per pair.
inline double auc(const std::vector<int>& labels, const Eigen::VectorXd& scores) {
    if (static_cast<Eigen::Index>(labels.size()) != scores.size())
        throw validation_error("auc: length mismatch");
    const std::size_t n = labels.size();
    long n1 = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw validation_error("auc: labels must be 0/1");
        n1 += l;
    }
    const long n0 = static_cast<long>(n) - n1;
    if (n1 == 0 || n0 == 0) throw validation_error("auc: both classes required");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[static_cast<Eigen::Index>(a)] < scores[static_cast<Eigen::Index>(b)]; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[static_cast<Eigen::Index>(order[j + 1])] == scores[static_cast<Eigen::Index>(order[i])]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    return (rank_sum_pos - static_cast<double>(n1) * (n1 + 1) / 2.0) /
           (static_cast<double>(n1) * static_cast<double>(n0));
}

// ============================================================================
// Cross-validation
// ============================================================================

struct CvResult {
    std::vector<double> mean_risk;  ///< index m-1 holds the risk after m iterations
    int best_m = 1;                 ///< argmin, ties to the smallest m
    std::vector<int> fold_of;      ///< per observation, 0..k-1
    Loss risk_type = Loss::l2;
};

/// k-fold cross-validation of the boosting trajectory: fit each training
/// fold with the unchanged config and record the held-out risk after every
/// iteration. Risk is mean squared error for l2 and mean negative
/// log-likelihood for logistic. Fold assignment is a seeded shuffle with
/// fold sizes differing by at most one.
inline CvResult kfold_cv(const GroupedDesign& gd, const Eigen::VectorXd& y,
                         const BoostConfig& config, int k, std::uint64_t seed) {
    validate(config);
    if (k < 2) throw validation_error("kfold_cv: k must be >= 2");
    if (k > gd.n) throw validation_error("kfold_cv: k exceeds the number of observations");
    if (y.size() != gd.n) throw validation_error("kfold_cv: outcome length mismatch");

    std::vector<int> order(gd.n);
    std::iota(order.begin(), order.end(), 0);
    auto eng = make_engine(seed);
    std::shuffle(order.begin(), order.end(), eng);

    CvResult cv;
    cv.risk_type = config.loss;
    cv.fold_of.assign(gd.n, -1);
    cv.mean_risk.assign(config.iterations, 0.0);

    for (int fold = 0; fold < k; ++fold) {
        const int lo = static_cast<int>(static_cast<long long>(fold) * gd.n / k);
        const int hi = static_cast<int>(static_cast<long long>(fold + 1) * gd.n / k);
        std::vector<int> val(order.begin() + lo, order.begin() + hi);
        std::vector<int> train;
        train.reserve(gd.n - (hi - lo));
        for (int pos = 0; pos < gd.n; ++pos)
            if (pos < lo || pos >= hi) train.push_back(order[pos]);
        for (int idx : val) cv.fold_of[idx] = fold;

        GroupedDesign train_gd = subset_rows(gd, train);
        Eigen::VectorXd y_train(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) y_train[static_cast<Eigen::Index>(i)] = y[train[i]];
        Eigen::VectorXd y_val(val.size());
        Eigen::MatrixXd X_val(static_cast<Eigen::Index>(val.size()), gd.p);
        for (std::size_t i = 0; i < val.size(); ++i) {
            y_val[static_cast<Eigen::Index>(i)] = y[val[i]];
            X_val.row(static_cast<Eigen::Index>(i)) = gd.X.row(val[i]);
        }

        FitResult r;
        try {
            r = fit(train_gd, y_train, config);
        } catch (const validation_error& e) {
            throw validation_error("fold " + std::to_string(fold + 1) + ": " + e.what());
        }

        Eigen::VectorXd f_val = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(val.size()), r.offset);
        for (int m = 0; m < config.iterations; ++m) {
            const auto& cols = r.learners[r.selected[m]].columns;
            for (std::size_t c = 0; c < cols.size(); ++c)
                f_val += r.increments[m][static_cast<Eigen::Index>(c)] * X_val.col(cols[c]);
            const double risk = config.loss == Loss::l2
                                    ? (y_val - f_val).squaredNorm() / static_cast<double>(val.size())
                                    : loss_value(Loss::logistic, y_val, f_val) / static_cast<double>(val.size());
            cv.mean_risk[m] += risk;
        }
    }
    for (double& v : cv.mean_risk) v /= static_cast<double>(k);
    cv.best_m = 1;
    for (int m = 2; m <= config.iterations; ++m)
        if (cv.mean_risk[m - 1] < cv.mean_risk[cv.best_m - 1]) cv.best_m = m;
    return cv;
}

struct AlphaCell {
    double alpha = 0.0;
    int best_m = 1;
    double cv_risk = 0.0;
};

/// One kfold_cv per mixing parameter, same seed (hence same folds) for all.
inline std::vector<AlphaCell> alpha_grid_search(const GroupedDesign& gd, const Eigen::VectorXd& y,
                                                const BoostConfig& base, const std::vector<double>& alphas,
                                                int k, std::uint64_t seed) {
    if (alphas.empty()) throw validation_error("alpha_grid_search: empty alpha grid");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] >= 0.0 && alphas[i] <= 1.0)) throw validation_error("alpha_grid_search: alpha out of [0,1]");
        for (std::size_t j = i + 1; j < alphas.size(); ++j)
            if (alphas[i] == alphas[j]) throw validation_error("alpha_grid_search: duplicate alpha values");
    }
    std::vector<AlphaCell> table;
    table.reserve(alphas.size());
    for (double a : alphas) {
        BoostConfig cfg = base;
        cfg.alpha = a;
        const CvResult cv = kfold_cv(gd, y, cfg, k, seed);
        table.push_back({a, cv.best_m, cv.mean_risk[cv.best_m - 1]});
    }
    return table;
}

/// Row with minimal cv risk; ties go to the smaller alpha.
inline const AlphaCell& best_alpha(const std::vector<AlphaCell>& table) {
    if (table.empty()) throw validation_error("best_alpha: empty table");
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.size(); ++i)
        if (table[i].cv_risk < table[best].cv_risk ||
            (table[i].cv_risk == table[best].cv_risk && table[i].alpha < table[best].alpha))
            best = i;
    return table[best];
}

} // namespace sgb
