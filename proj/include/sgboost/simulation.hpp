#pragma once
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgboost/boosting.hpp"
#include "sgboost/design.hpp"
#include "sgboost/error.hpp"
#include "sgboost/evaluation.hpp"
#include "sgboost/parallel.hpp"
#include "sgboost/rng.hpp"

namespace sgb {

// ============================================================================
// Scenario catalogue
// ============================================================================

/// One benchmark setting: counts of fully active, half active and inactive
/// groups, their sizes, the constant pairwise correlation of the design and
/// the sample size. A half group carries min(5, half_vars) active entries.
struct Scenario {
    int id = 0;
    int full_groups = 0, half_groups = 0, empty_groups = 0;
    int full_vars = 0, half_vars = 0, empty_vars = 0;
    double cor = 0.0;
    int n = 0;

    int total_columns() const {
        return full_groups * full_vars + half_groups * half_vars + empty_groups * empty_vars;
    }
    int total_groups() const { return full_groups + half_groups + empty_groups; }
};

inline void validate(const Scenario& s) {
    if (s.full_groups < 0 || s.half_groups < 0 || s.empty_groups < 0 ||
        s.full_vars < 0 || s.half_vars < 0 || s.empty_vars < 0)
        throw validation_error("scenario: counts must be non-negative");
    if (s.total_groups() < 1 || s.total_columns() < 1) throw validation_error("scenario: needs at least one group");
    if (s.n < 2) throw validation_error("scenario: n must be >= 2");
    if (!(s.cor >= 0.0 && s.cor < 1.0)) throw validation_error("scenario: cor must be in [0,1)");
}

/// The twelve built-in benchmark rows.
inline std::vector<Scenario> builtin_scenarios() {
    return {
        {1, 5, 5, 5, 15, 15, 15, 0.0, 50},
        {2, 5, 5, 5, 5, 5, 15, 0.0, 50},
        {3, 5, 5, 5, 5, 15, 5, 0.0, 50},
        {4, 5, 5, 5, 15, 5, 5, 0.0, 50},
        {5, 2, 2, 5, 15, 15, 15, 0.0, 50},
        {6, 5, 2, 2, 15, 15, 15, 0.0, 50},
        {7, 2, 5, 2, 15, 15, 15, 0.0, 50},
        {8, 0, 0, 5, 0, 0, 15, 0.0, 50},
        {9, 5, 0, 0, 15, 0, 0, 0.0, 50},
        {10, 5, 5, 5, 15, 15, 15, 0.0, 500},
        {11, 5, 5, 5, 15, 15, 15, 0.5, 50},
        {12, 5, 5, 5, 15, 15, 15, 0.95, 50},
    };
}

inline Scenario builtin_scenario(int id) {
    for (const auto& s : builtin_scenarios())
        if (s.id == id) return s;
    throw validation_error("unknown scenario id: " + std::to_string(id));
}

// ============================================================================
// Data generation
// ============================================================================

struct SimData {
    GroupedDesign gd;
    Eigen::VectorXd beta_true;
    Eigen::VectorXd y;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Draws X with standard normal marginals and constant pairwise correlation
/// via a single common factor, sets the active coefficients to 1, and scales
/// the noise so that sd(X beta) / sigma = 4 on the realized signal. A
/// scenario without any effect yields pure noise y with sigma = 1.
inline SimData generate(const Scenario& s, std::uint64_t seed) {
    validate(s);
    const int p = s.total_columns();
    auto eng = make_engine(seed);

    Eigen::MatrixXd X(s.n, p);
    const Eigen::VectorXd common = gaussian_vector(eng, s.n);
    const double w_common = std::sqrt(s.cor);
    const double w_own = std::sqrt(1.0 - s.cor);
    for (int j = 0; j < p; ++j) X.col(j) = w_common * common + w_own * gaussian_vector(eng, s.n);

    std::vector<int> group_ids(p);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    int col = 0, gid = 1;
    for (int g = 0; g < s.full_groups; ++g, ++gid)
        for (int j = 0; j < s.full_vars; ++j, ++col) {
            group_ids[col] = gid;
            beta[col] = 1.0;
        }
    for (int g = 0; g < s.half_groups; ++g, ++gid) {
        const int active = std::min(5, s.half_vars);
        for (int j = 0; j < s.half_vars; ++j, ++col) {
            group_ids[col] = gid;
            if (j < active) beta[col] = 1.0;
        }
    }
    for (int g = 0; g < s.empty_groups; ++g, ++gid)
        for (int j = 0; j < s.empty_vars; ++j, ++col) group_ids[col] = gid;

    SimData data;
    data.seed = seed;
    data.beta_true = beta;
    const Eigen::VectorXd noise = gaussian_vector(eng, s.n);
    if ((beta.array() != 0.0).any()) {
        const Eigen::VectorXd signal = X * beta;
        const double sd = std::sqrt((signal.array() - signal.mean()).square().sum() /
                                    static_cast<double>(s.n - 1));
        if (!(sd > 0.0)) throw numeric_error("generate: degenerate signal");
        data.sigma = sd / 4.0;
        data.y = signal + data.sigma * noise;
    } else {
        data.sigma = 1.0;
        data.y = noise;
    }
    data.gd = make_design(std::move(X), group_ids);
    return data;
}

// ============================================================================
// Experiment sweep
// ============================================================================

struct ResultRow {
    int scenario = 0;
    int rep = 0;  ///< 1-based
    std::string model;
    double alpha = 0.0;
    std::optional<double> lambda_base;
    std::optional<int> best_m;
    std::optional<double> rmse;
    std::optional<double> correct_effects;
    std::optional<double> correct_zeros;
    std::optional<double> correct_classified;
    std::string error;  ///< empty on success
};

/// Full factorial sweep over (scenario, rep, model, alpha): generate a
/// dataset (rep r reuses seed + r - 1), pick the stopping iteration with
/// k-fold cross-validation, refit on the whole data and score the truncated
/// coefficient vector. Cells are independent jobs; rows come back in
/// canonical order whatever the thread count. A failing cell records its
/// error and never aborts the sweep.
inline std::vector<ResultRow> run_experiment(const std::vector<Scenario>& scenarios,
                                             const std::vector<BoostConfig>& models,
                                             const std::vector<double>& alphas, int reps,
                                             std::uint64_t seed, int cv_folds = 3, int threads = 1) {
    if (scenarios.empty() || models.empty() || alphas.empty() || reps < 1)
        throw validation_error("run_experiment: empty factor");
    const std::size_t cells = scenarios.size() * static_cast<std::size_t>(reps) * models.size() * alphas.size();
    std::vector<ResultRow> rows(cells);

    parallel_for(cells, threads, [&](std::size_t idx) {
        std::size_t rest = idx;
        const std::size_t ai = rest % alphas.size();
        rest /= alphas.size();
        const std::size_t mi = rest % models.size();
        rest /= models.size();
        const int rep = static_cast<int>(rest % static_cast<std::size_t>(reps));
        const std::size_t si = rest / static_cast<std::size_t>(reps);

        ResultRow& row = rows[idx];
        row.scenario = scenarios[si].id;
        row.rep = rep + 1;
        BoostConfig cfg = models[mi];
        cfg.alpha = alphas[ai];
        cfg.threads = 1;  // the sweep parallelizes across cells
        row.model = variant_name(cfg.variant);
        row.alpha = cfg.alpha;
        if (cfg.variant == Variant::sgb_lambda) row.lambda_base = cfg.lambda_base;
        try {
            const SimData data = generate(scenarios[si], seed + static_cast<std::uint64_t>(rep));
            const CvResult cv = kfold_cv(data.gd, data.y, cfg, cv_folds,
                                         mix_seed(seed + static_cast<std::uint64_t>(rep)));
            const FitResult refit = fit(data.gd, data.y, cfg);
            const Eigen::VectorXd beta_hat = refit.beta_at(cv.best_m);
            const DetectionRates det = detection_rates(data.beta_true, beta_hat);
            row.best_m = cv.best_m;
            row.rmse = rmse(data.beta_true, beta_hat);
            row.correct_effects = det.correct_effects;
            row.correct_zeros = det.correct_zeros;
            row.correct_classified = det.correct_classified;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });
    return rows;
}

} // namespace sgb
