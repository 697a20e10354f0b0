// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion carries its runtime budget; going over budget is a
// failure too.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sgboost/sgboost.hpp"

namespace fs = std::filesystem;
using namespace sgb;

namespace {

constexpr std::uint64_t kSeed = 2024;
int failures = 0;

void criterion(int number, const std::string& name, double budget_seconds,
               const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
        ok = false;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (elapsed > budget_seconds) {
        ok = false;
        detail += (detail.empty() ? "" : "; ") + std::string("over time budget");
    }
    std::printf("%s  criterion-%02d %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
                elapsed, detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

struct RssCompare {
    int group_strictly_better = 0;
    int individual_strictly_better = 0;
};

RssCompare compare_rss(const Eigen::MatrixXd& M, const std::vector<double>& lambdas, double mu,
                       int draws, std::uint64_t seed, double slack = 1e-9) {
    const SvdCache group_svd = thin_svd(M);
    std::vector<SvdCache> col_svd;
    for (Eigen::Index j = 0; j < M.cols(); ++j) col_svd.push_back(thin_svd(M.col(j)));
    auto eng = make_engine(seed);
    RssCompare out;
    for (int s = 0; s < draws; ++s) {
        const Eigen::VectorXd y = gaussian_vector(eng, M.rows());
        const double rss_grp = rss_one_step(group_svd, y, mu);
        double rss_ind = rss_one_step(col_svd[0], y, lambdas[0]);
        for (Eigen::Index j = 1; j < M.cols(); ++j)
            rss_ind = std::min(rss_ind, rss_one_step(col_svd[static_cast<std::size_t>(j)], y,
                                                     lambdas[static_cast<std::size_t>(j)]));
        if (rss_grp < rss_ind - slack) ++out.group_strictly_better;
        if (rss_ind < rss_grp - slack) ++out.individual_strictly_better;
    }
    return out;
}

GroupedDesign random_design(std::uint64_t seed, int n, const std::vector<int>& group_sizes) {
    auto eng = make_engine(seed);
    int p = 0;
    for (int s : group_sizes) p += s;
    Eigen::MatrixXd X = gaussian_matrix(eng, n, p);
    std::vector<int> ids;
    int g = 1;
    for (int s : group_sizes) {
        ids.insert(ids.end(), s, g);
        ++g;
    }
    return make_design(std::move(X), ids);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------

bool c1_lambda_df_round_trip(std::string& detail) {
    auto eng = make_engine(kSeed);
    std::uniform_real_distribution<double> dval(0.3, 3.0), unif(0.0, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const int r = 1 + static_cast<int>(eng() % 6);
        Eigen::VectorXd d(r);
        for (int j = 0; j < r; ++j) d[j] = dval(eng);
        const double target = 0.05 + unif(eng) * (r - 0.1);
        const double lam = lambda_for_df(d, target);
        if (std::abs(effective_df(d, lam) - target) > 1e-9) {
            detail = "round trip off at rep " + std::to_string(rep);
            return false;
        }
    }
    std::uniform_real_distribution<double> d2val(0.1, 10.0), tval(0.05, 0.999);
    for (int rep = 0; rep < 1000; ++rep) {
        const double d = std::sqrt(d2val(eng));
        const double t = tval(eng);
        const double closed = lambda_for_df_single(d, t);
        Eigen::VectorXd dv(1);
        dv << d;
        const double bisected = lambda_for_df(dv, t);
        if (std::abs(closed - bisected) > 1e-9 * std::max(1.0, closed)) {
            detail = "closed form vs bisection off at rep " + std::to_string(rep);
            return false;
        }
    }
    return true;
}

bool c2_boosted_rss_equivalence(std::string& detail) {
    auto eng = make_engine(kSeed + 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 6 + static_cast<int>(eng() % 9);
        const int cols = 1 + static_cast<int>(eng() % 4);
        const GroupedDesign gd = random_design(kSeed + 10 + rep, n, {cols});
        const Eigen::VectorXd y = gaussian_vector(eng, n);

        BoostConfig cfg;
        cfg.variant = Variant::groupwise;
        cfg.baseline_df = 0.2 + 0.6 * unif(eng) * thin_svd(gd.X).rank;
        cfg.eta = 1.0;
        cfg.iterations = 21;
        const FitResult r = fit(gd, y, cfg);

        const auto learners = build_learners(gd, cfg);
        const Eigen::VectorXd centered = y.array() - y.mean();
        for (int m : {0, 1, 5, 20}) {
            const double closed = boosted_rss(learners[0].svd, centered, learners[0].lambda, m);
            const double looped = r.train_loss[static_cast<std::size_t>(m)];
            if (std::abs(closed - looped) > 1e-8 * std::max(1.0, std::abs(closed))) {
                detail = "mismatch at rep " + std::to_string(rep) + ", m=" + std::to_string(m);
                return false;
            }
        }
    }
    return true;
}

bool c3_gamma_law(std::string& detail) {
    const GammaParams gp = delta_rss_gamma(5, 1.0);
    const McDeltaRss mc = mc_delta_rss(5, 1.0, 100000, kSeed + 2, 8);
    const double ks_crit = 1.6276 / std::sqrt(100000.0);
    std::ostringstream ss;
    ss << "mean=" << mc.mean << " var=" << mc.variance << " ks=" << mc.ks_statistic;
    detail = ss.str();
    if (std::abs(mc.mean - gp.mean()) > 0.01 * gp.mean()) return false;
    if (std::abs(mc.variance - gp.variance()) > 0.03 * gp.variance()) return false;
    return mc.ks_statistic < ks_crit;
}

bool c4_subgroup_probability(std::string& detail) {
    struct Case {
        int p, p1;
        double expect;
    };
    std::ostringstream ss;
    for (const Case c : {Case{3, 1, 0.5773502691896257}, Case{2, 1, 0.5}}) {
        const double closed = prob_group_vs_subcolumns(c.p, c.p1, 0.5, 0.5).value;
        if (std::abs(closed - c.expect) > 1e-9) {
            detail = "closed form drifted";
            return false;
        }
        McSelectionSpec spec;
        spec.p = c.p;
        spec.p1 = c.p1;
        spec.df_lambda = 0.5;
        spec.df_mu = 0.5;
        const McFrequency mc = mc_selection_frequency(spec, 100000, kSeed + 3 + c.p, 8);
        ss << "p=" << c.p << ": closed=" << closed << " mc=" << mc.frequency << "  ";
        if (std::abs(mc.frequency - closed) > 3.0 * mc.std_error) {
            detail = ss.str();
            return false;
        }
    }
    detail = ss.str();
    return true;
}

bool c5_orthogonal_hard_bounds(std::string& detail) {
    // columns are singular directions: the group must never strictly win
    for (double alpha : {0.5, 0.7}) {
        const Eigen::MatrixXd U = orthonormal_columns(9, 3, kSeed + 40);
        std::vector<double> lambdas(3, lambda_for_df_single(1.0, alpha));
        const double mu = lambda_for_df(thin_svd(U).d, 1.0 - alpha);
        const RssCompare chk = compare_rss(U, lambdas, mu, 1000, kSeed + 41);
        if (chk.group_strictly_better != 0) {
            detail = "group won under v-identity at alpha=" + std::to_string(alpha);
            return false;
        }
    }
    // equal singular values: the individual must never strictly win
    struct Case {
        double alpha;
        int p;
    };
    for (const Case c : {Case{0.2, 3}, Case{0.1, 4}}) {
        if (!(1.0 - c.alpha >= c.alpha / c.p)) {
            detail = "case does not satisfy the stated inequality";
            return false;
        }
        const Eigen::MatrixXd U = orthonormal_columns(10, c.p, kSeed + 42 + c.p);
        const Eigen::MatrixXd V = orthonormal_columns(c.p, c.p, kSeed + 52 + c.p);
        const Eigen::MatrixXd X = 1.4 * U * V.transpose();
        std::vector<double> lambdas;
        for (int j = 0; j < c.p; ++j)
            lambdas.push_back(lambda_for_df_single(X.col(j).norm(), c.alpha));
        const double mu = lambda_for_df(thin_svd(X).d, 1.0 - c.alpha);
        const RssCompare chk = compare_rss(X, lambdas, mu, 1000, kSeed + 43);
        if (chk.individual_strictly_better != 0) {
            detail = "individual won under equal singular values at alpha=" +
                     std::to_string(c.alpha);
            return false;
        }
    }
    return true;
}

bool c6_theorem2_soundness(std::string& detail) {
    auto eng = make_engine(kSeed + 5);
    std::uniform_real_distribution<double> alpha_ind(0.55, 0.95), alpha_grp(0.03, 0.3);
    int n_ind = 0, n_grp = 0, attempts = 0;
    while ((n_ind < 200 || n_grp < 200) && attempts < 100000) {
        ++attempts;
        const bool want_ind = n_ind < 200 && (n_grp >= 200 || attempts % 2 == 0);
        const int n = 8 + static_cast<int>(eng() % 7);
        const int p = 2 + static_cast<int>(eng() % 4);
        const Eigen::MatrixXd M = gaussian_matrix(eng, n, p);
        const double alpha = want_ind ? alpha_ind(eng) : alpha_grp(eng);
        std::vector<double> lambdas;
        for (int j = 0; j < p; ++j) lambdas.push_back(lambda_for_df_single(M.col(j).norm(), alpha));
        const double mu = lambda_for_df(thin_svd(M).d, 1.0 - alpha);
        const BoundsReport rep = bounds_theorem2(M, lambdas, mu);
        if (rep.implied == Verdict::undetermined) continue;
        if (rep.implied == Verdict::individual_wins) {
            if (n_ind >= 200) continue;
            ++n_ind;
        } else {
            if (n_grp >= 200) continue;
            ++n_grp;
        }
        const RssCompare chk = compare_rss(M, lambdas, mu, 1000, kSeed + 100 + attempts);
        if (rep.implied == Verdict::individual_wins && chk.group_strictly_better != 0) {
            detail = "individual verdict violated";
            return false;
        }
        if (rep.implied == Verdict::group_wins && chk.individual_strictly_better != 0) {
            detail = "group verdict violated";
            return false;
        }
    }
    std::ostringstream ss;
    ss << "cases: individual=" << n_ind << " group=" << n_grp;
    detail = ss.str();
    return n_ind == 200 && n_grp == 200;
}

bool c7_equal_df_expectation(std::string& detail) {
    auto e1 = make_engine(kSeed + 61);
    auto e2 = make_engine(kSeed + 62);
    const Eigen::MatrixXd X1 = gaussian_matrix(e1, 30, 4);
    const Eigen::MatrixXd X2 = gaussian_matrix(e2, 30, 6);
    const SvdCache s1 = thin_svd(X1), s2 = thin_svd(X2);
    const double l1 = lambda_for_df(s1.d, 0.5), l2 = lambda_for_df(s2.d, 0.5);

    auto eng = make_engine(kSeed + 63);
    const int draws = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const Eigen::VectorXd y = gaussian_vector(eng, 30);
        const double diff = rss_one_step(s1, y, l1) - rss_one_step(s2, y, l2);
        sum += diff;
        sumsq += diff * diff;
    }
    const double mean = sum / draws;
    const double sd = std::sqrt((sumsq - draws * mean * mean) / (draws - 1));
    const double se = sd / std::sqrt(static_cast<double>(draws));
    std::ostringstream ss;
    ss << "mean=" << mean << " se=" << se;
    detail = ss.str();
    return std::abs(mean) <= 3.0 * se;
}

bool c8_simulation_desk_scale(std::string& detail) {
    BoostConfig model;
    model.variant = Variant::sgb_df;
    model.eta = 0.1;
    model.iterations = 600;

    auto mean_metric = [](const std::vector<ResultRow>& rows, double alpha, bool zeros,
                          std::vector<double>* per_rep = nullptr) {
        double sum = 0.0;
        int count = 0;
        for (const auto& r : rows) {
            if (r.alpha != alpha || !r.error.empty()) continue;
            const double v = zeros ? r.correct_zeros.value() : r.rmse.value();
            sum += v;
            ++count;
            if (per_rep) per_rep->push_back(v);
        }
        return count ? sum / count : std::nan("");
    };

    const auto rows9 = run_experiment({builtin_scenario(9)}, {model}, {0.1, 0.9}, 5, kSeed, 3, 8);
    const auto rows3 = run_experiment({builtin_scenario(3)}, {model}, {0.1, 0.9}, 5, kSeed, 3, 8);
    const auto rows8 = run_experiment({builtin_scenario(8)}, {model}, {0.5}, 5, kSeed, 3, 8);
    for (const auto* rows : {&rows9, &rows3, &rows8})
        for (const auto& r : *rows)
            if (!r.error.empty()) {
                detail = "cell failed: " + r.error;
                return false;
            }

    const double rmse9_lo = mean_metric(rows9, 0.1, false);
    const double rmse9_hi = mean_metric(rows9, 0.9, false);
    std::vector<double> s3_lo, s3_hi;
    const double rmse3_lo = mean_metric(rows3, 0.1, false, &s3_lo);
    const double rmse3_hi = mean_metric(rows3, 0.9, false, &s3_hi);
    const double zeros8 = mean_metric(rows8, 0.5, true);

    // paired difference over replications for the equality allowance
    double dsum = 0.0, dsq = 0.0;
    for (std::size_t i = 0; i < s3_lo.size(); ++i) dsum += s3_lo[i] - s3_hi[i];
    const double dmean = dsum / s3_lo.size();
    for (std::size_t i = 0; i < s3_lo.size(); ++i)
        dsq += (s3_lo[i] - s3_hi[i] - dmean) * (s3_lo[i] - s3_hi[i] - dmean);
    const double dse = std::sqrt(dsq / (s3_lo.size() - 1)) / std::sqrt(double(s3_lo.size()));

    std::ostringstream ss;
    ss << "scn9 rmse " << rmse9_lo << " vs " << rmse9_hi << "; scn3 " << rmse3_lo << " vs "
       << rmse3_hi << " (paired se " << dse << "); scn8 zeros " << zeros8;
    detail = ss.str();

    const bool ok9 = rmse9_lo <= rmse9_hi;
    // reversed-or-equal: equality read as indistinguishable at 3 paired s.e.
    const bool ok3 = dmean >= 0.0 || std::abs(dmean) <= 3.0 * dse;
    const bool ok8 = zeros8 >= 0.9;
    if (!ok9) detail += "; scn9 ordering failed";
    if (!ok3) detail += "; scn3 ordering failed";
    if (!ok8) detail += "; scn8 zeros failed";
    return ok9 && ok3 && ok8;
}

bool c9_degenerate_equivalence(std::string& detail) {
    for (int rep = 0; rep < 20; ++rep) {
        const GroupedDesign gd = random_design(kSeed + 200 + rep, 40, {3, 1, 4, 2, 2});
        auto eng = make_engine(kSeed + 300 + rep);
        const Eigen::VectorXd y = gaussian_vector(eng, 40);

        auto cols_of = [](const FitResult& r) {
            std::vector<std::vector<int>> out;
            for (int s : r.selected) out.push_back(r.learners[s].columns);
            return out;
        };

        BoostConfig a1;
        a1.variant = Variant::sgb_df;
        a1.alpha = 1.0;
        a1.iterations = 60;
        BoostConfig comp;
        comp.variant = Variant::componentwise;
        comp.baseline_df = 1.0;
        comp.iterations = 60;
        if (cols_of(fit(gd, y, a1)) != cols_of(fit(gd, y, comp))) {
            detail = "alpha=1 vs componentwise differ at rep " + std::to_string(rep);
            return false;
        }

        BoostConfig a0;
        a0.variant = Variant::sgb_df;
        a0.alpha = 0.0;
        a0.iterations = 60;
        BoostConfig grp;
        grp.variant = Variant::groupwise;
        grp.baseline_df = 1.0;
        grp.iterations = 60;
        if (cols_of(fit(gd, y, a0)) != cols_of(fit(gd, y, grp))) {
            detail = "alpha=0 vs groupwise differ at rep " + std::to_string(rep);
            return false;
        }
    }
    return true;
}

bool c10_cli_determinism(std::string& detail) {
    const std::string cli = SGB_CLI_PATH;
    const fs::path dir = fs::temp_directory_path() / "sgb_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);

    {
        std::ofstream data(dir / "data.csv");
        data << "x1,x2,x3,y\n";
        auto eng = make_engine(kSeed + 400);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int i = 0; i < 24; ++i) {
            const double a = normal(eng), b = normal(eng), c = normal(eng);
            data << a << ',' << b << ',' << c << ',' << (1.5 * a - b + 0.5 * normal(eng)) << "\n";
        }
        std::ofstream groups(dir / "groups.csv");
        groups << "variable,group\nx1,g1\nx2,g1\nx3,g2\n";
    }

    struct Cmd {
        std::string name;
        std::string args;
        std::vector<std::string> files;  ///< outputs relative to dir, stdout captured separately
    };
    const std::string d = dir.string() + "/";
    const std::vector<Cmd> commands = {
        {"fit",
         "fit --data " + d + "data.csv --groups " + d + "groups.csv --outcome y --variant sgb-df "
             "--alpha 0.4 --iterations 40 --seed 11 --out " + d + "out",
         {"out/coefficients.csv", "out/paths.csv", "out/cv.csv"}},
        {"simulate",
         "simulate --scenario 8 --reps 2 --alphas 0.3,0.6 --iterations 40 --eta 0.2 --seed 11 "
             "--out " + d + "res.csv",
         {"res.csv"}},
        {"bounds",
         "bounds --data " + d + "data.csv --groups " + d + "groups.csv --outcome y --group g1 "
             "--alpha 0.4",
         {}},
        {"prob", "prob --p 3 --p1 1 --alpha 0.45 --mc --nsims 40000 --seed 11", {}},
    };

    // identical flags and output locations; reruns overwrite and must match
    for (const auto& cmd : commands) {
        std::vector<std::string> snapshots;
        int run_id = 0;
        for (int threads : {1, 8, 1, 8}) {
            ++run_id;
            const fs::path stdout_file = dir / (cmd.name + "_" + std::to_string(run_id) + ".out");
            const std::string full = cli + " " + cmd.args + " --threads " + std::to_string(threads) +
                                     " > " + stdout_file.string() + " 2>/dev/null";
            if (std::system(full.c_str()) != 0) {
                detail = cmd.name + " run failed";
                return false;
            }
            std::string snapshot = slurp(stdout_file);
            for (const auto& f : cmd.files) snapshot += "\n#file " + f + "\n" + slurp(dir / f);
            snapshots.push_back(std::move(snapshot));
        }
        for (std::size_t i = 1; i < snapshots.size(); ++i) {
            if (snapshots[i] != snapshots[0]) {
                detail = cmd.name + ": output differs between runs";
                return false;
            }
        }
    }
    fs::remove_all(dir);
    return true;
}

}  // namespace

int main() {
    std::printf("sparse-group boosting acceptance suite (seed %llu)\n",
                static_cast<unsigned long long>(kSeed));
    criterion(1, "lambda/df round trip", 1.0, c1_lambda_df_round_trip);
    criterion(2, "closed-form boosted RSS equals the fitted loop", 5.0, c2_boosted_rss_equivalence);
    criterion(3, "gamma law of the RSS difference", 30.0, c3_gamma_law);
    criterion(4, "subgroup selection probability vs Monte Carlo", 60.0, c4_subgroup_probability);
    criterion(5, "orthogonal-design hard selection bounds", 60.0, c5_orthogonal_hard_bounds);
    criterion(6, "selection-bound soundness sweep", 120.0, c6_theorem2_soundness);
    criterion(7, "matched-df RSS expectation", 30.0, c7_equal_df_expectation);
    criterion(8, "desk-scale simulation replication", 900.0, c8_simulation_desk_scale);
    criterion(9, "mixing-extreme equivalences", 120.0, c9_degenerate_equivalence);
    criterion(10, "CLI byte-level determinism across threads", 300.0, c10_cli_determinism);
    if (failures == 0) std::printf("all criteria passed\n");
    else std::printf("%d criteria failed\n", failures);
    return failures;
}
