// sgboost: sparse-group boosting on CSV data, benchmark simulations and the
// selection-theory calculators, all from one batch-friendly binary.
//
// Exit codes: 0 success, 1 numeric failure, 2 input/validation failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sgboost/sgboost.hpp"

namespace fs = std::filesystem;
using sgb::format_significant;

namespace {

struct CommonOpts {
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;
    int precision = 10;
};

std::uint64_t resolve_seed(const CommonOpts& o) {
    if (o.seed_given) return o.seed;
    if (const char* env = std::getenv("SGB_SEED")) {
        try {
            return static_cast<std::uint64_t>(std::stoull(env));
        } catch (...) {
            throw sgb::validation_error("SGB_SEED is not a valid unsigned integer");
        }
    }
    return 0;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "RNG seed (default: SGB_SEED env var, else 0)")
        ->each([&o](const std::string&) { o.seed_given = true; });
    cmd->add_option("--threads", o.threads, "max worker threads)")->check(CLI::PositiveNumber);
    cmd->add_option("--precision", o.precision, "significant digits in written numbers")
        ->check(CLI::Range(1, 17));
}

sgb::Variant parse_variant(const std::string& name) {
    if (name == "componentwise") return sgb::Variant::componentwise;
    if (name == "groupwise") return sgb::Variant::groupwise;
    if (name == "sgb-df") return sgb::Variant::sgb_df;
    if (name == "sgb-lambda") return sgb::Variant::sgb_lambda;
    throw sgb::validation_error("unknown variant: " + name);
}

std::vector<double> parse_double_list(const std::string& csv, const std::string& what) {
    std::vector<double> out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(sgb::parse_double(cur, what));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (out.empty()) throw sgb::validation_error(what + ": empty list");
    return out;
}

// ---------------------------------------------------------------------------
// CSV data loading shared by fit and bounds
// ---------------------------------------------------------------------------

struct LoadedData {
    sgb::GroupedDesign gd;
    Eigen::VectorXd y;
    std::string outcome;
};

LoadedData load_csv_design(const std::string& data_path, const std::string& groups_path,
                           const std::string& outcome, bool standardize) {
    const sgb::CsvTable data = sgb::read_csv(data_path);
    const sgb::CsvTable groups = sgb::read_csv(groups_path);

    if (groups.header.size() != 2 || groups.header[0] != "variable" || groups.header[1] != "group")
        throw sgb::validation_error(groups_path + ": expected header 'variable,group'");
    std::unordered_map<std::string, std::string> group_of_name;
    for (const auto& row : groups.rows) {
        if (!group_of_name.emplace(row[0], row[1]).second)
            throw sgb::validation_error(groups_path + ": duplicate variable '" + row[0] + "'");
    }

    // an empty outcome name means the caller only needs the design
    const int y_col = outcome.empty() ? -1 : data.column(outcome);
    if (!outcome.empty() && y_col < 0)
        throw sgb::validation_error(data_path + ": outcome column '" + outcome + "' not found");
    if (data.rows.empty()) throw sgb::validation_error(data_path + ": no data rows");

    std::vector<std::string> names, labels;
    std::vector<int> cols;
    for (std::size_t j = 0; j < data.header.size(); ++j) {
        if (static_cast<int>(j) == y_col) continue;
        const auto it = group_of_name.find(data.header[j]);
        if (it == group_of_name.end())
            throw sgb::validation_error(data_path + ": variable '" + data.header[j] +
                                        "' has no group in " + groups_path);
        names.push_back(data.header[j]);
        labels.push_back(it->second);
        cols.push_back(static_cast<int>(j));
    }
    if (names.empty()) throw sgb::validation_error(data_path + ": no covariate columns");
    for (const auto& kv : group_of_name) {
        bool found = false;
        for (const auto& n : names) found = found || n == kv.first;
        if (!found)
            throw sgb::validation_error(groups_path + ": variable '" + kv.first +
                                        "' does not appear in " + data_path);
    }

    const int n = static_cast<int>(data.rows.size());
    Eigen::MatrixXd X(n, static_cast<int>(cols.size()));
    Eigen::VectorXd y = Eigen::VectorXd::Zero(y_col >= 0 ? n : 0);
    for (int i = 0; i < n; ++i) {
        const auto& row = data.rows[static_cast<std::size_t>(i)];
        const std::string where = data_path + ":" + std::to_string(i + 2);
        if (y_col >= 0) y[i] = sgb::parse_double(row[static_cast<std::size_t>(y_col)], where + " outcome");
        for (std::size_t k = 0; k < cols.size(); ++k)
            X(i, static_cast<Eigen::Index>(k)) =
                sgb::parse_double(row[static_cast<std::size_t>(cols[k])], where + " column " + names[k]);
    }

    if (standardize) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double mean = X.col(j).mean();
            const double sd = std::sqrt((X.col(j).array() - mean).square().sum() / std::max(1, n - 1));
            if (!(sd > 0.0))
                throw sgb::validation_error("cannot standardize constant column '" + names[j] + "'");
            X.col(j) = (X.col(j).array() - mean) / sd;
        }
    }

    LoadedData out{sgb::make_design(std::move(X), labels, names), std::move(y), outcome};
    return out;
}

std::string opt_field(const std::optional<double>& v, int precision) {
    return v ? format_significant(*v, precision) : std::string{};
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitOpts {
    std::string data, groups, outcome = "y", out_dir = ".";
    std::string variant = "sgb-df", loss = "l2";
    double alpha = 0.5, lambda_base = 0.0, eta = 0.1, baseline_df = 0.5;
    int iterations = 100, folds = 3;
    bool standardize = false;
};

int run_fit(const FitOpts& o, const CommonOpts& c) {
    sgb::BoostConfig cfg;
    cfg.variant = parse_variant(o.variant);
    cfg.alpha = o.alpha;
    cfg.lambda_base = o.lambda_base;
    cfg.eta = o.eta;
    cfg.iterations = o.iterations;
    cfg.baseline_df = o.baseline_df;
    cfg.threads = c.threads;
    if (o.loss == "l2") cfg.loss = sgb::Loss::l2;
    else if (o.loss == "logistic") cfg.loss = sgb::Loss::logistic;
    else throw sgb::validation_error("unknown loss: " + o.loss);

    const LoadedData data = load_csv_design(o.data, o.groups, o.outcome, o.standardize);
    const std::uint64_t seed = resolve_seed(c);

    const sgb::CvResult cv = sgb::kfold_cv(data.gd, data.y, cfg, o.folds, seed);
    const sgb::FitResult result = sgb::fit(data.gd, data.y, cfg);
    const Eigen::VectorXd beta = result.beta_at(cv.best_m);

    fs::create_directories(o.out_dir);
    const auto out_path = [&](const char* f) { return (fs::path(o.out_dir) / f).string(); };

    {
        std::ofstream f(out_path("coefficients.csv"));
        sgb::write_csv_line(f, {"variable", "group", "coefficient"});
        for (int j = 0; j < data.gd.p; ++j)
            sgb::write_csv_line(f, {data.gd.names[j], data.gd.group_labels[data.gd.group_of[j] - 1],
                                    format_significant(beta[j], c.precision)});
    }
    {
        std::ofstream f(out_path("paths.csv"));
        sgb::write_csv_line(f, {"iteration", "variable", "group", "value"});
        for (const auto& row : sgb::coefficient_paths(result))
            sgb::write_csv_line(f, {std::to_string(row.iteration), data.gd.names[row.variable],
                                    data.gd.group_labels[row.group - 1],
                                    format_significant(row.value, c.precision)});
    }
    {
        std::ofstream f(out_path("cv.csv"));
        sgb::write_csv_line(f, {"iteration", "mean_risk"});
        for (std::size_t m = 0; m < cv.mean_risk.size(); ++m)
            sgb::write_csv_line(f, {std::to_string(m + 1), format_significant(cv.mean_risk[m], c.precision)});
    }

    std::cout << "n=" << data.gd.n << "\np=" << data.gd.p << "\nG=" << data.gd.G
              << "\nbest_m=" << cv.best_m
              << "\ncv_risk=" << format_significant(cv.mean_risk[cv.best_m - 1], c.precision)
              << "\noffset=" << format_significant(result.offset, c.precision) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
    std::string scenario = "all";
    std::string variants = "sgb-df";
    std::string alphas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
    std::string out = "results.csv";
    double eta = 0.1, lambda_base = 0.0, baseline_df = 0.5;
    int reps = 5, iterations = 600, folds = 3;
    bool paper_scale = false;
};

int run_simulate(const SimulateOpts& o, const CommonOpts& c) {
    std::vector<sgb::Scenario> scenarios;
    if (o.scenario == "all") {
        scenarios = sgb::builtin_scenarios();
    } else {
        int id;
        try {
            id = std::stoi(o.scenario);
        } catch (...) {
            throw sgb::validation_error("bad scenario id: " + o.scenario);
        }
        scenarios.push_back(sgb::builtin_scenario(id));
    }

    int reps = o.reps, iterations = o.iterations;
    double eta = o.eta;
    if (o.paper_scale) {
        reps = 15;
        iterations = 2500;
        eta = 0.05;
    }

    std::vector<sgb::BoostConfig> models;
    {
        std::string cur;
        for (char ch : o.variants + ",") {
            if (ch == ',') {
                if (!cur.empty()) {
                    sgb::BoostConfig cfg;
                    cfg.variant = parse_variant(cur);
                    cfg.eta = eta;
                    cfg.iterations = iterations;
                    cfg.lambda_base = o.lambda_base;
                    cfg.baseline_df = o.baseline_df;
                    models.push_back(cfg);
                }
                cur.clear();
            } else {
                cur += ch;
            }
        }
    }
    const std::vector<double> alphas = parse_double_list(o.alphas, "--alphas");
    const std::uint64_t seed = resolve_seed(c);

    const auto rows = sgb::run_experiment(scenarios, models, alphas, reps, seed, o.folds, c.threads);

    std::ofstream f(o.out);
    if (!f) throw sgb::validation_error("cannot write " + o.out);
    sgb::write_csv_line(f, {"scenario", "rep", "model", "alpha", "lambda_base", "best_m", "rmse",
                            "correct_effects", "correct_zeros", "correct_classified"});
    for (const auto& r : rows) {
        if (!r.error.empty())
            std::cerr << "cell scenario=" << r.scenario << " rep=" << r.rep << " model=" << r.model
                      << " alpha=" << r.alpha << " failed: " << r.error << "\n";
        sgb::write_csv_line(f, {std::to_string(r.scenario), std::to_string(r.rep), r.model,
                                format_significant(r.alpha, c.precision), opt_field(r.lambda_base, c.precision),
                                r.best_m ? std::to_string(*r.best_m) : std::string{},
                                opt_field(r.rmse, c.precision), opt_field(r.correct_effects, c.precision),
                                opt_field(r.correct_zeros, c.precision),
                                opt_field(r.correct_classified, c.precision)});
    }
    std::cout << "rows=" << rows.size() << "\nfile=" << o.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

struct BoundsOpts {
    std::string data, groups, group, outcome;
    double alpha = -1.0;
    std::string lambdas_file;
    bool standardize = false;
};

int run_bounds(const BoundsOpts& o, const CommonOpts& c) {
    const LoadedData data = load_csv_design(o.data, o.groups, o.outcome, o.standardize);
    const sgb::GroupedDesign& gd = data.gd;

    int g = -1;
    for (int k = 1; k <= gd.G; ++k)
        if (gd.group_labels[k - 1] == o.group) g = k;
    if (g < 0) throw sgb::validation_error("unknown group: " + o.group);
    const auto& cols = gd.group_cols[g - 1];

    Eigen::MatrixXd M(gd.n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) M.col(static_cast<Eigen::Index>(k)) = gd.X.col(cols[k]);

    std::vector<double> lambdas(cols.size(), 0.0);
    double mu = 0.0;
    if (!o.lambdas_file.empty()) {
        const sgb::CsvTable tbl = sgb::read_csv(o.lambdas_file);
        if (tbl.header.size() != 2 || tbl.header[0] != "name" || tbl.header[1] != "penalty")
            throw sgb::validation_error(o.lambdas_file + ": expected header 'name,penalty'");
        std::unordered_map<std::string, double> penalty;
        for (const auto& row : tbl.rows)
            penalty[row[0]] = sgb::parse_double(row[1], o.lambdas_file + " penalty for " + row[0]);
        const auto mu_it = penalty.find("__group__");
        if (mu_it == penalty.end())
            throw sgb::validation_error(o.lambdas_file + ": missing __group__ row for mu");
        mu = mu_it->second;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto it = penalty.find(gd.names[cols[k]]);
            if (it == penalty.end())
                throw sgb::validation_error(o.lambdas_file + ": no penalty for '" + gd.names[cols[k]] + "'");
            lambdas[k] = it->second;
        }
    } else {
        if (!(o.alpha > 0.0 && o.alpha < 1.0))
            throw sgb::validation_error("provide --alpha in (0,1) or a --lambdas file");
        for (std::size_t k = 0; k < cols.size(); ++k)
            lambdas[k] = sgb::lambda_for_df_single(M.col(static_cast<Eigen::Index>(k)).norm(), o.alpha);
        const sgb::SvdCache svd = sgb::thin_svd(M);
        const double target = 1.0 - o.alpha;
        mu = svd.rank == 1 ? sgb::lambda_for_df_single(svd.d[0], std::min(target, 1.0))
                           : sgb::lambda_for_df(svd.d, target);
    }

    const sgb::BoundsReport report = sgb::bounds_theorem2(M, lambdas, mu);
    const int prec = c.precision;
    std::cout << "group=" << o.group << "\np=" << cols.size() << "\nrank=" << report.rank
              << "\nd_plus=" << format_significant(report.d_plus, prec)
              << "\nd_minus=" << format_significant(report.d_minus, prec)
              << "\ndbar_plus=" << format_significant(report.dbar_plus, prec)
              << "\ndbar_minus=" << format_significant(report.dbar_minus, prec)
              << "\nmu=" << format_significant(report.mu, prec)
              << "\ndf_mu=" << format_significant(report.df_mu, prec) << "\n";
    for (std::size_t k = 0; k < report.columns.size(); ++k) {
        const auto& cc = report.columns[k];
        std::cout << "col=" << gd.names[cols[k]] << " dbar2=" << format_significant(cc.dbar2, prec)
                  << " lambda=" << format_significant(cc.lambda, prec)
                  << " df_lambda=" << format_significant(cc.df_lambda, prec) << " cond5a=" << cc.cond5a
                  << " cond5b=" << cc.cond5b << " cond6a=" << cc.cond6a << " cond6b=" << cc.cond6b
                  << "\n";
    }
    std::cout << "verdict=" << sgb::verdict_name(report.implied) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// prob
// ---------------------------------------------------------------------------

struct ProbOpts {
    int p = 0, p1 = 0;
    bool external = false;
    double df_lambda = -1.0, df_mu = -1.0, alpha = -1.0;
    bool mc = false;
    long long nsims = 100000;
};

int run_prob(const ProbOpts& o, const CommonOpts& c) {
    double df_lambda = o.df_lambda, df_mu = o.df_mu;
    if (o.alpha >= 0.0) {
        if (!(o.alpha > 0.0 && o.alpha < 1.0))
            throw sgb::validation_error("--alpha must be in (0,1)");
        df_lambda = o.alpha;
        df_mu = 1.0 - o.alpha;
    }
    if (!(df_lambda > 0.0) || !(df_mu > 0.0))
        throw sgb::validation_error("provide --df-lambda and --df-mu, or --alpha");

    sgb::SelectionProbability prob;
    if (o.external) {
        prob = sgb::prob_group_vs_external(o.p, df_lambda, df_mu);
        std::cout << "regime=external\n";
    } else {
        prob = sgb::prob_group_vs_subcolumns(o.p, o.p1, df_lambda, df_mu);
        std::cout << "regime=subgroup\n";
    }
    std::cout << "a=" << format_significant(prob.a, c.precision)
              << "\nb=" << format_significant(prob.b, c.precision)
              << "\nq=" << format_significant(prob.q, c.precision)
              << "\ndegenerate=" << (prob.degenerate ? 1 : 0)
              << "\nprobability=" << format_significant(prob.value, c.precision) << "\n";

    if (o.mc) {
        sgb::McSelectionSpec spec;
        spec.p = o.p;
        spec.p1 = o.p1;
        spec.external = o.external;
        spec.df_lambda = df_lambda;
        spec.df_mu = df_mu;
        const auto mc = sgb::mc_selection_frequency(spec, o.nsims, resolve_seed(c), c.threads);
        std::cout << "mc_frequency=" << format_significant(mc.frequency, c.precision)
                  << "\nmc_se=" << format_significant(mc.std_error, c.precision)
                  << "\nnsims=" << mc.nsims << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse-group boosting toolkit"};
    app.require_subcommand(1);

    CommonOpts common;

    FitOpts fit_opts;
    CLI::App* fit_cmd = app.add_subcommand("fit", "fit a boosting model to CSV data");
    fit_cmd->add_option("--data", fit_opts.data, "data CSV (header row required)")->required();
    fit_cmd->add_option("--groups", fit_opts.groups, "two-column CSV: variable,group")->required();
    fit_cmd->add_option("--outcome", fit_opts.outcome, "outcome column name");
    fit_cmd->add_option("--out", fit_opts.out_dir, "output directory");
    fit_cmd->add_option("--variant", fit_opts.variant, "componentwise|groupwise|sgb-df|sgb-lambda");
    fit_cmd->add_option("--alpha", fit_opts.alpha, "mixing parameter in [0,1]");
    fit_cmd->add_option("--lambda-base", fit_opts.lambda_base, "penalty scale for sgb-lambda");
    fit_cmd->add_option("--eta", fit_opts.eta, "learning rate");
    fit_cmd->add_option("--iterations", fit_opts.iterations, "boosting iterations M");
    fit_cmd->add_option("--baseline-df", fit_opts.baseline_df, "per-learner df for the pure variants");
    fit_cmd->add_option("--loss", fit_opts.loss, "l2|logistic");
    fit_cmd->add_option("--folds", fit_opts.folds, "CV folds for early stopping");
    fit_cmd->add_flag("--standardize", fit_opts.standardize, "center and scale covariates first");
    add_common(fit_cmd, common);

    SimulateOpts sim_opts;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "run benchmark scenarios");
    sim_cmd->add_option("--scenario", sim_opts.scenario, "scenario id 1..12 or 'all'");
    sim_cmd->add_option("--reps", sim_opts.reps, "replications per scenario");
    sim_cmd->add_option("--variants", sim_opts.variants, "comma list of model variants");
    sim_cmd->add_option("--alphas", sim_opts.alphas, "comma list of mixing parameters");
    sim_cmd->add_option("--eta", sim_opts.eta, "learning rate");
    sim_cmd->add_option("--iterations", sim_opts.iterations, "boosting iterations M");
    sim_cmd->add_option("--lambda-base", sim_opts.lambda_base, "penalty scale for sgb-lambda");
    sim_cmd->add_option("--baseline-df", sim_opts.baseline_df, "per-learner df for pure variants");
    sim_cmd->add_option("--folds", sim_opts.folds, "CV folds");
    sim_cmd->add_option("--out", sim_opts.out, "results CSV path");
    sim_cmd->add_flag("--paper-scale", sim_opts.paper_scale, "reps=15, iterations=2500, eta=0.05");
    add_common(sim_cmd, common);

    BoundsOpts bounds_opts;
    CLI::App* bounds_cmd = app.add_subcommand("bounds", "selection bounds for one group");
    bounds_cmd->add_option("--data", bounds_opts.data, "data CSV")->required();
    bounds_cmd->add_option("--groups", bounds_opts.groups, "two-column CSV: variable,group")->required();
    bounds_cmd->add_option("--group", bounds_opts.group, "group label to analyse")->required();
    bounds_cmd->add_option("--outcome", bounds_opts.outcome, "outcome column to exclude, if any");
    bounds_cmd->add_option("--alpha", bounds_opts.alpha, "mixed-df parametrization: df(lambda)=alpha, df(mu)=1-alpha");
    bounds_cmd->add_option("--lambdas", bounds_opts.lambdas_file,
                           "CSV name,penalty with one row per column plus __group__");
    bounds_cmd->add_flag("--standardize", bounds_opts.standardize, "center and scale covariates first");
    add_common(bounds_cmd, common);

    ProbOpts prob_opts;
    CLI::App* prob_cmd = app.add_subcommand("prob", "pairwise selection probability");
    prob_cmd->add_option("--p", prob_opts.p, "group size")->required();
    prob_cmd->add_option("--p1", prob_opts.p1, "sub-learner size");
    prob_cmd->add_flag("--external", prob_opts.external, "individual learner orthogonal to the group");
    prob_cmd->add_option("--df-lambda", prob_opts.df_lambda, "df of the individual/sub learner");
    prob_cmd->add_option("--df-mu", prob_opts.df_mu, "df of the group learner");
    prob_cmd->add_option("--alpha", prob_opts.alpha, "shorthand for df-lambda=alpha, df-mu=1-alpha");
    prob_cmd->add_flag("--mc", prob_opts.mc, "append a Monte-Carlo frequency check");
    prob_cmd->add_option("--nsims", prob_opts.nsims, "Monte-Carlo sample count");
    add_common(prob_cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*fit_cmd) return run_fit(fit_opts, common);
        if (*sim_cmd) return run_simulate(sim_opts, common);
        if (*bounds_cmd) return run_bounds(bounds_opts, common);
        if (*prob_cmd) return run_prob(prob_opts, common);
    } catch (const sgb::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sgb::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
