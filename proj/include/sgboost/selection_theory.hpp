#pragma once
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sgboost/design.hpp"
#include "sgboost/error.hpp"
#include "sgboost/parallel.hpp"
#include "sgboost/ridge.hpp"
#include "sgboost/rng.hpp"
#include "sgboost/special.hpp"

namespace sgb {

// ============================================================================
// Deterministic selection bounds
// ============================================================================

enum class Verdict { individual_wins, group_wins, undetermined };

inline std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::individual_wins: return "individual_wins";
        case Verdict::group_wins: return "group_wins";
        case Verdict::undetermined: return "undetermined";
    }
    return "?";
}

struct ColumnConditions {
    int column = 0;        ///< 0-based within the group matrix
    double dbar2 = 0.0;    ///< squared singular value of the column
    double lambda = 0.0;
    double df_lambda = 0.0;
    bool cond5a = false;   ///< curvature bound favouring this column
    bool cond5b = false;   ///< df-ratio bound favouring this column
    bool cond6a = false;   ///< group dominance via df(lambda)/dbar^2
    bool cond6b = false;   ///< group dominance via the curvature form
};

struct BoundsReport {
    double d_plus = 0.0;      ///< largest squared nonzero singular value of the group
    double d_minus = 0.0;     ///< smallest squared nonzero singular value
    double dbar_plus = 0.0;   ///< largest squared column singular value
    double dbar_minus = 0.0;  ///< smallest squared column singular value
    int rank = 0;
    double mu = 0.0;
    double df_mu = 0.0;
    std::vector<ColumnConditions> columns;
    Verdict implied = Verdict::undetermined;
};

/// Sufficient selection conditions from the singular values of a group
/// matrix and the attached ridge penalties.
///
/// The individual-side verdict requires its curvature condition to hold for
/// every column (or the df-ratio bound to hold with the smallest individual
/// df): both bounds control all rank directions at once, so a single
/// conforming column is not enough. The group-side verdict requires one of
/// its two (algebraically equivalent) conditions per column, for all columns.
/// Both verdicts are sufficient, never necessary; undetermined is a
/// first-class outcome and the per-column flags show what failed.
inline BoundsReport bounds_theorem2(const Eigen::MatrixXd& group,
                                    const std::vector<double>& lambdas, double mu) {
    const int p = static_cast<int>(group.cols());
    if (static_cast<int>(lambdas.size()) != p)
        throw validation_error("bounds_theorem2: one lambda per column required");
    if (!(mu >= 0.0)) throw validation_error("bounds_theorem2: mu must be >= 0");
    for (double l : lambdas)
        if (!(l >= 0.0)) throw validation_error("bounds_theorem2: lambdas must be >= 0");

    const SvdCache svd = thin_svd(group);
    BoundsReport report;
    report.rank = svd.rank;
    report.mu = mu;
    report.d_plus = svd.d[0] * svd.d[0];
    report.d_minus = svd.d[svd.rank - 1] * svd.d[svd.rank - 1];
    report.df_mu = effective_df(svd.d, mu);

    const double r = static_cast<double>(svd.rank);
    const double dm = report.d_minus, dp = report.d_plus;
    report.columns.resize(p);
    for (int l = 0; l < p; ++l) {
        auto& c = report.columns[l];
        c.column = l;
        c.dbar2 = group.col(l).squaredNorm();
        if (!(c.dbar2 > 0.0)) throw validation_error("bounds_theorem2: zero column");
        c.lambda = lambdas[l];
        c.df_lambda = df_weight(c.dbar2, c.lambda);
    }
    report.dbar_plus = report.columns[0].dbar2;
    report.dbar_minus = report.columns[0].dbar2;
    for (const auto& c : report.columns) {
        report.dbar_plus = std::max(report.dbar_plus, c.dbar2);
        report.dbar_minus = std::min(report.dbar_minus, c.dbar2);
    }

    // closed inequalities: exact-boundary cases (equal df on an orthonormal
    // group) must not flip on rounding noise
    const auto leq = [](double a, double b) {
        return a <= b + 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
    };
    const double lhs_min = (dm + 2.0 * mu) / ((dm + mu) * (dm + mu));
    const double lhs_max = (dp + 2.0 * mu) / ((dp + mu) * (dp + mu));
    for (auto& c : report.columns) {
        c.cond5a = leq(lhs_min, (c.dbar2 + 2.0 * c.lambda) / (r * (c.dbar2 + c.lambda) * (c.dbar2 + c.lambda)));
        c.cond5b = leq(report.df_mu, c.df_lambda * dm / (r * report.dbar_plus));
        c.cond6a = leq(c.df_lambda / c.dbar2, lhs_max);
        c.cond6b = leq((c.dbar2 + 2.0 * c.lambda) / ((c.dbar2 + c.lambda) * (c.dbar2 + c.lambda)), lhs_max);
    }

    const bool all_5a = std::all_of(report.columns.begin(), report.columns.end(),
                                    [](const ColumnConditions& c) { return c.cond5a; });
    const bool all_5b = std::all_of(report.columns.begin(), report.columns.end(),
                                    [](const ColumnConditions& c) { return c.cond5b; });
    const bool all_6 = std::all_of(report.columns.begin(), report.columns.end(),
                                   [](const ColumnConditions& c) { return c.cond6a || c.cond6b; });
    if (all_5a || all_5b) report.implied = Verdict::individual_wins;
    else if (all_6) report.implied = Verdict::group_wins;
    else report.implied = Verdict::undetermined;
    return report;
}

enum class OrthoCase { v_identity, single_singular_value };
enum class OrthoVerdict { individual_wins, group_wins, tie, undetermined };

inline std::string ortho_verdict_name(OrthoVerdict v) {
    switch (v) {
        case OrthoVerdict::individual_wins: return "individual_wins";
        case OrthoVerdict::group_wins: return "group_wins";
        case OrthoVerdict::tie: return "tie";
        case OrthoVerdict::undetermined: return "undetermined";
    }
    return "?";
}

/// Hard selection bounds for the two structured designs, in the mixed-df
/// parametrization df(lambda_j) = alpha, df(mu) = 1 - alpha.
///
/// v_identity (columns are the singular directions): alpha >= 0.5 forces an
/// individual winner. single_singular_value (all singular values equal):
/// 1 - alpha >= p * alpha, i.e. alpha <= 1/(p+1), forces the group; this is
/// the form the dominance argument actually yields (the eigenvalue gap is
/// df(lambda) - df(mu)/p per direction) and the one Monte-Carlo confirms.
/// Both holding at once means the two fits tie identically.
inline OrthoVerdict bounds_orthogonal(double alpha, int p, OrthoCase which) {
    if (p < 1) throw validation_error("bounds_orthogonal: p must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw validation_error("bounds_orthogonal: alpha must be in (0,1)");
    const bool ind = 1.0 - alpha <= alpha;                       // df(mu) <= df(lambda)
    const bool grp = 1.0 - alpha >= static_cast<double>(p) * alpha;
    if (ind && grp) return OrthoVerdict::tie;
    if (which == OrthoCase::v_identity && ind) return OrthoVerdict::individual_wins;
    if (which == OrthoCase::single_singular_value && grp) return OrthoVerdict::group_wins;
    return OrthoVerdict::undetermined;
}

/// Mixing-parameter interval inside which neither structured bound forces a
/// one-sided selection for groups up to size p.
inline std::pair<double, double> recommended_alpha_interval(int p) {
    if (p < 1) throw validation_error("recommended_alpha_interval: p must be >= 1");
    return {1.0 / (p + 1.0), 0.5};
}

// ============================================================================
// Distribution of the RSS difference (orthonormal design)
// ============================================================================

struct GammaParams {
    double shape = 0.0;
    double scale = 0.0;
    double mean() const { return shape * scale; }
    double variance() const { return shape * scale * scale; }
};

/// Law of (RSS(ridge) - RSS(least squares)) / sigma^2 for a design with
/// orthonormal columns: Gamma(p/2, 2(1 - df(lambda)/p)).
inline GammaParams delta_rss_gamma(int p, double lambda) {
    if (p < 1) throw validation_error("delta_rss_gamma: p must be >= 1");
    if (!(lambda > 0.0)) throw validation_error("delta_rss_gamma: lambda must be positive");
    const double df = static_cast<double>(p) * df_weight(1.0, lambda);
    return {static_cast<double>(p) / 2.0, 2.0 * (1.0 - df / static_cast<double>(p))};
}

// ============================================================================
// Pairwise selection probabilities (scaled orthogonal designs)
// ============================================================================

enum class ProbRegime { subgroup, external };

struct SelectionProbability {
    double value = 0.0;   ///< P(group base-learner is selected)
    double a = 0.0, b = 0.0;
    double q = 0.0;       ///< beta-prime scale
    bool degenerate = false;
    ProbRegime regime = ProbRegime::subgroup;
};

/// Group of p orthonormal-design columns vs the sub-learner on p1 of them.
/// P(RSS(sub) >= RSS(group)) = I_{1/(1+q)}(p1/2, (p-p1)/2) with
/// q = df(lambda) p / (df(mu) p1) - 1. Requires df(lambda)/p1 >= df(mu)/p;
/// equality makes the comparison degenerate (the sub-learner never strictly
/// wins) and returns probability 1.
inline SelectionProbability prob_group_vs_subcolumns(int p, int p1, double df_lambda, double df_mu) {
    if (!(p1 > 0 && p1 < p)) throw validation_error("prob_group_vs_subcolumns: need 0 < p1 < p");
    if (!(df_lambda > 0.0 && df_mu > 0.0)) throw validation_error("prob_group_vs_subcolumns: df values must be positive");
    const double q = df_lambda * p / (df_mu * p1) - 1.0;
    if (q < -1e-12) throw validation_error("prob_group_vs_subcolumns: theorem precondition fails (df(lambda)/p1 < df(mu)/p)");
    SelectionProbability out;
    out.regime = ProbRegime::subgroup;
    out.a = p1 / 2.0;
    out.b = (p - p1) / 2.0;
    out.q = std::max(q, 0.0);
    if (q <= 1e-12) {
        // zero-width scale: the sub-learner never strictly beats the group
        out.q = 0.0;
        out.value = 1.0;
        out.degenerate = true;
        return out;
    }
    out.value = reg_incomplete_beta(out.a, out.b, 1.0 / (1.0 + q));
    return out;
}

/// Group of p orthonormal-design columns vs an individual column orthogonal
/// to all of them. P(group selected) = I_{1/(1+q)}(1/2, p/2) with
/// q = df(lambda) p / df(mu). The second shape parameter is p/2, not
/// (p-1)/2: the external column shares no directions with the group, so the
/// full chi-square(p) mass stays in the denominator. Monte-Carlo agrees with
/// this form only (see mc_selection_frequency).
inline SelectionProbability prob_group_vs_external(int p, double df_lambda, double df_mu) {
    if (p < 2) throw validation_error("prob_group_vs_external: p must be >= 2");
    if (!(df_lambda > 0.0 && df_lambda < 1.0)) throw validation_error("prob_group_vs_external: df_lambda must be in (0,1)");
    if (!(df_mu > 0.0 && df_mu < static_cast<double>(p))) throw validation_error("prob_group_vs_external: df_mu must be in (0,p)");
    SelectionProbability out;
    out.regime = ProbRegime::external;
    out.a = 0.5;
    out.b = p / 2.0;
    out.q = df_lambda * p / df_mu;
    out.value = reg_incomplete_beta(out.a, out.b, 1.0 / (1.0 + out.q));
    return out;
}

// ============================================================================
// Monte-Carlo oracles
// ============================================================================

struct McSelectionSpec {
    int p = 2;              ///< group size
    int p1 = 1;             ///< sub-learner size (subgroup regime)
    bool external = false;  ///< compare against an orthogonal external column instead
    double df_lambda = 0.5;
    double df_mu = 0.5;
    int n = 0;              ///< rows of the constructed design; 0 = p + (external ? 1 : 0) + 5
};

struct McFrequency {
    double frequency = 0.0;
    double std_error = 0.0;
    long long nsims = 0;
};

namespace detail {
constexpr long long mc_block_size = 4096;
}

/// Frequency of the group base-learner winning the one-step RSS comparison
/// over nsims standard-normal outcomes on an explicitly constructed
/// orthonormal design. Simulations are partitioned into fixed-size blocks
/// with derived per-block seeds, so the exact counts are identical for any
/// thread count.
inline McFrequency mc_selection_frequency(const McSelectionSpec& spec, long long nsims,
                                          std::uint64_t seed, int threads = 1) {
    if (nsims < 1) throw validation_error("mc_selection_frequency: nsims must be >= 1");
    if (!spec.external && !(spec.p1 > 0 && spec.p1 < spec.p))
        throw validation_error("mc_selection_frequency: need 0 < p1 < p");
    if (spec.external && spec.p < 1) throw validation_error("mc_selection_frequency: p must be >= 1");

    const int extra = spec.external ? 1 : 0;
    const int n = spec.n > 0 ? spec.n : spec.p + extra + 5;
    if (n < spec.p + extra) throw validation_error("mc_selection_frequency: n too small for the design");

    const Eigen::MatrixXd frame = orthonormal_columns(n, spec.p + extra, seed);
    const Eigen::MatrixXd group = frame.leftCols(spec.p);
    const Eigen::MatrixXd sub = spec.external ? frame.rightCols(1) : frame.leftCols(spec.p1);

    const SvdCache group_svd = thin_svd(group);
    const SvdCache sub_svd = thin_svd(sub);
    const double mu = lambda_for_df(group_svd.d, spec.df_mu);
    const double lambda = sub_svd.rank == 1 ? lambda_for_df_single(sub_svd.d[0], spec.df_lambda)
                                            : lambda_for_df(sub_svd.d, spec.df_lambda);

    const long long blocks = (nsims + detail::mc_block_size - 1) / detail::mc_block_size;
    std::vector<long long> hits(static_cast<std::size_t>(blocks), 0);
    parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b) {
        auto eng = make_engine(seed + 1 + static_cast<std::uint64_t>(b));
        const long long lo = static_cast<long long>(b) * detail::mc_block_size;
        const long long hi = std::min(nsims, lo + detail::mc_block_size);
        long long count = 0;
        for (long long s = lo; s < hi; ++s) {
            const Eigen::VectorXd y = gaussian_vector(eng, n);
            const double rss_sub = rss_one_step(sub_svd, y, lambda);
            const double rss_grp = rss_one_step(group_svd, y, mu);
            if (rss_sub >= rss_grp) ++count;
        }
        hits[b] = count;
    });
    long long total = 0;
    for (long long h : hits) total += h;
    McFrequency out;
    out.nsims = nsims;
    out.frequency = static_cast<double>(total) / static_cast<double>(nsims);
    out.std_error = std::sqrt(out.frequency * (1.0 - out.frequency) / static_cast<double>(nsims));
    return out;
}

struct McDeltaRss {
    double mean = 0.0;
    double variance = 0.0;
    std::vector<double> draws;   ///< sorted
    double ks_statistic = 0.0;   ///< against the delta_rss_gamma law
};

/// Samples Delta/sigma^2 = (1 - df(lambda)/p) * |X^T y|^2 on an orthonormal
/// p-column design and summarizes it against the Gamma law.
inline McDeltaRss mc_delta_rss(int p, double lambda, long long nsims, std::uint64_t seed,
                               int threads = 1) {
    if (nsims < 1) throw validation_error("mc_delta_rss: nsims must be >= 1");
    const GammaParams gp = delta_rss_gamma(p, lambda);
    const int n = p + 5;
    const Eigen::MatrixXd X = orthonormal_columns(n, p, seed);
    const double factor = 1.0 - static_cast<double>(p) * df_weight(1.0, lambda) / static_cast<double>(p);

    McDeltaRss out;
    out.draws.resize(static_cast<std::size_t>(nsims));
    const long long blocks = (nsims + detail::mc_block_size - 1) / detail::mc_block_size;
    parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b) {
        auto eng = make_engine(seed + 1 + static_cast<std::uint64_t>(b));
        const long long lo = static_cast<long long>(b) * detail::mc_block_size;
        const long long hi = std::min(nsims, lo + detail::mc_block_size);
        for (long long s = lo; s < hi; ++s) {
            const Eigen::VectorXd y = gaussian_vector(eng, n);
            out.draws[static_cast<std::size_t>(s)] = factor * (X.transpose() * y).squaredNorm();
        }
    });

    double sum = 0.0;
    for (double v : out.draws) sum += v;
    out.mean = sum / static_cast<double>(nsims);
    double ss = 0.0;
    for (double v : out.draws) ss += (v - out.mean) * (v - out.mean);
    out.variance = ss / static_cast<double>(nsims - 1);

    std::sort(out.draws.begin(), out.draws.end());
    double ks = 0.0;
    for (long long i = 0; i < nsims; ++i) {
        const double cdf = gamma_cdf(gp.shape, gp.scale, out.draws[static_cast<std::size_t>(i)]);
        const double lo_step = static_cast<double>(i) / static_cast<double>(nsims);
        const double hi_step = static_cast<double>(i + 1) / static_cast<double>(nsims);
        ks = std::max({ks, std::abs(cdf - lo_step), std::abs(cdf - hi_step)});
    }
    out.ks_statistic = ks;
    return out;
}

} // namespace sgb
