#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "sgboost/ridge.hpp"
#include "sgboost/rng.hpp"

using namespace sgb;

namespace {

// independent oracle: dense normal-equations ridge solve, no SVD involved
Eigen::VectorXd ridge_oracle(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, double lambda) {
    const Eigen::MatrixXd A =
        M.transpose() * M + lambda * Eigen::MatrixXd::Identity(M.cols(), M.cols());
    return A.ldlt().solve(M.transpose() * y);
}

// independent oracle: bisection on effective_df run at a different tolerance
double lambda_oracle(const Eigen::VectorXd& d, double target) {
    double lo = 0.0, hi = d[0] * d[0];
    while (effective_df(d, hi) >= target) hi *= 2.0;
    for (int i = 0; i < 500; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (effective_df(d, mid) > target) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("effective and trace df on single values") {
    Eigen::VectorXd d(1);
    d << 2.0;
    REQUIRE(effective_df(d, 4.0) == Catch::Approx(0.75).margin(1e-14));   // 2*(4/8) - 16/64
    REQUIRE(trace_df(d, 4.0) == Catch::Approx(0.5).margin(1e-14));
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    REQUIRE(effective_df(ones, 0.0) == 3.0);
    Eigen::VectorXd two_ones = Eigen::VectorXd::Ones(2);
    REQUIRE(trace_df(two_ones, 1.0) == Catch::Approx(1.0).margin(1e-14));
    Eigen::VectorXd one(1);
    one << 1.0;
    REQUIRE(effective_df(one, 1e12) <= 1e-11);
}

TEST_CASE("df monotonicity and trace <= effective") {
    auto eng = make_engine(3);
    std::uniform_real_distribution<double> unif(0.2, 3.0);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd d(4);
        for (int j = 0; j < 4; ++j) d[j] = unif(eng);
        double prev_eff = effective_df(d, 0.0), prev_tr = trace_df(d, 0.0);
        for (double lam : {0.01, 0.1, 0.5, 1.0, 5.0, 20.0, 100.0}) {
            const double eff = effective_df(d, lam), tr = trace_df(d, lam);
            REQUIRE(eff < prev_eff);
            REQUIRE(tr < prev_tr);
            REQUIRE(tr <= eff);
            prev_eff = eff;
            prev_tr = tr;
        }
    }
}

TEST_CASE("lambda_for_df_single closed form") {
    REQUIRE(lambda_for_df_single(2.0, 0.75) == Catch::Approx(4.0).margin(1e-12));
    REQUIRE(lambda_for_df_single(3.7, 1.0) == 0.0);
    REQUIRE(lambda_for_df_single(1.0, 0.5) == Catch::Approx(1.0 + std::sqrt(2.0)).margin(1e-12));
    REQUIRE_THROWS_AS(lambda_for_df_single(1.0, 0.0), validation_error);
    REQUIRE_THROWS_AS(lambda_for_df_single(1.0, 1.5), validation_error);
}

TEST_CASE("lambda_for_df bisection against the closed form and a fine-grid oracle") {
    Eigen::VectorXd d(1);
    d << 2.0;
    REQUIRE(lambda_for_df(d, 0.75) == Catch::Approx(4.0).margin(1e-8));

    Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    REQUIRE(lambda_for_df(ones, 3.0 - 1e-12) <= 1e-6);

    Eigen::VectorXd d2(2);
    d2 << 3.0, 1.0;
    const double lam = lambda_for_df(d2, 1.0);
    REQUIRE(effective_df(d2, lam) == Catch::Approx(1.0).margin(1e-10));
    REQUIRE(lam == Catch::Approx(lambda_oracle(d2, 1.0)).epsilon(1e-7));

    REQUIRE_THROWS_WITH(lambda_for_df(d2, 2.0), Catch::Matchers::ContainsSubstring("target exceeds rank"));
}

TEST_CASE("lambda/df round trip on seeded draws") {
    auto eng = make_engine(17);
    std::uniform_real_distribution<double> dval(0.3, 3.0);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int r = 1 + static_cast<int>(eng() % 5);
        Eigen::VectorXd d(r);
        for (int j = 0; j < r; ++j) d[j] = dval(eng);
        const double target = 0.05 + unif01(eng) * (r - 0.1);
        const double lam = lambda_for_df(d, target);
        REQUIRE(effective_df(d, lam) == Catch::Approx(target).margin(1e-9));
    }
}

TEST_CASE("shrinkage ordering: effective-df penalty at least the trace-df penalty") {
    auto eng = make_engine(23);
    std::uniform_real_distribution<double> dval(0.3, 3.0);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        const int r = 1 + static_cast<int>(eng() % 4);
        Eigen::VectorXd d(r);
        for (int j = 0; j < r; ++j) d[j] = dval(eng);
        const double target = 0.1 + unif01(eng) * (r - 0.2);
        const double lam_eff = lambda_for_df(d, target);
        // matching trace df by bisection
        double lo = 0.0, hi = d[0] * d[0];
        while (trace_df(d, hi) >= target) hi *= 2.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (trace_df(d, mid) > target) lo = mid; else hi = mid;
        }
        const double lam_tr = 0.5 * (lo + hi);
        REQUIRE(lam_eff >= lam_tr - 1e-9);
    }
}

TEST_CASE("ridge_fit examples") {
    Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd y(2);
    y << 2.0, 4.0;
    const Eigen::VectorXd beta = ridge_fit(I2, y, 1.0);
    REQUIRE(beta[0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(beta[1] == Catch::Approx(2.0).margin(1e-12));

    Eigen::MatrixXd x(4, 1);
    x << 1.0, 1.0, 1.0, 1.0;  // x^T x = 4
    Eigen::VectorXd y2(4);
    y2 << 2.0, 2.0, 2.0, 2.0;  // x^T y = 8
    REQUIRE(ridge_fit(x, y2, 4.0)[0] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("ridge_fit at lambda 0 matches least squares orthogonality") {
    auto eng = make_engine(5);
    const Eigen::MatrixXd M = gaussian_matrix(eng, 10, 3);
    const Eigen::VectorXd y = gaussian_vector(eng, 10);
    const Eigen::VectorXd beta = ridge_fit(M, y, 0.0);
    REQUIRE((M.transpose() * (y - M * beta)).norm() <= 1e-8);

    Eigen::MatrixXd deficient(4, 2);
    deficient.col(0) << 1, 2, 3, 4;
    deficient.col(1) = 2.0 * deficient.col(0);
    REQUIRE_THROWS_AS(ridge_fit(deficient, y.head(4), 0.0), validation_error);
}

TEST_CASE("ridge_fit agrees with the normal-equations oracle") {
    auto eng = make_engine(9);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::MatrixXd M = gaussian_matrix(eng, 8, 3);
        const Eigen::VectorXd y = gaussian_vector(eng, 8);
        std::uniform_real_distribution<double> lamd(0.1, 5.0);
        const double lam = lamd(eng);
        const Eigen::VectorXd a = ridge_fit(M, y, lam);
        const Eigen::VectorXd b = ridge_oracle(M, y, lam);
        REQUIRE((a - b).norm() <= 1e-10 * std::max(1.0, b.norm()));
    }
}

TEST_CASE("rss_one_step examples and oracle") {
    // orthogonal outcome explains nothing
    Eigen::MatrixXd M(4, 1);
    M << 1, 0, 0, 0;
    Eigen::VectorXd y(4);
    y << 0, 1, 2, 0;
    REQUIRE(rss_one_step(M, y, 0.7) == Catch::Approx(y.squaredNorm()).margin(1e-12));

    Eigen::MatrixXd I4 = Eigen::MatrixXd::Identity(4, 4);
    REQUIRE(rss_one_step(I4, y, 0.0) == Catch::Approx(0.0).margin(1e-12));

    auto eng = make_engine(31);
    const Eigen::MatrixXd R = gaussian_matrix(eng, 8, 2);
    const Eigen::VectorXd yr = gaussian_vector(eng, 8);
    const Eigen::VectorXd beta = ridge_oracle(R, yr, 3.0);
    const double direct = (yr - R * beta).squaredNorm();
    REQUIRE(rss_one_step(R, yr, 3.0) == Catch::Approx(direct).margin(1e-10));
}

TEST_CASE("rss_one_step tends to |y|^2 as lambda grows") {
    auto eng = make_engine(33);
    const Eigen::MatrixXd M = gaussian_matrix(eng, 6, 2);
    const Eigen::VectorXd y = gaussian_vector(eng, 6);
    REQUIRE(rss_one_step(M, y, 1e12) == Catch::Approx(y.squaredNorm()).epsilon(1e-9));
}

TEST_CASE("boosted_rss basics") {
    auto eng = make_engine(41);
    const Eigen::MatrixXd M = gaussian_matrix(eng, 7, 3);
    const Eigen::VectorXd y = gaussian_vector(eng, 7);
    REQUIRE(boosted_rss(M, y, 2.0, 0) == Catch::Approx(rss_one_step(M, y, 2.0)).margin(1e-12));

    const Eigen::MatrixXd sq = gaussian_matrix(eng, 4, 4);
    const Eigen::VectorXd y4 = gaussian_vector(eng, 4);
    REQUIRE(boosted_rss(sq, y4, 0.0, 0) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("boosted_rss single-column hand example") {
    // d^2 = 4, lambda = 4: per-step shrink 0.5, H(1) = (1 - 0.25) u u^T
    Eigen::MatrixXd x(4, 1);
    x << 1, 1, 1, 1;
    Eigen::VectorXd y(4);
    y << 1, 2, 0, 1;
    const Eigen::VectorXd u = x / 2.0;
    const double c = u.col(0).dot(y);
    const double expect = (y - 0.75 * c * u).squaredNorm();
    REQUIRE(boosted_rss(x, y, 4.0, 1) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("boosted_rss equals a literal eta=1 boosting loop") {
    auto eng = make_engine(47);
    for (int rep = 0; rep < 5; ++rep) {
        const Eigen::MatrixXd M = gaussian_matrix(eng, 9, 3);
        const Eigen::VectorXd y = gaussian_vector(eng, 9);
        const double lam = 1.5;
        Eigen::VectorXd f = Eigen::VectorXd::Zero(9);
        for (int m = 0; m <= 6; ++m) {
            f += M * ridge_oracle(M, y - f, lam);  // one eta=1 step on the residuals
            const double direct = (y - f).squaredNorm();
            REQUIRE(boosted_rss(M, y, lam, m) == Catch::Approx(direct).epsilon(1e-10));
        }
    }
}

TEST_CASE("boosted_rss decreases in m towards the projection RSS") {
    auto eng = make_engine(53);
    const Eigen::MatrixXd M = gaussian_matrix(eng, 8, 3);
    const Eigen::VectorXd y = gaussian_vector(eng, 8);
    const SvdCache svd = thin_svd(M);
    const double projection_rss = y.squaredNorm() - (svd.U.transpose() * y).squaredNorm();
    double prev = boosted_rss(svd, y, 2.0, 0);
    for (int m = 1; m <= 200; ++m) {
        const double cur = boosted_rss(svd, y, 2.0, m);
        REQUIRE(cur <= prev + 1e-12);
        prev = cur;
    }
    REQUIRE(prev == Catch::Approx(projection_rss).margin(1e-6));
}
