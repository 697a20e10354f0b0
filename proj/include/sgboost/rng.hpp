#pragma once
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace sgb {

/// splitmix64 finalizer. Used to derive well-separated engine seeds from
/// sequential stream ids (seed + i), which would otherwise be correlated
/// mt19937 starting points.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(mix_seed(seed));
}

/// n iid standard normal draws. A fresh distribution object per call keeps
/// the draw sequence a function of the engine state alone.
inline Eigen::VectorXd gaussian_vector(std::mt19937_64& eng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(eng);
    return v;
}

inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& eng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(eng);
    return m;
}

/// Column-orthonormal n x k matrix obtained from a seeded Gaussian draw.
inline Eigen::MatrixXd orthonormal_columns(Eigen::Index n, Eigen::Index k, std::uint64_t seed) {
    auto eng = make_engine(seed);
    Eigen::MatrixXd g = gaussian_matrix(eng, n, k);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    // fix signs so the result does not depend on QR's internal conventions
    for (Eigen::Index j = 0; j < k; ++j)
        if (q(0, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

} // namespace sgb
