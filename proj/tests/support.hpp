#pragma once

#include "nouk/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <random>

namespace nouk::test {

/// Kind of the nouk::Error thrown by f, or nullopt when f returns normally.
template <class F>
std::optional<ErrorKind> thrown_kind(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

inline double rel_diff(double a, double b)
{
    return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = u(rng);
    return v;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols)
{
    std::normal_distribution<double> z;
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = z(rng);
    return m;
}

/// Random symmetric positive-definite matrix with eigenvalues in [lo, hi].
inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n, double lo = 0.2, double hi = 3.0)
{
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, n, n));
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::VectorXd lambda = random_vector(rng, n, lo, hi);
    return q * lambda.asDiagonal() * q.transpose();
}

}  // namespace nouk::test
