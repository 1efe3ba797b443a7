#pragma once

#include "nouk/covariance.hpp"
#include "nouk/model.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace nouk {

/// Stable 64-bit identifier for a named operation (FNV-1a).
std::uint64_t op_id(std::string_view name);
/// Derives a child identifier, e.g. one per quadrature node.
std::uint64_t op_id(std::uint64_t parent, std::uint64_t child);

/// Counter-based normal variates: the value for (op, sample, coordinate) is a
/// pure function of the seed, so any partition of the samples over threads
/// sees the same numbers.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform in (0, 1).
    double uniform(std::uint64_t op, std::uint64_t sample, std::uint64_t coord) const;
    double normal(std::uint64_t op, std::uint64_t sample, std::uint64_t coord) const;
    /// z(k) = normal(op, sample, k) for every k.
    void fill(std::uint64_t op, std::uint64_t sample, Eigen::Ref<Vector> z) const;

private:
    std::uint64_t seed_;
};

/// n samples of N(mean, cov) as columns.
Matrix sample(const Covariance& cov, const Vector& mean, int n, std::uint64_t seed,
              std::uint64_t op);

/// y -> <Q^+ g, y>, with coefficients g_k / lambda_k in the eigenbasis.
struct HHatFunctional {
    Vector eigen_coefficients;
    Vector state_coefficients;
    /// |Q^{-1/2} g|^2, the variance of the functional under N(0, Q).
    double norm_sq = 0.0;

    double operator()(const Vector& y) const { return state_coefficients.dot(y); }
    /// Same functional for y given in eigen coordinates.
    double eval_eigen(const Vector& y_eigen) const { return eigen_coefficients.dot(y_eigen); }
};

/// Throws KernelComponent (1-based eigen index) when g leaves range(Q).
HHatFunctional h_hat(const Covariance& cov, const Vector& g);

/// exp(-|Q^{-1/2} h|^2 / 2 + h_hat_h(y)).
double cm_density(const Covariance& cov, const Vector& h, const Vector& y);

constexpr int kDefaultHermiteNodes = 64;

/// E phi(mean + Y), Y ~ N(0, cov), by Gauss-Hermite quadrature. Cosines reduce
/// to one-dimensional rules (any covariance); separable products need a
/// diagonal covariance and use one rule per mode. Other functions throw
/// NotSeparable.
double gh_expectation(const Covariance& cov, const Vector& mean, const TestFunction& phi,
                      int nodes = kDefaultHermiteNodes);

/// For a diagonal covariance and a cosine or separable phi, returns for every
/// subset B of the weight functionals the value
///   E[ D^k phi(mean + Y)(u_1, ..., u_k) * prod_{i in B} <c_i, Y> ],
/// indexed by the bitmask of B. The mode-wise factorization of
/// exp(sum_i eps_i <c_i, Y>) in the algebra eps_i^2 = 0 turns the tensor
/// integral into per-mode Gauss-Hermite moments.
std::vector<double> gh_weighted_moments(const Covariance& cov, const Vector& mean,
                                        const TestFunction& phi, std::span<const Vector> transported,
                                        std::span<const Vector> weights,
                                        int nodes = kDefaultHermiteNodes);

/// E[f^{(k)}(a + sigma Z) He_n(Z)] for the profile f of a ridge test function,
/// by composite Gauss-Legendre quadrature split at the kinks of the profile.
/// `error` receives |20-point - 10-point| summed over the pieces.
double ridge_hermite_moment(const TestFunction& phi, double a, double sigma, int n, int k = 0,
                            double* error = nullptr);

/// Probabilists' Hermite polynomial He_n(z).
double hermite_he(int n, double z);

}  // namespace nouk
