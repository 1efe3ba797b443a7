#pragma once

#include <Eigen/Dense>

namespace nouk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric positive-semidefinite covariance held either as a diagonal or as
/// an eigendecomposition. Eigenvalues below the rank tolerance
/// N * 2^-40 * lambda_max count as zero; the pseudo-inverse and its square
/// root drop those directions.
class Covariance {
public:
    static Covariance diagonal(Vector q);
    /// Symmetrizes `q`, clips negative eigenvalues inside the tolerance and
    /// rejects larger negative ones with an Internal error.
    static Covariance dense(const Matrix& q);

    int dim() const noexcept { return static_cast<int>(eigenvalues_.size()); }
    bool is_diagonal() const noexcept { return diagonal_; }

    /// Eigenvalues in eigenbasis order (mode order for diagonal covariances).
    const Vector& eigenvalues() const noexcept { return eigenvalues_; }
    /// Orthonormal eigenvectors as columns; identity for diagonal covariances.
    Matrix eigenvectors() const;

    double rank_tolerance() const noexcept { return tolerance_; }
    bool is_null(int k) const { return eigenvalues_(k) <= tolerance_; }
    int rank() const;
    double trace() const;
    /// max |Q - Q^T| of the input, relative to max |entry|; 0 for diagonals.
    double symmetry_defect() const noexcept { return symmetry_defect_; }

    Matrix matrix() const;
    /// S with S S^T = Q (S = V diag(sqrt(lambda))).
    Matrix sqrt_factor() const;
    /// Symmetric pseudo-inverse square root V diag(lambda^-1/2 on range) V^T.
    Matrix pinv_sqrt() const;

    Vector to_eigen(const Vector& v) const;
    Vector from_eigen(const Vector& c) const;

    /// S z for z given in eigen coordinates.
    Vector sqrt_apply(const Vector& z) const;
    Vector pinv_apply(const Vector& v) const;
    Vector pinv_sqrt_apply(const Vector& v) const;
    /// l^T Q l
    double quadratic(const Vector& l) const;

    /// Throws KernelComponent (1-based eigen index) when v has a component on a
    /// null eigenvector beyond 1e-10 relative to |v|.
    void require_in_range(const Vector& v) const;

private:
    Covariance() = default;
    void set_tolerance();

    bool diagonal_ = true;
    Vector eigenvalues_;
    Matrix eigenvectors_;
    Matrix matrix_;
    double tolerance_ = 0.0;
    double symmetry_defect_ = 0.0;
};

/// Mean m^x(t, s) and covariance Q(t, s) of the transition kernel.
struct GaussianState {
    Vector mean;
    Covariance cov;
};

}  // namespace nouk
