#include "nouk/covariance.hpp"

#include "nouk/error.hpp"

#include <cmath>

namespace nouk {

namespace {

constexpr double kUlpScale = 0x1p-40;

}  // namespace

Covariance Covariance::diagonal(Vector q)
{
    Covariance c;
    c.diagonal_ = true;
    c.eigenvalues_ = std::move(q);
    for (Eigen::Index k = 0; k < c.eigenvalues_.size(); ++k) {
        if (!std::isfinite(c.eigenvalues_(k))) {
            fail(ErrorKind::Internal, "non-finite covariance entry", static_cast<int>(k) + 1);
        }
    }
    c.set_tolerance();
    for (Eigen::Index k = 0; k < c.eigenvalues_.size(); ++k) {
        if (c.eigenvalues_(k) < 0.0) {
            if (-c.eigenvalues_(k) > c.tolerance_) {
                fail(ErrorKind::Internal, "covariance has a negative variance",
                     static_cast<int>(k) + 1);
            }
            c.eigenvalues_(k) = 0.0;
        }
    }
    return c;
}

Covariance Covariance::dense(const Matrix& q)
{
    if (q.rows() != q.cols()) fail(ErrorKind::Internal, "covariance must be square");
    Covariance c;
    c.diagonal_ = false;
    const double scale = q.cwiseAbs().maxCoeff();
    c.symmetry_defect_ = scale > 0.0 ? (q - q.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
    c.matrix_ = 0.5 * (q + q.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(c.matrix_);
    if (solver.info() != Eigen::Success) fail(ErrorKind::Internal, "eigensolver failed");
    c.eigenvalues_ = solver.eigenvalues();
    c.eigenvectors_ = solver.eigenvectors();
    c.set_tolerance();
    for (Eigen::Index k = 0; k < c.eigenvalues_.size(); ++k) {
        if (c.eigenvalues_(k) < 0.0) {
            if (-c.eigenvalues_(k) > c.tolerance_) {
                fail(ErrorKind::Internal, "covariance is not positive semidefinite",
                     static_cast<int>(k) + 1);
            }
            c.eigenvalues_(k) = 0.0;
        }
    }
    return c;
}

void Covariance::set_tolerance()
{
    const double top = eigenvalues_.size() ? eigenvalues_.cwiseAbs().maxCoeff() : 0.0;
    tolerance_ = static_cast<double>(eigenvalues_.size()) * kUlpScale * top;
}

Matrix Covariance::eigenvectors() const
{
    if (diagonal_) return Matrix::Identity(dim(), dim());
    return eigenvectors_;
}

int Covariance::rank() const
{
    int r = 0;
    for (int k = 0; k < dim(); ++k) r += is_null(k) ? 0 : 1;
    return r;
}

double Covariance::trace() const
{
    return diagonal_ ? eigenvalues_.sum() : matrix_.trace();
}

Matrix Covariance::matrix() const
{
    if (diagonal_) return eigenvalues_.asDiagonal();
    return matrix_;
}

Matrix Covariance::sqrt_factor() const
{
    const Vector root = eigenvalues_.cwiseSqrt();
    if (diagonal_) return root.asDiagonal();
    return eigenvectors_ * root.asDiagonal();
}

namespace {

Vector pinv_power(const Covariance& c, double power)
{
    Vector out(c.dim());
    for (int k = 0; k < c.dim(); ++k) {
        out(k) = c.is_null(k) ? 0.0 : std::pow(c.eigenvalues()(k), power);
    }
    return out;
}

}  // namespace

Matrix Covariance::pinv_sqrt() const
{
    const Vector d = pinv_power(*this, -0.5);
    if (diagonal_) return d.asDiagonal();
    return eigenvectors_ * d.asDiagonal() * eigenvectors_.transpose();
}

Vector Covariance::to_eigen(const Vector& v) const
{
    return diagonal_ ? v : Vector(eigenvectors_.transpose() * v);
}

Vector Covariance::from_eigen(const Vector& c) const
{
    return diagonal_ ? c : Vector(eigenvectors_ * c);
}

Vector Covariance::sqrt_apply(const Vector& z) const
{
    return from_eigen(eigenvalues_.cwiseSqrt().cwiseProduct(z));
}

Vector Covariance::pinv_apply(const Vector& v) const
{
    return from_eigen(pinv_power(*this, -1.0).cwiseProduct(to_eigen(v)));
}

Vector Covariance::pinv_sqrt_apply(const Vector& v) const
{
    return from_eigen(pinv_power(*this, -0.5).cwiseProduct(to_eigen(v)));
}

double Covariance::quadratic(const Vector& l) const
{
    if (diagonal_) return l.cwiseAbs2().dot(eigenvalues_);
    return l.dot(matrix_ * l);
}

void Covariance::require_in_range(const Vector& v) const
{
    const Vector c = to_eigen(v);
    const double scale = v.norm();
    for (int k = 0; k < dim(); ++k) {
        if (is_null(k) && std::abs(c(k)) > 1e-10 * scale) {
            fail(ErrorKind::KernelComponent,
                 "direction has a component on null eigenvector " + std::to_string(k + 1), k + 1);
        }
    }
}

}  // namespace nouk
