#include "nouk/propagator.hpp"

#include "nouk/error.hpp"
#include "nouk/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace nouk {

// ---------------------------------------------------------------------------
// Propagator

Propagator Propagator::diagonal(double s, double t, Vector multipliers)
{
    Propagator p;
    p.s_ = s;
    p.t_ = t;
    p.diagonal_ = true;
    p.multipliers_ = std::move(multipliers);
    return p;
}

Propagator Propagator::dense(double s, double t, Matrix matrix)
{
    Propagator p;
    p.s_ = s;
    p.t_ = t;
    p.diagonal_ = false;
    p.matrix_ = std::move(matrix);
    return p;
}

int Propagator::dim() const
{
    return static_cast<int>(diagonal_ ? multipliers_.size() : matrix_.rows());
}

Matrix Propagator::matrix() const
{
    if (diagonal_) return multipliers_.asDiagonal();
    return matrix_;
}

Vector Propagator::apply(const Vector& x) const
{
    return diagonal_ ? Vector(multipliers_.cwiseProduct(x)) : Vector(matrix_ * x);
}

Vector Propagator::apply_transpose(const Vector& x) const
{
    return diagonal_ ? Vector(multipliers_.cwiseProduct(x)) : Vector(matrix_.transpose() * x);
}

Propagator Propagator::compose(const Propagator& other) const
{
    if (diagonal_ && other.diagonal_) {
        return diagonal(other.s_, t_, multipliers_.cwiseProduct(other.multipliers_));
    }
    return dense(other.s_, t_, matrix() * other.matrix());
}

// ---------------------------------------------------------------------------
// Dense integrator

namespace {

void require_interval(const EvolutionModel& model, double s, double t)
{
    if (!(s >= 0.0) || !(s <= t) || !(t <= model.horizon() * (1.0 + 1e-14))) {
        fail(ErrorKind::Validation, "require 0 <= s <= t <= T");
    }
}

// State [U | g | Q] with dU = A U, dg = A g + f, dQ = A Q + Q A^T + B B^T.
Matrix lyapunov_rhs(const EvolutionModel& model, double tau, const Matrix& y)
{
    const int n = model.dim();
    const Matrix a = model.drift(tau);
    const Matrix b = model.diffusion(tau);
    Matrix out(n, 2 * n + 1);
    out.leftCols(n) = a * y.leftCols(n);
    out.col(n) = a * y.col(n) + model.affine(tau);
    const Matrix aq = a * y.rightCols(n);
    out.rightCols(n) = aq + aq.transpose() + b * b.transpose();
    return out;
}

Matrix rk4(const EvolutionModel& model, double s, double t, int steps)
{
    const int n = model.dim();
    Matrix y = Matrix::Zero(n, 2 * n + 1);
    y.leftCols(n).setIdentity();
    const double h = (t - s) / steps;
    for (int i = 0; i < steps; ++i) {
        const double tau = s + i * h;
        const Matrix k1 = lyapunov_rhs(model, tau, y);
        const Matrix k2 = lyapunov_rhs(model, tau + 0.5 * h, y + 0.5 * h * k1);
        const Matrix k3 = lyapunov_rhs(model, tau + 0.5 * h, y + 0.5 * h * k2);
        const Matrix k4 = lyapunov_rhs(model, tau + h, y + h * k3);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

constexpr double kRichardsonLimit = 1e-8;

// Fixed step T * 1e-3, one halving; the Richardson-corrected state is returned.
Matrix solve_dense(const EvolutionModel& model, double s, double t)
{
    const int n = model.dim();
    if (t == s) {
        Matrix y = Matrix::Zero(n, 2 * n + 1);
        y.leftCols(n).setIdentity();
        return y;
    }
    const double h0 = model.horizon() * 1e-3;
    const int steps = std::max(1, static_cast<int>(std::ceil((t - s) / h0 - 1e-9)));
    const Matrix coarse = rk4(model, s, t, steps);
    const Matrix fine = rk4(model, s, t, 2 * steps);
    const Matrix correction = (fine - coarse) / 15.0;
    const double scale = std::max(1.0, fine.cwiseAbs().maxCoeff());
    const double estimate = correction.cwiseAbs().maxCoeff() / scale;
    if (!std::isfinite(estimate) || estimate > kRichardsonLimit) {
        fail(ErrorKind::IntegratorFailure,
             "RK4 error estimate " + format_double(estimate) + " exceeds 1e-8 on [" +
                 format_double(s) + ", " + format_double(t) + "]");
    }
    return fine + correction;
}

bool constant_coefficient(const TimeFn& fn)
{
    return fn.kind() == TimeFn::Kind::Const || fn.kind() == TimeFn::Kind::PresetHeat;
}

// (e^{alpha tau} - 1) / alpha, tau at alpha = 0.
double exp_ratio(double alpha, double tau)
{
    return alpha == 0.0 ? tau : std::expm1(alpha * tau) / alpha;
}

double largest_singular_value(const Matrix& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

}  // namespace

// ---------------------------------------------------------------------------
// Transition, mean, covariance

Propagator transition(const EvolutionModel& model, double s, double t)
{
    require_interval(model, s, t);
    const int n = model.dim();
    if (model.is_diagonal()) {
        Vector d(n);
        for (int k = 0; k < n; ++k) {
            d(k) = t == s ? 1.0 : std::exp(model.drift_coefficient(k).integral(s, t));
        }
        return Propagator::diagonal(s, t, std::move(d));
    }
    return Propagator::dense(s, t, solve_dense(model, s, t).leftCols(n));
}

Vector affine_shift(const EvolutionModel& model, double s, double t)
{
    require_interval(model, s, t);
    const int n = model.dim();
    if (!model.has_affine_term() || t == s) return Vector::Zero(n);
    if (!model.is_diagonal()) return solve_dense(model, s, t).col(n);
    Vector g(n);
    for (int k = 0; k < n; ++k) {
        const TimeFn& a = model.drift_coefficient(k);
        const TimeFn& f = model.affine_coefficients()[static_cast<std::size_t>(k)];
        if (f.is_zero()) {
            g(k) = 0.0;
        } else if (constant_coefficient(a) && f.kind() == TimeFn::Kind::Const) {
            g(k) = f(s) * exp_ratio(a(s), t - s);
        } else {
            g(k) = integrate_adaptive(
                [&](double r) { return std::exp(a.integral(r, t)) * f(r); }, s, t);
        }
    }
    return g;
}

Vector mean(const EvolutionModel& model, double s, double t, const Vector& x)
{
    if (x.size() != model.dim()) fail(ErrorKind::Validation, "x must have N entries");
    return transition(model, s, t).apply(x) + affine_shift(model, s, t);
}

Covariance covariance(const EvolutionModel& model, double s, double t)
{
    require_interval(model, s, t);
    const int n = model.dim();
    if (!model.is_diagonal()) {
        const Matrix y = solve_dense(model, s, t);
        return Covariance::dense(y.rightCols(n));
    }
    Vector q(n);
    for (int k = 0; k < n; ++k) {
        const TimeFn& a = model.drift_coefficient(k);
        const TimeFn& b = model.diffusion_coefficient(k);
        if (t == s || b.is_zero()) {
            q(k) = 0.0;
        } else if (constant_coefficient(a) && constant_coefficient(b)) {
            q(k) = b(s) * b(s) * exp_ratio(2.0 * a(s), t - s);
        } else {
            q(k) = integrate_adaptive(
                [&](double r) {
                    const double br = b(r);
                    return std::exp(2.0 * a.integral(r, t)) * br * br;
                },
                s, t);
        }
    }
    return Covariance::diagonal(std::move(q));
}

Matrix covariance_by_quadrature(const EvolutionModel& model, double s, double t)
{
    require_interval(model, s, t);
    const int n = model.dim();
    Matrix total = Matrix::Zero(n, n);
    if (t == s) return total;
    constexpr int panels = 16;
    const auto& rule = gauss_legendre(8);
    const double width = (t - s) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = s + (p + 0.5) * width;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double r = mid + 0.5 * width * rule.nodes[i];
            const Matrix ub = transition(model, r, t).matrix() * model.diffusion(r);
            total += 0.5 * width * rule.weights[i] * (ub * ub.transpose());
        }
    }
    return total;
}

GaussianState gaussian_state(const EvolutionModel& model, double s, double t, const Vector& x)
{
    return GaussianState{mean(model, s, t, x), covariance(model, s, t)};
}

// ---------------------------------------------------------------------------
// Lambda

Vector LambdaOperator::apply(const Vector& h) const
{
    return diagonal ? Vector(entries.cwiseProduct(h)) : Vector(matrix * h);
}

LambdaOperator lambda_operator(const EvolutionModel& model, const DirectionSpace& space, double s,
                               double t)
{
    if (!(s < t)) fail(ErrorKind::Validation, "require s < t");
    if (space.dim() != model.dim()) {
        fail(ErrorKind::Validation, "direction space dimension differs from N");
    }
    const Propagator u = transition(model, s, t);
    const Covariance q = covariance(model, s, t);
    LambdaOperator out;
    const Vector& w = space.weights();
    if (model.is_diagonal()) {
        out.diagonal = true;
        out.entries = Vector::Zero(model.dim());
        for (int k = 0; k < model.dim(); ++k) {
            const double d = u.multipliers()(k);
            if (q.is_null(k)) {
                if (d != 0.0) out.nonsmoothing_modes.push_back(k + 1);
                continue;
            }
            out.entries(k) = d / (w(k) * std::sqrt(q.eigenvalues()(k)));
        }
        out.norm = out.entries.cwiseAbs().maxCoeff();
    } else {
        out.diagonal = false;
        const Matrix transported = u.matrix() * w.cwiseInverse().asDiagonal();
        const Matrix projected = q.eigenvectors().transpose() * transported;
        const double scale = transported.norm();
        for (int k = 0; k < model.dim(); ++k) {
            if (q.is_null(k) && projected.row(k).norm() > 1e-10 * scale) {
                out.nonsmoothing_modes.push_back(k + 1);
            }
        }
        out.matrix = q.pinv_sqrt() * transported;
        out.norm = largest_singular_value(out.matrix);
    }
    if (!out.nonsmoothing_modes.empty()) {
        std::string modes;
        for (int k : out.nonsmoothing_modes) modes += (modes.empty() ? "" : ", ") + std::to_string(k);
        fail(ErrorKind::NotSmoothing,
             "U(t,s) transports directions onto the kernel of Q(t,s) (mode " + modes + ")",
             out.nonsmoothing_modes.front());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

MinEnergyResult gramian_min_energy(const EvolutionModel& model, double s, double t,
                                   const Vector& target, int grid_size)
{
    if (!(s < t)) fail(ErrorKind::Validation, "require s < t");
    if (grid_size < 1) fail(ErrorKind::Validation, "grid size must be >= 1");
    if (target.size() != model.dim()) fail(ErrorKind::Validation, "target must have N entries");
    const int n = model.dim();
    MinEnergyResult out;
    out.control = Matrix::Zero(n, grid_size);
    if (target.isZero(0.0)) return out;

    const double step = (t - s) / grid_size;
    const double root = std::sqrt(step);
    // Columns scaled by sqrt(step) so the Euclidean norm of the unknown is the
    // discrete L2 norm of the control.
    Matrix l(n, static_cast<Eigen::Index>(n) * grid_size);
    for (int j = 0; j < grid_size; ++j) {
        const double sigma = s + (j + 0.5) * step;
        l.middleCols(static_cast<Eigen::Index>(j) * n, n) =
            root * transition(model, sigma, t).matrix() * model.diffusion(sigma);
    }
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(l);
    const Vector z = cod.solve(target);
    out.residual = (l * z - target).norm();
    if (out.residual > 1e-8 * target.norm()) {
        fail(ErrorKind::RangeError, "target is not reachable (residual " +
                                        format_double(out.residual) + ")");
    }
    for (int j = 0; j < grid_size; ++j) {
        out.control.col(j) = z.segment(static_cast<Eigen::Index>(j) * n, n) / root;
    }
    out.norm = z.norm();
    const Covariance q = covariance(model, s, t);
    out.exact_norm = q.pinv_sqrt_apply(target).norm();
    out.defect = std::abs(out.norm - out.exact_norm);
    return out;
}

double cocycle_defect(const EvolutionModel& model, double s, double r, double t)
{
    if (!(s <= r && r <= t)) fail(ErrorKind::Validation, "require s <= r <= t");
    const Propagator composed = transition(model, r, t).compose(transition(model, s, r));
    const Propagator direct = transition(model, s, t);
    if (composed.is_diagonal() && direct.is_diagonal()) {
        return (composed.multipliers() - direct.multipliers()).cwiseAbs().maxCoeff();
    }
    return largest_singular_value(composed.matrix() - direct.matrix());
}

MonotonicityResult cov_monotonicity_defect(const EvolutionModel& model, double t, double s1,
                                           double s2)
{
    if (!(s1 <= s2 && s2 < t)) fail(ErrorKind::Validation, "require s1 <= s2 < t");
    MonotonicityResult out;
    const Covariance q1 = covariance(model, s1, t);
    const Covariance q2 = covariance(model, s2, t);
    out.scale = std::max(q1.trace(), 0.0);
    if (s1 == s2) return out;
    const Matrix diff = q2.matrix() - q1.matrix();
    if (q1.is_diagonal() && q2.is_diagonal()) {
        out.defect = std::max(0.0, diff.diagonal().maxCoeff());
        out.lipschitz_ratio = diff.diagonal().cwiseAbs().maxCoeff() / (s2 - s1);
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (diff + diff.transpose()));
        out.defect = std::max(0.0, solver.eigenvalues().maxCoeff());
        out.lipschitz_ratio = largest_singular_value(diff) / (s2 - s1);
    }
    double u_bound = 0.0;
    constexpr int samples = 65;
    for (int i = 0; i < samples; ++i) {
        const double r = t * i / (samples - 1);
        const Propagator u = transition(model, r, t);
        u_bound = std::max(u_bound, u.is_diagonal() ? u.multipliers().cwiseAbs().maxCoeff()
                                                    : largest_singular_value(u.matrix()));
    }
    const double k = model.diffusion_bound();
    out.lipschitz_bound = u_bound * u_bound * k * k;
    return out;
}

namespace {

Matrix sqrt_matrix(const Covariance& q)
{
    const Matrix s = q.sqrt_factor();
    return q.is_diagonal() ? s : Matrix(s * q.eigenvectors().transpose());
}

void require_full_rank(const Covariance& q, const std::string& what)
{
    for (int k = 0; k < q.dim(); ++k) {
        if (q.is_null(k)) {
            fail(ErrorKind::RankDeficient, what + " is rank deficient (eigen index " +
                                               std::to_string(k + 1) + ")",
                 k + 1);
        }
    }
}

}  // namespace

EquivalenceConstants cm_equivalence_constants(const EvolutionModel& model, double t, double s1,
                                              double s2)
{
    if (!(s1 <= s2 && s2 < t)) fail(ErrorKind::Validation, "require s1 <= s2 < t");
    const Covariance q1 = covariance(model, s1, t);
    const Covariance q2 = covariance(model, s2, t);
    require_full_rank(q1, "Q(t,s1)");
    require_full_rank(q2, "Q(t,s2)");
    if (s1 == s2) return {};
    EquivalenceConstants out;
    out.c12 = largest_singular_value(q1.pinv_sqrt() * sqrt_matrix(q2));
    out.c21 = largest_singular_value(q2.pinv_sqrt() * sqrt_matrix(q1));
    return out;
}

EmbeddingConstant ht_embedding_constant(const EvolutionModel& model, double s, double t)
{
    if (!(s < t)) fail(ErrorKind::Validation, "require s < t");
    const Matrix b = model.diffusion(t);
    const Covariance qt = model.is_diagonal()
                              ? Covariance::diagonal(b.diagonal().cwiseAbs2())
                              : Covariance::dense(b * b.transpose());
    require_full_rank(qt, "Q(t) = B(t)B(t)^T");
    const Covariance qts = covariance(model, s, t);
    EmbeddingConstant out;
    out.value = largest_singular_value(qt.pinv_sqrt() * sqrt_matrix(qts));
    out.scaled = out.value / std::sqrt(t - s);
    return out;
}

}  // namespace nouk
