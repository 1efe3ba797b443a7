#pragma once

#include "nouk/covariance.hpp"
#include "nouk/model.hpp"

#include <vector>

namespace nouk {

/// U(t, s) as per-mode multipliers (diagonal and scalar models) or a matrix.
class Propagator {
public:
    static Propagator diagonal(double s, double t, Vector multipliers);
    static Propagator dense(double s, double t, Matrix matrix);

    double s() const noexcept { return s_; }
    double t() const noexcept { return t_; }
    bool is_diagonal() const noexcept { return diagonal_; }
    int dim() const;

    const Vector& multipliers() const noexcept { return multipliers_; }
    Matrix matrix() const;

    Vector apply(const Vector& x) const;
    /// U^T x
    Vector apply_transpose(const Vector& x) const;
    /// this * other, i.e. U(t, r) U(r, s) for this = U(t, r).
    Propagator compose(const Propagator& other) const;

private:
    Propagator() = default;

    double s_ = 0.0;
    double t_ = 0.0;
    bool diagonal_ = true;
    Vector multipliers_;
    Matrix matrix_;
};

Propagator transition(const EvolutionModel& model, double s, double t);

/// g(t, s) = int_s^t U(t, r) f(r) dr.
Vector affine_shift(const EvolutionModel& model, double s, double t);

/// m^x(t, s) = U(t, s) x + g(t, s).
Vector mean(const EvolutionModel& model, double s, double t, const Vector& x);

/// Q(t, s): per-mode quadrature for diagonal models, Lyapunov ODE for dense ones.
Covariance covariance(const EvolutionModel& model, double s, double t);

/// Q(t, s) by quadrature of U(t, r) B(r) B(r)^T U(t, r)^T over r; the
/// reference for the Lyapunov solve.
Matrix covariance_by_quadrature(const EvolutionModel& model, double s, double t);

GaussianState gaussian_state(const EvolutionModel& model, double s, double t, const Vector& x);

/// Q(t, s)^{-1/2} U(t, s) W^{-1} for the direction-space weights W.
struct LambdaOperator {
    bool diagonal = true;
    Vector entries;   // diagonal case
    Matrix matrix;    // dense case
    double norm = 0.0;
    std::vector<int> nonsmoothing_modes;  // 1-based; empty on success

    Vector apply(const Vector& h) const;
};

/// Throws NotSmoothing naming the first mode (1-based) whose variance vanishes
/// while U(t, s) transports a nonzero component into it.
LambdaOperator lambda_operator(const EvolutionModel& model, const DirectionSpace& space, double s,
                               double t);

struct MinEnergyResult {
    Matrix control;  // N x grid, column j is y(sigma_j)
    double norm = 0.0;
    double exact_norm = 0.0;
    double defect = 0.0;
    double residual = 0.0;
};

/// Minimum-norm control steering 0 to `target` on a uniform midpoint grid,
/// compared against |Q(t, s)^{-1/2} target|.
MinEnergyResult gramian_min_energy(const EvolutionModel& model, double s, double t,
                                   const Vector& target, int grid_size);

/// Operator norm of U(t, r) U(r, s) - U(t, s).
double cocycle_defect(const EvolutionModel& model, double s, double r, double t);

struct MonotonicityResult {
    double defect = 0.0;
    double lipschitz_ratio = 0.0;
    double lipschitz_bound = 0.0;
    double scale = 0.0;
};

/// Largest eigenvalue of Q(t, s2) - Q(t, s1) (clipped at 0) for s1 <= s2 < t.
MonotonicityResult cov_monotonicity_defect(const EvolutionModel& model, double t, double s1,
                                           double s2);

struct EquivalenceConstants {
    double c12 = 1.0;
    double c21 = 1.0;
};

/// Norm-equivalence constants of the Cameron-Martin spaces of Q(t, s1), Q(t, s2).
EquivalenceConstants cm_equivalence_constants(const EvolutionModel& model, double t, double s1,
                                              double s2);

struct EmbeddingConstant {
    double value = 0.0;
    /// value / sqrt(t - s), the quantity the bound M sqrt(t - s) controls.
    double scaled = 0.0;
};

/// Largest singular value of Q(t)^{-1/2} Q(t, s)^{1/2} with Q(t) = B(t) B(t)^T.
EmbeddingConstant ht_embedding_constant(const EvolutionModel& model, double s, double t);

}  // namespace nouk
