#pragma once

#include "nouk/config.hpp"
#include "nouk/timefn.hpp"

#include <Eigen/Dense>

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace nouk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ModelKind { Diagonal, ScalarIdentity, Dense };

const char* to_string(ModelKind kind);

/// g(t) * M, one term of a dense coefficient family.
struct DenseTerm {
    TimeFn fn;
    Matrix matrix;

    bool operator==(const DenseTerm& other) const
    {
        return fn == other.fn && matrix.rows() == other.matrix.rows() &&
               matrix.cols() == other.matrix.cols() && matrix == other.matrix;
    }
};

/// Drift A(t), diffusion B(t) and affine term f(t) on the N-mode truncation of
/// the state space, over the horizon [0, T].
class EvolutionModel {
public:
    /// A(t) = diag(a_k(t)), B(t) = diag(b_k(t)).
    static EvolutionModel diagonal(double horizon, std::vector<TimeFn> a, std::vector<TimeFn> b,
                                   std::vector<TimeFn> f = {});
    /// A(t) = a(t) I, B(t) = diag(b_k(t)).
    static EvolutionModel scalar_identity(double horizon, TimeFn a, std::vector<TimeFn> b,
                                          std::vector<TimeFn> f = {});
    /// A(t) = sum_i g_i(t) A_i, B(t) = sum_j h_j(t) B_j.
    static EvolutionModel dense(double horizon, int dim, std::vector<DenseTerm> drift,
                                std::vector<DenseTerm> diffusion, std::vector<TimeFn> f = {});

    double horizon() const noexcept { return horizon_; }
    int dim() const noexcept { return dim_; }
    ModelKind kind() const noexcept { return kind_; }
    /// Diagonal and scalar-identity models propagate mode by mode.
    bool is_diagonal() const noexcept { return kind_ != ModelKind::Dense; }
    bool has_affine_term() const noexcept { return !f_.empty(); }

    /// Drift coefficient of mode k (0-based) for diagonal kinds.
    const TimeFn& drift_coefficient(int k) const;
    /// Diffusion coefficient of mode k (0-based) for diagonal kinds.
    const TimeFn& diffusion_coefficient(int k) const;
    /// Affine coefficient of mode k; zero when f is absent.
    double affine(int k, double t) const;

    Matrix drift(double t) const;
    Matrix diffusion(double t) const;
    Vector affine(double t) const;

    const std::vector<TimeFn>& drift_coefficients() const noexcept { return a_; }
    const std::vector<TimeFn>& diffusion_coefficients() const noexcept { return b_; }
    const std::vector<TimeFn>& affine_coefficients() const noexcept { return f_; }
    const std::vector<DenseTerm>& drift_terms() const noexcept { return drift_terms_; }
    const std::vector<DenseTerm>& diffusion_terms() const noexcept { return diffusion_terms_; }

    /// sup_t |b_k(t)| sampled on a 1025-point grid (diagonal kinds) or sup_t ||B(t)||.
    double diffusion_bound() const;

    /// sum_k ||b_k||_inf^2 / |lambda_k| with lambda_k = max_t a_k(t), over modes with
    /// lambda_k != 0. Diagonal kinds only; NaN otherwise.
    double summability_diagnostic() const;

    /// Serialized `[model]` (plus `[drift]`/`[diffusion]`) sections.
    std::string to_config() const;

    bool operator==(const EvolutionModel& other) const = default;

private:
    EvolutionModel() = default;
    void validate() const;

    double horizon_ = 1.0;
    int dim_ = 1;
    ModelKind kind_ = ModelKind::Diagonal;
    std::vector<TimeFn> a_;
    std::vector<TimeFn> b_;
    std::vector<TimeFn> f_;
    std::vector<DenseTerm> drift_terms_;
    std::vector<DenseTerm> diffusion_terms_;
};

/// Parses the `[model]` section (and any `[drift]`/`[diffusion]` sections) of a
/// config document.
EvolutionModel load_model(const ConfigDocument& doc);
EvolutionModel load_model(const std::string& config_text);

/// Weighted-l2 direction space: ||h||_E = sqrt(sum (w_k h_k)^2).
class DirectionSpace {
public:
    static DirectionSpace ambient(int dim);
    /// w_k = 1 / |b_k(t0)|, the space H_{t0}.
    static DirectionSpace cm_at(const class EvolutionModel& model, double t0);
    /// w_k = (k pi)^gamma.
    static DirectionSpace sobolev(int dim, double gamma);
    static DirectionSpace weighted(Vector weights, std::string label);

    const Vector& weights() const noexcept { return weights_; }
    const std::string& label() const noexcept { return label_; }
    int dim() const noexcept { return static_cast<int>(weights_.size()); }

    double norm(const Vector& h) const;
    /// Dual norm of the functional h -> <l, h>.
    double dual_norm(const Vector& l) const;
    /// ||h||_X <= embedding_constant() * ||h||_E.
    double embedding_constant() const;
    /// Rescales h so that ||h||_E = 1 (h must be nonzero).
    Vector normalize(const Vector& h) const;

private:
    DirectionSpace(Vector weights, std::string label);

    Vector weights_;
    std::string label_;
};

DirectionSpace direction_space(const std::string& preset, const EvolutionModel& model,
                               double param = 0.0);

/// One-dimensional factor of a separable test function: profile(freq * x + phase).
struct Factor1d {
    enum class Kind { One, Cos, Tanh, AbsSin };
    Kind kind = Kind::One;
    double freq = 0.0;
    double phase = 0.0;

    double eval(double x) const;
    /// d^j/dx^j at x; UnsupportedOrder for AbsSin with j >= 1.
    double derivative(double x, int order) const;
    double bound() const;
    bool operator==(const Factor1d&) const = default;
};

/// Bounded test functions phi on the truncated state space.
class TestFunction {
public:
    enum class Kind { Constant, Cosine, TanhLinear, AbsSin, Separable };
    static constexpr int kInfiniteOrder = std::numeric_limits<int>::max();

    static TestFunction constant(double c);
    /// cos(<l, x> + phase)
    static TestFunction cosine(Vector l, double phase = 0.0);
    /// tanh(<l, x>)
    static TestFunction tanh_linear(Vector l);
    /// |sin(<l, x>)|, Lipschitz but not C^1.
    static TestFunction abs_sin(Vector l);
    /// prod_k factor_k(x_k)
    static TestFunction separable(std::vector<Factor1d> factors);

    Kind kind() const noexcept { return kind_; }
    const Vector& direction() const noexcept { return ell_; }
    double phase() const noexcept { return phase_; }
    double constant_value() const noexcept { return phase_; }
    const std::vector<Factor1d>& factors() const noexcept { return factors_; }

    /// Dimension the function is defined on; 0 for constants (any dimension).
    int dim() const;

    double operator()(const Vector& x) const;
    double bound() const;
    int analytic_order() const;
    bool has_closed_form_expectation() const;
    bool is_separable() const { return kind_ == Kind::Separable; }
    /// Functions of <l, x> (cosine, tanh_linear, abs_sin).
    bool is_ridge() const;

    /// Exact mixed directional derivative D^n phi(x)(dirs...).
    double derivative(const Vector& x, std::span<const Vector> dirs) const;

    /// n-th derivative of the ridge profile u -> f(u) at u = <l, x> + phase.
    double ridge_profile_derivative(double u, int order) const;

    /// Lipschitz constant along direction l for ridge functions (|l| times
    /// max |f'|); NaN when unknown.
    double lipschitz_along(const Vector& h) const;

    std::string describe() const;

    bool operator==(const TestFunction& other) const;

private:
    TestFunction() = default;

    Kind kind_ = Kind::Constant;
    Vector ell_;
    double phase_ = 0.0;
    std::vector<Factor1d> factors_;
};

/// Parses a `[phi]`-style section: kind = constant|cosine|tanh_linear|abs_sin|separable.
/// Direction vectors shorter than `dim` are zero-padded.
TestFunction parse_test_function(const ConfigSection& section, int dim);

/// psi(sigma, x) = rho(sigma) * phi(x).
struct SourceTerm {
    TimeFn rho;
    TestFunction phi;

    double operator()(double sigma, const Vector& x) const { return rho(sigma) * phi(x); }
    bool is_zero() const { return rho.is_zero(); }
};

SourceTerm parse_source_term(const ConfigSection& section, int dim);

}  // namespace nouk
