#pragma once

#include "nouk/gaussian.hpp"
#include "nouk/model.hpp"
#include "nouk/propagator.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nouk {

enum class Method { Auto, MonteCarlo, GaussHermite, ClosedForm, Ridge, FiniteDifference, Sde };

const char* to_string(Method method);
Method parse_method(const std::string& text);

struct EvalParams {
    Method method = Method::Auto;
    int samples = 1 << 16;
    std::uint64_t seed = 0;
    /// Stream identifier; 0 lets each operation pick its own name-derived id.
    std::uint64_t op = 0;
    int nodes = kDefaultHermiteNodes;
};

struct EvalReport {
    double value = 0.0;
    /// MC standard error or quadrature error estimate; 0 for closed forms.
    double uncertainty = 0.0;
    Method method = Method::ClosedForm;
    long long n_samples = 0;
    std::uint64_t seed = 0;
    double seconds = 0.0;
};

/// U(t, s), g(t, s) and Q(t, s) for one pair (s, t).
class TransitionKernel {
public:
    TransitionKernel(const EvolutionModel& model, double s, double t);

    double s() const noexcept { return s_; }
    double t() const noexcept { return t_; }
    int dim() const noexcept { return propagator_.dim(); }
    const Propagator& propagator() const noexcept { return propagator_; }
    const Vector& shift() const noexcept { return shift_; }
    const Covariance& cov() const noexcept { return cov_; }

    /// m^x(t, s)
    Vector mean(const Vector& x) const;

private:
    double s_;
    double t_;
    Propagator propagator_;
    Vector shift_;
    Covariance cov_;
};

/// Smoothing data for fixed (s, t) and directions: the first `transported`
/// directions are pushed forward by U(t, s); the remaining ones enter through
/// the weight I_n with functionals h_hat_{U h_i} and pairings
/// G_ij = <Lambda h_i, Lambda h_j> = (U h_i)^T Q^+ (U h_j).
class SmoothingContext {
public:
    static constexpr int kMaxSmoothingOrder = 6;

    SmoothingContext(std::shared_ptr<const TransitionKernel> kernel,
                     std::span<const Vector> directions, int transported);

    const TransitionKernel& kernel() const noexcept { return *kernel_; }
    int transported_order() const noexcept { return static_cast<int>(transported_.size()); }
    int smoothing_order() const noexcept { return static_cast<int>(hhat_.size()); }
    const std::vector<Vector>& transported() const noexcept { return transported_; }
    const std::vector<HHatFunctional>& functionals() const noexcept { return hhat_; }
    const Matrix& pairing() const noexcept { return pairing_; }

    /// I_n(y) over the smoothing directions selected by `mask` (bit i is the
    /// i-th smoothing direction), with y in state coordinates.
    double in_eval(const Vector& y, unsigned mask) const;
    double in_eval(const Vector& y) const;

    /// Coefficients of I_n over the full smoothing set as a multilinear
    /// polynomial in the functionals, indexed by subset bitmask.
    std::vector<double> in_polynomial() const;

    /// E[D^k phi(m^x + Y)(U h_1..U h_k) I_n(Y)(h_{k+1}..h_{k+n})].
    EvalReport expectation(const TestFunction& phi, const Vector& x,
                           const EvalParams& params) const;

private:
    std::shared_ptr<const TransitionKernel> kernel_;
    std::vector<Vector> transported_;
    std::vector<Vector> smoothing_transported_;
    std::vector<HHatFunctional> hhat_;
    Matrix pairing_;
};

/// I_n from functional values v_i and pairings G by the recursion
/// I(S) = v_n I(S - n) - sum_{j in S, j < n} G_jn I(S - {j, n}), n = max S.
double in_recursion(std::span<const double> values, const Matrix& pairing, unsigned mask);

/// Throws NotSmoothing (1-based mode or eigen index) when U(t, s) transports a
/// direction onto the kernel of Q(t, s).
void require_smoothing(const Propagator& u, const Covariance& cov);

/// P_{s,t} phi (x).
EvalReport apply(const EvolutionModel& model, const TestFunction& phi, double s, double t,
                 const Vector& x, const EvalParams& params = {});

EvalReport smoothing_derivative(const EvolutionModel& model, const DirectionSpace& space,
                                const TestFunction& phi, double s, double t, const Vector& x,
                                std::span<const Vector> dirs, const EvalParams& params = {});

EvalReport transported_derivative(const EvolutionModel& model, const TestFunction& phi, double s,
                                  double t, const Vector& x, std::span<const Vector> dirs,
                                  const EvalParams& params = {});

/// First `transported` directions through D^k phi, the rest through I_n.
EvalReport mixed_derivative(const EvolutionModel& model, const DirectionSpace& space,
                            const TestFunction& phi, double s, double t, const Vector& x,
                            std::span<const Vector> dirs, int transported,
                            const EvalParams& params = {});

/// Mixed derivative with transported order min(n, analytic order of phi).
EvalReport derivative(const EvolutionModel& model, const DirectionSpace& space,
                      const TestFunction& phi, double s, double t, const Vector& x,
                      std::span<const Vector> dirs, const EvalParams& params = {});

struct FdResult {
    double value = 0.0;   // Richardson-extrapolated
    double coarse = 0.0;  // step h
    double fine = 0.0;    // step h / 2
    double step = 0.0;
};

/// Iterated central differences of order <= 4 with one Richardson level. A
/// non-positive base_step selects eps^{1/(n+4)} * max(1, |x|_inf).
FdResult fd_derivative(const std::function<double(const Vector&)>& f, const Vector& x,
                       std::span<const Vector> dirs, double base_step = 0.0);

/// Euler-Maruyama estimate of E phi(X_t) for dX = (A X + f) dt + B dW, X_s = x.
EvalReport sde_expectation(const EvolutionModel& model, const TestFunction& phi, double s,
                           double t, const Vector& x, int n_paths, int n_steps,
                           std::uint64_t seed);

/// |P_{s,t} phi(x) - P_{s,r}(P_{r,t} phi)(x)| from closed forms (cosine phi).
double chapman_defect(const EvolutionModel& model, const TestFunction& phi, double s, double r,
                      double t, const Vector& x);

}  // namespace nouk
