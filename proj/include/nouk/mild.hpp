#pragma once

#include "nouk/semigroup.hpp"

#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace nouk {

/// Time quadrature for int_s^t ... d sigma. The graded mesh has breakpoints
/// s + (t - s) ratio^{-j}, j = panels..0, plus s itself, so the first panel has
/// width (t - s) ratio^{-panels}; each panel carries a Gauss-Legendre rule.
struct QuadSpec {
    int panels = 20;
    double ratio = 2.0;
    int nodes = 8;
    /// Blow-up exponent of the integrand near sigma = s. When positive, the
    /// panel count grows until the first panel's share r^{-panels (1 - beta)}
    /// is below 1e-12, up to the cap applied by time_nodes.
    double theta_hint = 0.0;
    /// Equal panels with the same node budget (panels + 1 panels).
    bool uniform = false;

    void validate() const;
};

struct QuadNode {
    double sigma;
    double weight;
};

/// On a graded mesh the first panel [s, s + w] is mapped by sigma = s + w u^p,
/// p = 1 / (1 - singularity), which removes a (sigma - s)^{-singularity} factor.
/// The panel count is capped so that w stays resolvable next to s.
std::vector<QuadNode> time_nodes(double s, double t, const QuadSpec& quad, int nodes_per_panel,
                                 double singularity = 0.0);

/// u(s, .) = P_{s,t} phi - int_s^t P_{s,sigma} psi(sigma, .) d sigma for fixed
/// (s, t). Transition kernels at the quadrature nodes are computed once and
/// shared by every evaluation point.
class MildSolver {
public:
    MildSolver(const EvolutionModel& model, const DirectionSpace& space, TestFunction phi,
               SourceTerm psi, double s, double t, QuadSpec quad = {}, EvalParams params = {});

    EvalReport u0(const Vector& x) const;
    EvalReport u1(const Vector& x) const;
    EvalReport value(const Vector& x) const;

    EvalReport u0_derivative(const Vector& x, std::span<const Vector> dirs) const;
    /// Throws DivergentSingularity when (n - k) theta >= 1 with k the
    /// transported order min(n, analytic order of psi).
    EvalReport u1_derivative(const Vector& x, std::span<const Vector> dirs, double theta) const;
    EvalReport derivative(const Vector& x, std::span<const Vector> dirs, double theta) const;

    const QuadSpec& quad() const noexcept { return quad_; }

private:
    struct NodeSet {
        std::vector<QuadNode> nodes;
        std::vector<std::shared_ptr<const TransitionKernel>> kernels;
    };
    const NodeSet& node_set(int panels, bool coarse, double singularity) const;
    int panels_for(double beta) const;
    EvalReport integrate(const NodeSet& fine, const NodeSet& coarse, std::span<const Vector> dirs,
                         int transported, const Vector& x) const;

    EvolutionModel model_;
    DirectionSpace space_;
    TestFunction phi_;
    SourceTerm psi_;
    double s_;
    double t_;
    QuadSpec quad_;
    EvalParams params_;
    std::shared_ptr<const TransitionKernel> whole_;
    mutable std::mutex cache_mutex_;
    struct CacheKey {
        int panels;
        bool coarse;
        double singularity;
        bool operator==(const CacheKey&) const = default;
    };
    mutable std::vector<std::pair<CacheKey, std::unique_ptr<NodeSet>>> cache_;
};

EvalReport u0(const EvolutionModel& model, const TestFunction& phi, double s, double t,
              const Vector& x, const EvalParams& params = {});

EvalReport u1(const EvolutionModel& model, const SourceTerm& psi, double s, double t,
              const Vector& x, const QuadSpec& quad = {}, const EvalParams& params = {});

EvalReport mild_solution(const EvolutionModel& model, const TestFunction& phi,
                         const SourceTerm& psi, double s, double t, const Vector& x,
                         const QuadSpec& quad = {}, const EvalParams& params = {});

EvalReport mild_derivative(const EvolutionModel& model, const DirectionSpace& space,
                           const TestFunction& phi, const SourceTerm& psi, double s, double t,
                           const Vector& x, std::span<const Vector> dirs, double theta,
                           const QuadSpec& quad = {}, const EvalParams& params = {});

}  // namespace nouk
