#include "nouk/mild.hpp"

#include "nouk/error.hpp"
#include "nouk/numerics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace nouk {

void QuadSpec::validate() const
{
    if (panels < 1) fail(ErrorKind::Validation, "quadrature needs panels >= 1");
    if (!(ratio > 1.0)) fail(ErrorKind::Validation, "quadrature grading ratio must be > 1");
    if (nodes < 1) fail(ErrorKind::Validation, "quadrature needs nodes >= 1");
    if (!(theta_hint >= 0.0 && theta_hint < 1.0)) {
        fail(ErrorKind::Validation, "theta_hint must lie in [0, 1)");
    }
}

std::vector<QuadNode> time_nodes(double s, double t, const QuadSpec& quad, int nodes_per_panel,
                                 double singularity)
{
    std::vector<QuadNode> out;
    if (!(t > s)) return out;
    if (!(singularity >= 0.0 && singularity < 1.0)) {
        fail(ErrorKind::Validation, "time singularity exponent must lie in [0, 1)");
    }
    const double length = t - s;
    std::vector<double> breaks{s};
    if (quad.uniform) {
        for (int j = 1; j <= quad.panels + 1; ++j) breaks.push_back(s + length * j / (quad.panels + 1));
    } else {
        const double floor_width =
            1e4 * std::numeric_limits<double>::epsilon() * std::max({std::abs(s), std::abs(t), 1.0});
        int panels = quad.panels;
        while (panels > 1 && length * std::pow(quad.ratio, -panels) < floor_width) --panels;
        for (int j = panels; j >= 0; --j) breaks.push_back(s + length * std::pow(quad.ratio, -j));
    }
    breaks.back() = t;
    const auto& rule = gauss_legendre(nodes_per_panel);
    const bool mapped = !quad.uniform && singularity > 0.0;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double half = 0.5 * (breaks[p + 1] - breaks[p]);
        const double mid = 0.5 * (breaks[p + 1] + breaks[p]);
        if (p == 0 && mapped) {
            const double power = 1.0 / (1.0 - singularity);
            const double width = breaks[1] - breaks[0];
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double u = 0.5 * (1.0 + rule.nodes[i]);
                out.push_back({s + width * std::pow(u, power),
                               0.5 * rule.weights[i] * width * power * std::pow(u, power - 1.0)});
            }
            continue;
        }
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            out.push_back({mid + half * rule.nodes[i], half * rule.weights[i]});
        }
    }
    return out;
}

MildSolver::MildSolver(const EvolutionModel& model, const DirectionSpace& space, TestFunction phi,
                       SourceTerm psi, double s, double t, QuadSpec quad, EvalParams params)
    : model_(model),
      space_(space),
      phi_(std::move(phi)),
      psi_(std::move(psi)),
      s_(s),
      t_(t),
      quad_(quad),
      params_(params)
{
    quad_.validate();
    if (!(s >= 0.0 && s <= t)) fail(ErrorKind::Validation, "require s <= t");
    if (space_.dim() != model_.dim()) {
        fail(ErrorKind::Validation, "direction space dimension differs from N");
    }
    whole_ = std::make_shared<const TransitionKernel>(model_, s_, t_);
}

int MildSolver::panels_for(double beta) const
{
    const double exponent = std::max(beta, quad_.theta_hint);
    if (quad_.uniform || exponent <= 0.0) return quad_.panels;
    const double needed = 12.0 * std::log(10.0) / ((1.0 - exponent) * std::log(quad_.ratio));
    return std::max(quad_.panels, static_cast<int>(std::ceil(needed)));
}

const MildSolver::NodeSet& MildSolver::node_set(int panels, bool coarse, double singularity) const
{
    std::lock_guard lock(cache_mutex_);
    for (const auto& [key, set] : cache_) {
        if (key == CacheKey{panels, coarse, singularity}) return *set;
    }
    QuadSpec spec = quad_;
    spec.panels = panels;
    auto set = std::make_unique<NodeSet>();
    set->nodes = time_nodes(s_, t_, spec, coarse ? std::max(1, quad_.nodes / 2) : quad_.nodes,
                            singularity);
    for (const auto& node : set->nodes) {
        set->kernels.push_back(std::make_shared<const TransitionKernel>(model_, s_, node.sigma));
    }
    cache_.emplace_back(CacheKey{panels, coarse, singularity}, std::move(set));
    return *cache_.back().second;
}

EvalReport MildSolver::integrate(const NodeSet& fine, const NodeSet& coarse,
                                 std::span<const Vector> dirs, int transported,
                                 const Vector& x) const
{
    const auto start = std::chrono::steady_clock::now();
    EvalParams inner = params_;
    if (inner.op == 0) inner.op = op_id("mild.u1");
    EvalReport report;
    report.seed = params_.seed;
    auto sum = [&](const NodeSet& set, double* spread) {
        double total = 0.0;
        for (std::size_t j = 0; j < set.nodes.size(); ++j) {
            const double weight = set.nodes[j].weight * psi_.rho(set.nodes[j].sigma);
            if (weight == 0.0) continue;
            const SmoothingContext ctx(set.kernels[j], dirs, transported);
            const EvalReport r = ctx.expectation(psi_.phi, x, inner);
            total += weight * r.value;
            if (spread) {
                *spread += std::abs(weight) * r.uncertainty;
                report.method = r.method;
                report.n_samples += r.n_samples;
            }
        }
        return total;
    };
    double spread = 0.0;
    const double value = sum(fine, &spread);
    const double check = sum(coarse, nullptr);
    report.value = -value;
    report.uncertainty = spread + std::abs(value - check);
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

EvalReport MildSolver::u0(const Vector& x) const
{
    if (s_ == t_ || phi_.kind() == TestFunction::Kind::Constant) {
        EvalReport r;
        r.value = phi_(x);
        r.seed = params_.seed;
        return r;
    }
    const SmoothingContext ctx(whole_, {}, 0);
    EvalParams p = params_;
    if (p.op == 0) p.op = op_id("mild.u0");
    return ctx.expectation(phi_, x, p);
}

EvalReport MildSolver::u1(const Vector& x) const
{
    if (s_ == t_ || psi_.is_zero()) {
        EvalReport r;
        r.seed = params_.seed;
        return r;
    }
    const int panels = panels_for(0.0);
    return integrate(node_set(panels, false, 0.0), node_set(panels, true, 0.0), {}, 0, x);
}

namespace {

EvalReport combine(const EvalReport& a, const EvalReport& b)
{
    EvalReport out = a;
    out.value = a.value + b.value;
    out.uncertainty = a.uncertainty + b.uncertainty;
    out.n_samples = a.n_samples + b.n_samples;
    out.seconds = a.seconds + b.seconds;
    if (a.method == Method::ClosedForm) out.method = b.method;
    return out;
}

}  // namespace

EvalReport MildSolver::value(const Vector& x) const
{
    return combine(u0(x), u1(x));
}

EvalReport MildSolver::u0_derivative(const Vector& x, std::span<const Vector> dirs) const
{
    const int n = static_cast<int>(dirs.size());
    const int k = std::min(n, phi_.analytic_order());
    if (s_ == t_ && k < n) fail(ErrorKind::Validation, "smoothing derivatives require s < t");
    if (s_ == t_ || phi_.kind() == TestFunction::Kind::Constant) {
        EvalReport r;
        r.value = phi_.derivative(x, dirs);
        r.seed = params_.seed;
        return r;
    }
    const SmoothingContext ctx(whole_, dirs, k);
    EvalParams p = params_;
    if (p.op == 0) p.op = op_id("mild.u0");
    return ctx.expectation(phi_, x, p);
}

EvalReport MildSolver::u1_derivative(const Vector& x, std::span<const Vector> dirs,
                                     double theta) const
{
    const int n = static_cast<int>(dirs.size());
    const int k = std::min(n, psi_.phi.analytic_order());
    const double beta = (n - k) * theta;
    if (beta >= 1.0) {
        fail(ErrorKind::DivergentSingularity,
             "time integral diverges: (n - k) theta = " + format_double(beta) + " >= 1");
    }
    const bool spatially_constant = psi_.phi.kind() == TestFunction::Kind::Constant;
    if (s_ == t_ || psi_.is_zero() || (spatially_constant && n > 0)) {
        EvalReport r;
        r.seed = params_.seed;
        return r;
    }
    const int panels = panels_for(beta);
    return integrate(node_set(panels, false, beta), node_set(panels, true, beta), dirs, k, x);
}

EvalReport MildSolver::derivative(const Vector& x, std::span<const Vector> dirs,
                                  double theta) const
{
    EvalReport tail = u1_derivative(x, dirs, theta);
    return combine(u0_derivative(x, dirs), tail);
}

EvalReport u0(const EvolutionModel& model, const TestFunction& phi, double s, double t,
              const Vector& x, const EvalParams& params)
{
    const SourceTerm none{TimeFn::constant(0.0), TestFunction::constant(0.0)};
    return MildSolver(model, DirectionSpace::ambient(model.dim()), phi, none, s, t, {}, params)
        .u0(x);
}

EvalReport u1(const EvolutionModel& model, const SourceTerm& psi, double s, double t,
              const Vector& x, const QuadSpec& quad, const EvalParams& params)
{
    return MildSolver(model, DirectionSpace::ambient(model.dim()), TestFunction::constant(0.0),
                      psi, s, t, quad, params)
        .u1(x);
}

EvalReport mild_solution(const EvolutionModel& model, const TestFunction& phi,
                         const SourceTerm& psi, double s, double t, const Vector& x,
                         const QuadSpec& quad, const EvalParams& params)
{
    return MildSolver(model, DirectionSpace::ambient(model.dim()), phi, psi, s, t, quad, params)
        .value(x);
}

EvalReport mild_derivative(const EvolutionModel& model, const DirectionSpace& space,
                           const TestFunction& phi, const SourceTerm& psi, double s, double t,
                           const Vector& x, std::span<const Vector> dirs, double theta,
                           const QuadSpec& quad, const EvalParams& params)
{
    if (!(theta > 0.0)) fail(ErrorKind::Validation, "theta must be positive");
    return MildSolver(model, space, phi, psi, s, t, quad, params).derivative(x, dirs, theta);
}

}  // namespace nouk
