#include "nouk/semigroup.hpp"

#include "nouk/error.hpp"
#include "nouk/parallel.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace nouk {

const char* to_string(Method method)
{
    switch (method) {
    case Method::Auto: return "auto";
    case Method::MonteCarlo: return "mc";
    case Method::GaussHermite: return "gauss_hermite";
    case Method::ClosedForm: return "closed_form";
    case Method::Ridge: return "ridge";
    case Method::FiniteDifference: return "fd";
    case Method::Sde: return "sde";
    }
    return "?";
}

Method parse_method(const std::string& text)
{
    for (Method m : {Method::Auto, Method::MonteCarlo, Method::GaussHermite, Method::ClosedForm,
                     Method::Ridge, Method::FiniteDifference, Method::Sde}) {
        if (text == to_string(m)) return m;
    }
    fail(ErrorKind::Validation, "unknown method '" + text + "'");
}

// ---------------------------------------------------------------------------
// Kernel and context

TransitionKernel::TransitionKernel(const EvolutionModel& model, double s, double t)
    : s_(s),
      t_(t),
      propagator_(transition(model, s, t)),
      shift_(affine_shift(model, s, t)),
      cov_(covariance(model, s, t))
{
}

Vector TransitionKernel::mean(const Vector& x) const
{
    if (x.size() != dim()) fail(ErrorKind::Validation, "x must have N entries");
    return propagator_.apply(x) + shift_;
}

void require_smoothing(const Propagator& u, const Covariance& cov)
{
    if (u.is_diagonal() && cov.is_diagonal()) {
        for (int k = 0; k < cov.dim(); ++k) {
            if (cov.is_null(k) && u.multipliers()(k) != 0.0) {
                fail(ErrorKind::NotSmoothing,
                     "U(t,s) transports directions onto the kernel of Q(t,s) (mode " +
                         std::to_string(k + 1) + ")",
                     k + 1);
            }
        }
        return;
    }
    const Matrix um = u.matrix();
    const Matrix projected = cov.eigenvectors().transpose() * um;
    const double scale = um.norm();
    for (int k = 0; k < cov.dim(); ++k) {
        if (cov.is_null(k) && projected.row(k).norm() > 1e-10 * scale) {
            fail(ErrorKind::NotSmoothing,
                 "U(t,s) transports directions onto the kernel of Q(t,s) (eigen index " +
                     std::to_string(k + 1) + ")",
                 k + 1);
        }
    }
}

SmoothingContext::SmoothingContext(std::shared_ptr<const TransitionKernel> kernel,
                                   std::span<const Vector> directions, int transported)
    : kernel_(std::move(kernel))
{
    const int total = static_cast<int>(directions.size());
    if (transported < 0 || transported > total) {
        fail(ErrorKind::Validation, "transported order outside [0, number of directions]");
    }
    if (total - transported > kMaxSmoothingOrder) {
        fail(ErrorKind::UnsupportedOrder, "smoothing order is capped at 6");
    }
    for (const auto& h : directions) {
        if (h.size() != kernel_->dim()) fail(ErrorKind::Validation, "direction must have N entries");
    }
    const Propagator& u = kernel_->propagator();
    for (int i = 0; i < transported; ++i) transported_.push_back(u.apply(directions[i]));
    if (total > transported) {
        if (!(kernel_->s() < kernel_->t())) {
            fail(ErrorKind::Validation, "smoothing derivatives require s < t");
        }
        require_smoothing(u, kernel_->cov());
        for (int i = transported; i < total; ++i) {
            smoothing_transported_.push_back(u.apply(directions[i]));
            hhat_.push_back(h_hat(kernel_->cov(), smoothing_transported_.back()));
        }
    }
    const int n = smoothing_order();
    pairing_ = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            pairing_(i, j) = hhat_[i].state_coefficients.dot(smoothing_transported_[j]);
        }
    }
    pairing_ = 0.5 * (pairing_ + pairing_.transpose()).eval();
}

double in_recursion(std::span<const double> values, const Matrix& pairing, unsigned mask)
{
    if (mask == 0) return 1.0;
    const unsigned limit = std::bit_width(mask);
    std::vector<double> memo(std::size_t{1} << limit, 0.0);
    memo[0] = 1.0;
    for (unsigned sub = 1; sub < memo.size(); ++sub) {
        if ((sub & mask) != sub) continue;
        const int top = static_cast<int>(std::bit_width(sub)) - 1;
        const unsigned rest = sub & ~(1u << top);
        double value = values[static_cast<std::size_t>(top)] * memo[rest];
        for (int j = 0; j < top; ++j) {
            if (rest & (1u << j)) value -= pairing(j, top) * memo[rest & ~(1u << j)];
        }
        memo[sub] = value;
    }
    return memo[mask];
}

double SmoothingContext::in_eval(const Vector& y, unsigned mask) const
{
    std::vector<double> values(hhat_.size());
    for (std::size_t i = 0; i < hhat_.size(); ++i) values[i] = hhat_[i](y);
    return in_recursion(values, pairing_, mask);
}

double SmoothingContext::in_eval(const Vector& y) const
{
    return in_eval(y, (1u << smoothing_order()) - 1u);
}

std::vector<double> SmoothingContext::in_polynomial() const
{
    const int n = smoothing_order();
    const std::size_t size = std::size_t{1} << n;
    // poly[sub] holds I(sub) as coefficients over subsets of the functionals.
    std::vector<std::vector<double>> poly(size, std::vector<double>(size, 0.0));
    poly[0][0] = 1.0;
    for (unsigned sub = 1; sub < size; ++sub) {
        const int top = static_cast<int>(std::bit_width(sub)) - 1;
        const unsigned rest = sub & ~(1u << top);
        auto& out = poly[sub];
        for (std::size_t b = 0; b < size; ++b) {
            if (poly[rest][b] != 0.0) out[b | (1u << top)] += poly[rest][b];
        }
        for (int j = 0; j < top; ++j) {
            if (!(rest & (1u << j))) continue;
            const auto& lower = poly[rest & ~(1u << j)];
            for (std::size_t b = 0; b < size; ++b) out[b] -= pairing_(j, top) * lower[b];
        }
    }
    return poly[size - 1];
}

// ---------------------------------------------------------------------------
// Expectation engine

namespace {

double elapsed(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Method resolve(Method requested, const TestFunction& phi, const Covariance& cov, int transported)
{
    if (requested != Method::Auto) return requested;
    if (phi.kind() == TestFunction::Kind::Cosine || phi.kind() == TestFunction::Kind::Constant) {
        return Method::ClosedForm;
    }
    if (phi.is_separable() && cov.is_diagonal()) return Method::GaussHermite;
    if (phi.is_ridge() && transported <= phi.analytic_order()) return Method::Ridge;
    return Method::MonteCarlo;
}

// D^k phi(z)(u_1..u_k)
double transported_value(const TestFunction& phi, const Vector& z, std::span<const Vector> dirs)
{
    return dirs.empty() ? phi(z) : phi.derivative(z, dirs);
}

constexpr std::size_t kPairsPerChunk = 512;

}  // namespace

EvalReport SmoothingContext::expectation(const TestFunction& phi, const Vector& x,
                                         const EvalParams& params) const
{
    const auto start = std::chrono::steady_clock::now();
    const TransitionKernel& kernel = *kernel_;
    const Covariance& cov = kernel.cov();
    if (phi.kind() != TestFunction::Kind::Constant && phi.dim() != kernel.dim()) {
        fail(ErrorKind::Validation, "test function dimension differs from N");
    }
    const int k = transported_order();
    const int n = smoothing_order();
    if (k > phi.analytic_order()) {
        fail(ErrorKind::UnsupportedOrder, phi.describe() + " has no analytic derivative of order " +
                                              std::to_string(k));
    }
    const Vector m = kernel.mean(x);

    EvalReport report;
    report.method = resolve(params.method, phi, cov, k);
    report.seed = params.seed;

    switch (report.method) {
    case Method::ClosedForm: {
        if (phi.kind() == TestFunction::Kind::Constant) {
            report.value = (k + n == 0) ? phi.constant_value() : 0.0;
            break;
        }
        if (phi.kind() != TestFunction::Kind::Cosine) {
            fail(ErrorKind::MethodUnavailable, "closed form needs a cosine or constant function");
        }
        const Vector& l = phi.direction();
        const Vector ql = cov.matrix() * l;
        double factor = std::exp(-0.5 * l.dot(ql));
        for (const auto& u : transported_) factor *= l.dot(u);
        for (const auto& c : hhat_) factor *= c.state_coefficients.dot(ql);
        report.value = phi.ridge_profile_derivative(l.dot(m) + phi.phase(), k + n) * factor;
        break;
    }
    case Method::GaussHermite: {
        std::vector<Vector> weights;
        for (const auto& c : hhat_) weights.push_back(c.state_coefficients);
        const auto poly = in_polynomial();
        auto combine = [&](int nodes) {
            const auto moments = gh_weighted_moments(cov, m, phi, transported_, weights, nodes);
            double value = 0.0;
            for (std::size_t b = 0; b < poly.size(); ++b) value += poly[b] * moments[b];
            return value;
        };
        report.value = combine(params.nodes);
        report.uncertainty = std::abs(report.value - combine(std::max(1, params.nodes / 2)));
        report.n_samples = params.nodes;
        break;
    }
    case Method::Ridge: {
        if (!phi.is_ridge()) fail(ErrorKind::MethodUnavailable, "ridge path needs a ridge function");
        const Vector& l = phi.direction();
        const Vector ql = cov.matrix() * l;
        const double sigma = std::sqrt(std::max(0.0, l.dot(ql)));
        double factor = 1.0;
        for (const auto& u : transported_) factor *= l.dot(u);
        for (const auto& c : hhat_) factor *= c.state_coefficients.dot(ql);
        if (n > 0) {
            if (sigma == 0.0) {
                factor = 0.0;
            } else {
                factor /= std::pow(sigma, n);
            }
        }
        double err = 0.0;
        const double moment =
            factor == 0.0 ? 0.0
                          : ridge_hermite_moment(phi, l.dot(m) + phi.phase(), sigma, n, k, &err);
        report.value = factor * moment;
        report.uncertainty = std::abs(factor) * err;
        break;
    }
    case Method::MonteCarlo: {
        const std::uint64_t op = params.op ? params.op : op_id("expectation");
        const NormalSampler sampler(params.seed);
        const std::size_t pairs = static_cast<std::size_t>(std::max(1, params.samples / 2));
        const std::size_t chunks = (pairs + kPairsPerChunk - 1) / kPairsPerChunk;
        const double centre = n > 0 ? transported_value(phi, m, transported_) : 0.0;
        std::vector<double> sums(chunks, 0.0), squares(chunks, 0.0);
        const int dim = kernel.dim();
        parallel_chunks(chunks, [&](std::size_t chunk) {
            Vector z(dim);
            std::vector<double> values(hhat_.size());
            const std::size_t begin = chunk * kPairsPerChunk;
            const std::size_t end = std::min(pairs, begin + kPairsPerChunk);
            double sum = 0.0, square = 0.0;
            for (std::size_t p = begin; p < end; ++p) {
                sampler.fill(op, p, z);
                const Vector y = cov.sqrt_apply(z);
                for (std::size_t i = 0; i < hhat_.size(); ++i) values[i] = hhat_[i](y);
                const double weight = in_recursion(values, pairing_, (1u << n) - 1u);
                // Antithetic pair; I_n(-y) = (-1)^n I_n(y) and E[I_n] = 0 for n >= 1.
                const double sign = (n % 2 == 0) ? 1.0 : -1.0;
                const double plus = transported_value(phi, m + y, transported_) - centre;
                const double minus = transported_value(phi, m - y, transported_) - centre;
                const double v = 0.5 * (plus + sign * minus) * weight + (n == 0 ? centre : 0.0);
                sum += v;
                square += v * v;
            }
            sums[chunk] = sum;
            squares[chunk] = square;
        });
        double sum = 0.0, square = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            sum += sums[c];
            square += squares[c];
        }
        const double count = static_cast<double>(pairs);
        report.value = sum / count;
        const double variance =
            pairs > 1 ? std::max(0.0, (square - count * report.value * report.value) / (count - 1.0))
                      : 0.0;
        report.uncertainty = std::sqrt(variance / count);
        report.n_samples = static_cast<long long>(2 * pairs);
        break;
    }
    default:
        fail(ErrorKind::MethodUnavailable,
             std::string("method ") + to_string(report.method) + " is not an expectation method");
    }
    report.seconds = elapsed(start);
    return report;
}

// ---------------------------------------------------------------------------
// Public operations

namespace {

EvalReport exact_report(double value, const EvalParams& params)
{
    EvalReport report;
    report.value = value;
    report.method = params.method == Method::Auto ? Method::ClosedForm : params.method;
    report.seed = params.seed;
    return report;
}

EvalParams with_op(const EvalParams& params, std::string_view name)
{
    EvalParams out = params;
    if (out.op == 0) out.op = op_id(name);
    return out;
}

void require_point(const EvolutionModel& model, const Vector& x)
{
    if (x.size() != model.dim()) fail(ErrorKind::Validation, "x must have N entries");
}

}  // namespace

EvalReport apply(const EvolutionModel& model, const TestFunction& phi, double s, double t,
                 const Vector& x, const EvalParams& params)
{
    require_point(model, x);
    if (s == t) return exact_report(phi(x), params);
    const auto kernel = std::make_shared<const TransitionKernel>(model, s, t);
    const SmoothingContext ctx(kernel, {}, 0);
    return ctx.expectation(phi, x, with_op(params, "apply"));
}

EvalReport mixed_derivative(const EvolutionModel& model, const DirectionSpace& space,
                            const TestFunction& phi, double s, double t, const Vector& x,
                            std::span<const Vector> dirs, int transported,
                            const EvalParams& params)
{
    require_point(model, x);
    if (space.dim() != model.dim()) {
        fail(ErrorKind::Validation, "direction space dimension differs from N");
    }
    if (transported > phi.analytic_order()) {
        fail(ErrorKind::UnsupportedOrder, phi.describe() + " has no analytic derivative of order " +
                                              std::to_string(transported));
    }
    const int total = static_cast<int>(dirs.size());
    if (s == t && transported == total) return exact_report(phi.derivative(x, dirs), params);
    const auto kernel = std::make_shared<const TransitionKernel>(model, s, t);
    const SmoothingContext ctx(kernel, dirs, transported);
    return ctx.expectation(phi, x, with_op(params, "derivative"));
}

EvalReport smoothing_derivative(const EvolutionModel& model, const DirectionSpace& space,
                                const TestFunction& phi, double s, double t, const Vector& x,
                                std::span<const Vector> dirs, const EvalParams& params)
{
    if (!(s < t)) fail(ErrorKind::Validation, "smoothing derivatives require s < t");
    return mixed_derivative(model, space, phi, s, t, x, dirs, 0, params);
}

EvalReport transported_derivative(const EvolutionModel& model, const TestFunction& phi, double s,
                                  double t, const Vector& x, std::span<const Vector> dirs,
                                  const EvalParams& params)
{
    return mixed_derivative(model, DirectionSpace::ambient(model.dim()), phi, s, t, x, dirs,
                            static_cast<int>(dirs.size()), params);
}

EvalReport derivative(const EvolutionModel& model, const DirectionSpace& space,
                      const TestFunction& phi, double s, double t, const Vector& x,
                      std::span<const Vector> dirs, const EvalParams& params)
{
    const int n = static_cast<int>(dirs.size());
    const int k = std::min(n, phi.analytic_order());
    return mixed_derivative(model, space, phi, s, t, x, dirs, k, params);
}

FdResult fd_derivative(const std::function<double(const Vector&)>& f, const Vector& x,
                       std::span<const Vector> dirs, double base_step)
{
    const int order = static_cast<int>(dirs.size());
    if (order > 4) fail(ErrorKind::UnsupportedOrder, "finite differences support order <= 4");
    FdResult out;
    if (order == 0) {
        out.value = out.coarse = out.fine = f(x);
        return out;
    }
    const double scale = std::max(1.0, x.size() ? x.cwiseAbs().maxCoeff() : 0.0);
    const double step = base_step > 0.0
                            ? base_step
                            : std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (order + 4)) *
                                  scale;
    auto central = [&](double h) {
        double total = 0.0;
        const unsigned corners = 1u << order;
        for (unsigned c = 0; c < corners; ++c) {
            Vector point = x;
            double sign = 1.0;
            for (int i = 0; i < order; ++i) {
                const double e = (c & (1u << i)) ? 1.0 : -1.0;
                sign *= e;
                point += e * h * dirs[static_cast<std::size_t>(i)];
            }
            total += sign * f(point);
        }
        return total / std::pow(2.0 * h, order);
    };
    out.step = step;
    out.coarse = central(step);
    out.fine = central(0.5 * step);
    out.value = out.fine + (out.fine - out.coarse) / 3.0;
    return out;
}

EvalReport sde_expectation(const EvolutionModel& model, const TestFunction& phi, double s,
                           double t, const Vector& x, int n_paths, int n_steps,
                           std::uint64_t seed)
{
    require_point(model, x);
    if (n_steps < 1 || n_paths < 1) fail(ErrorKind::Validation, "n_paths, n_steps must be >= 1");
    if (!(s <= t)) fail(ErrorKind::Validation, "require s <= t");
    const auto start = std::chrono::steady_clock::now();
    const int dim = model.dim();
    const double dt = (t - s) / n_steps;
    const double root = std::sqrt(dt);
    std::vector<Matrix> drift(static_cast<std::size_t>(n_steps));
    std::vector<Matrix> diffusion(static_cast<std::size_t>(n_steps));
    std::vector<Vector> affine(static_cast<std::size_t>(n_steps));
    for (int j = 0; j < n_steps; ++j) {
        const double tau = s + j * dt;
        drift[j] = model.drift(tau);
        diffusion[j] = model.diffusion(tau);
        affine[j] = model.affine(tau);
    }
    const bool diagonal = model.is_diagonal();
    const std::uint64_t op = op_id("sde");
    const NormalSampler sampler(seed);
    constexpr std::size_t per_chunk = 256;
    const std::size_t paths = static_cast<std::size_t>(n_paths);
    const std::size_t chunks = (paths + per_chunk - 1) / per_chunk;
    std::vector<double> sums(chunks, 0.0), squares(chunks, 0.0);
    parallel_chunks(chunks, [&](std::size_t chunk) {
        Vector state(dim), noise(dim);
        double sum = 0.0, square = 0.0;
        for (std::size_t p = chunk * per_chunk; p < std::min(paths, (chunk + 1) * per_chunk); ++p) {
            state = x;
            for (int j = 0; j < n_steps; ++j) {
                for (int k = 0; k < dim; ++k) {
                    noise(k) = sampler.normal(op, p, static_cast<std::uint64_t>(j) * dim + k);
                }
                if (diagonal) {
                    state += dt * (drift[j].diagonal().cwiseProduct(state) + affine[j]) +
                             root * diffusion[j].diagonal().cwiseProduct(noise);
                } else {
                    state += dt * (drift[j] * state + affine[j]) + root * diffusion[j] * noise;
                }
            }
            const double v = phi(state);
            sum += v;
            square += v * v;
        }
        sums[chunk] = sum;
        squares[chunk] = square;
    });
    double sum = 0.0, square = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        sum += sums[c];
        square += squares[c];
    }
    EvalReport report;
    const double count = static_cast<double>(paths);
    report.value = sum / count;
    const double variance =
        paths > 1 ? std::max(0.0, (square - count * report.value * report.value) / (count - 1.0))
                  : 0.0;
    report.uncertainty = std::sqrt(variance / count);
    report.method = Method::Sde;
    report.n_samples = n_paths;
    report.seed = seed;
    report.seconds = elapsed(start);
    return report;
}

double chapman_defect(const EvolutionModel& model, const TestFunction& phi, double s, double r,
                      double t, const Vector& x)
{
    require_point(model, x);
    if (!(s <= r && r <= t)) fail(ErrorKind::Validation, "require s <= r <= t");
    if (phi.kind() == TestFunction::Kind::Constant) return 0.0;
    if (phi.kind() != TestFunction::Kind::Cosine) {
        fail(ErrorKind::MethodUnavailable, "Chapman-Kolmogorov check needs a cosine function");
    }
    const Vector& l = phi.direction();
    const TransitionKernel whole(model, s, t);
    const double direct = std::cos(l.dot(whole.mean(x)) + phi.phase()) *
                          std::exp(-0.5 * whole.cov().quadratic(l));
    // P_{r,t} phi is again a damped cosine in z with direction U(t, r)^T l.
    const TransitionKernel outer(model, r, t);
    const Vector l_inner = outer.propagator().apply_transpose(l);
    const double phase_inner = l.dot(outer.shift()) + phi.phase();
    const double amplitude = std::exp(-0.5 * outer.cov().quadratic(l));
    const TransitionKernel inner(model, s, r);
    const double composed = amplitude * std::cos(l_inner.dot(inner.mean(x)) + phase_inner) *
                            std::exp(-0.5 * inner.cov().quadratic(l_inner));
    return std::abs(direct - composed);
}

}  // namespace nouk
