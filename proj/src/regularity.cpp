#include "nouk/regularity.hpp"

#include "nouk/error.hpp"
#include "nouk/numerics.hpp"
#include "nouk/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nouk {

ExponentFit fit_exponent(std::vector<double> log_x, std::vector<double> log_y)
{
    if (log_x.size() != log_y.size() || log_x.size() < 2) {
        fail(ErrorKind::Validation, "exponent fit needs at least two points");
    }
    std::vector<double> weights(log_x.size(), 1.0);
    if (log_x.size() > 2) {
        const auto [lo, hi] = std::minmax_element(log_x.begin(), log_x.end());
        weights[static_cast<std::size_t>(lo - log_x.begin())] = 0.5;
        weights[static_cast<std::size_t>(hi - log_x.begin())] = 0.5;
    }
    const LineFit line = fit_line(log_x, log_y, weights);
    ExponentFit fit;
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.r_squared = line.r_squared;
    for (std::size_t i = 0; i < log_x.size(); ++i) {
        fit.residuals.push_back(log_y[i] - (line.intercept + line.slope * log_x[i]));
    }
    fit.log_x = std::move(log_x);
    fit.log_y = std::move(log_y);
    return fit;
}

std::vector<double> geometric_grid(double lo, double hi, int n)
{
    if (!(lo > 0.0 && hi > lo) || n < 2) {
        fail(ErrorKind::Validation, "geometric grid needs 0 < lo < hi and n >= 2");
    }
    std::vector<double> grid(static_cast<std::size_t>(n));
    const double step = std::log(hi / lo) / (n - 1);
    for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    grid.back() = hi;
    return grid;
}

namespace {

constexpr int kHaltonDims = 512;
constexpr int kFirstBlock = 64;
constexpr int kEvalChunk = 16;

/// Quasi-random (x, direction, magnitude) triples for sample index i, with a
/// Cranley-Patterson shift drawn from the seed.
class SamplePlan {
public:
    SamplePlan(const DirectionSpace& space, const SamplingOptions& options)
        : space_(space), options_(options), dim_(space.dim()), rng_(options.seed)
    {
        if (options.budget < 1) fail(ErrorKind::Validation, "sampling budget must be >= 1");
        if (!(options.h_min > 0.0 && options.h_max >= options.h_min) || options.scales < 1) {
            fail(ErrorKind::Validation, "increment range needs 0 < h_min <= h_max, scales >= 1");
        }
        lower_ = options.lower.size() ? options.lower : Vector::Constant(dim_, -3.0);
        upper_ = options.upper.size() ? options.upper : Vector::Constant(dim_, 3.0);
        if (lower_.size() != dim_ || upper_.size() != dim_ || (upper_.array() < lower_.array()).any()) {
            fail(ErrorKind::Validation, "sampling box does not match N");
        }
        for (const auto& d : options.directions) {
            if (d.size() != dim_) fail(ErrorKind::Validation, "sampling direction does not match N");
            fixed_.push_back(space.normalize(d));
        }
        const std::uint64_t op = op_id("regularity.shift");
        shift_.resize(2 * dim_ + 1);
        for (int d = 0; d < 2 * dim_ + 1; ++d) shift_[d] = rng_.uniform(op, 0, d);
    }

    int dim() const { return dim_; }
    const Vector& lower() const { return lower_; }
    const Vector& upper() const { return upper_; }
    bool free_directions() const { return fixed_.empty(); }

    double coordinate(std::uint64_t i, int d) const
    {
        const double raw = d < kHaltonDims ? halton(i + 1, d)
                                           : rng_.uniform(op_id("regularity.coord"), i, d);
        const double u = raw + shift_[d];
        return u - std::floor(u);
    }

    Vector point(std::uint64_t i) const
    {
        Vector x(dim_);
        for (int d = 0; d < dim_; ++d) {
            x[d] = lower_[d] + (upper_[d] - lower_[d]) * coordinate(i, d);
        }
        return x;
    }

    Vector direction(std::uint64_t i) const
    {
        if (!fixed_.empty()) return fixed_[(i / options_.scales) % fixed_.size()];
        Vector g(dim_);
        for (int d = 0; d < dim_; ++d) {
            g[d] = normal_quantile(std::clamp(coordinate(i, dim_ + d), 1e-15, 1.0 - 1e-15));
        }
        if (g.norm() == 0.0) g[0] = 1.0;
        return space_.normalize(g);
    }

    double magnitude(std::uint64_t i) const
    {
        const double band = static_cast<double>(i % options_.scales) + coordinate(i, 2 * dim_);
        return options_.h_max * std::pow(options_.h_min / options_.h_max, band / options_.scales);
    }

    Vector clamp_point(Vector x) const
    {
        return x.cwiseMax(lower_).cwiseMin(upper_);
    }

    double clamp_magnitude(double r) const
    {
        return std::clamp(r, options_.h_min, options_.h_max);
    }

    const NormalSampler& rng() const { return rng_; }
    Vector normalize(const Vector& h) const { return space_.normalize(h); }

private:
    const DirectionSpace& space_;
    const SamplingOptions& options_;
    int dim_;
    NormalSampler rng_;
    Vector lower_;
    Vector upper_;
    Vector shift_;
    std::vector<Vector> fixed_;
};

using Ratio = std::function<double(const Vector&, const Vector&)>;

struct Incumbent {
    double value = -1.0;
    Vector x;
    Vector dir;
    double r = 0.0;
};

void refine(const SamplePlan& plan, const Ratio& ratio, const SamplingOptions& options,
            Incumbent& best, std::uint64_t block)
{
    const std::uint64_t op = op_id("regularity.refine");
    const Vector width = plan.upper() - plan.lower();
    const int n = plan.dim();
    double step = 0.25;
    for (int k = 0; k < options.refine_steps; ++k) {
        const std::uint64_t sample = block * static_cast<std::uint64_t>(options.refine_steps) + k;
        Vector x = best.x;
        for (int d = 0; d < n; ++d) x[d] += step * width[d] * plan.rng().normal(op, sample, d);
        x = plan.clamp_point(x);
        const double r = plan.clamp_magnitude(best.r * std::exp(step * plan.rng().normal(op, sample, n)));
        Vector dir = best.dir;
        if (plan.free_directions()) {
            Vector trial = dir;
            for (int d = 0; d < n; ++d) trial[d] += step * plan.rng().normal(op, sample, n + 1 + d);
            if (trial.norm() > 0.0) dir = plan.normalize(trial);
        }
        const double value = ratio(x, r * dir);
        if (std::isfinite(value) && value > best.value) {
            best = {value, x, dir, r};
        } else {
            step *= 0.8;
        }
    }
}

SeminormEstimate sup_estimate(const Ratio& ratio, const DirectionSpace& space,
                              const SamplingOptions& options)
{
    const SamplePlan plan(space, options);
    Incumbent best;
    std::uint64_t block = 0;
    int start = 0;
    int size = kFirstBlock;
    while (start < options.budget) {
        const int end = std::min(start + size, options.budget);
        const int count = end - start;
        std::vector<double> values(static_cast<std::size_t>(count));
        parallel_chunks(static_cast<std::size_t>((count + kEvalChunk - 1) / kEvalChunk),
                        [&](std::size_t chunk) {
                            const int lo = static_cast<int>(chunk) * kEvalChunk;
                            const int hi = std::min(count, lo + kEvalChunk);
                            for (int j = lo; j < hi; ++j) {
                                const auto i = static_cast<std::uint64_t>(start + j);
                                values[j] = ratio(plan.point(i), plan.magnitude(i) * plan.direction(i));
                            }
                        });
        for (int j = 0; j < count; ++j) {
            if (std::isfinite(values[j]) && values[j] > best.value) {
                const auto i = static_cast<std::uint64_t>(start + j);
                best = {values[j], plan.point(i), plan.direction(i), plan.magnitude(i)};
            }
        }
        if (count == size && options.refine_steps > 0 && best.value >= 0.0) {
            refine(plan, ratio, options, best, block);
        }
        ++block;
        start = end;
        size = start;
    }
    SeminormEstimate out;
    out.budget = options.budget;
    if (best.value < 0.0) {
        best = {0.0, plan.point(0), plan.direction(0), plan.magnitude(0)};
        best.value = ratio(best.x, best.r * best.dir);
        if (!std::isfinite(best.value)) best.value = 0.0;
    }
    out.value = best.value;
    out.x = best.x;
    out.h = best.r * best.dir;
    return out;
}

double max_abs_over(const std::function<double(const Vector&)>& g, const SamplePlan& plan,
                    int budget)
{
    std::vector<double> values(static_cast<std::size_t>(budget));
    parallel_chunks(static_cast<std::size_t>((budget + kEvalChunk - 1) / kEvalChunk),
                    [&](std::size_t chunk) {
                        const int lo = static_cast<int>(chunk) * kEvalChunk;
                        const int hi = std::min(budget, lo + kEvalChunk);
                        for (int i = lo; i < hi; ++i) values[i] = std::abs(g(plan.point(i)));
                    });
    double best = 0.0;
    for (double v : values) best = std::max(best, v);
    return best;
}

void require_geometric(const std::vector<double>& grid, int min_points, const char* what)
{
    if (static_cast<int>(grid.size()) < min_points) {
        fail(ErrorKind::Validation,
             std::string(what) + " needs at least " + std::to_string(min_points) + " points");
    }
    for (double r : grid) {
        if (!(r > 0.0)) fail(ErrorKind::Validation, std::string(what) + " must be positive");
    }
    const double ratio = grid[1] / grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (std::abs(grid[i] / grid[i - 1] / ratio - 1.0) > 1e-6 || ratio == 1.0) {
            fail(ErrorKind::Validation, std::string(what) + " must be geometric");
        }
    }
}

}  // namespace

double holder_ratio(const ScalarField& f, const DirectionSpace& space, double alpha,
                    const Vector& x, const Vector& h)
{
    return std::abs(f(x + h) - f(x)) / std::pow(space.norm(h), alpha);
}

double zygmund_ratio(const ScalarField& f, const DirectionSpace& space, const Vector& x,
                     const Vector& h)
{
    return std::abs(f(x + 2.0 * h) - 2.0 * f(x + h) + f(x)) / space.norm(h);
}

SeminormEstimate holder_seminorm(const ScalarField& f, const DirectionSpace& space, double alpha,
                                 const SamplingOptions& options)
{
    if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorKind::Validation, "require 0 < alpha <= 1");
    return sup_estimate(
        [&](const Vector& x, const Vector& h) { return holder_ratio(f, space, alpha, x, h); },
        space, options);
}

SeminormEstimate zygmund_seminorm(const ScalarField& f, const DirectionSpace& space,
                                  const SamplingOptions& options)
{
    return sup_estimate(
        [&](const Vector& x, const Vector& h) { return zygmund_ratio(f, space, x, h); }, space,
        options);
}

ExponentFit modulus_fit(const ScalarField& f, const DirectionSpace& space,
                        const std::vector<double>& r_grid, const SamplingOptions& options)
{
    require_geometric(r_grid, 6, "radius grid");
    const SamplePlan plan(space, options);
    std::vector<double> log_r;
    std::vector<double> log_omega;
    for (double r : r_grid) {
        std::vector<double> values(static_cast<std::size_t>(options.budget));
        parallel_chunks(static_cast<std::size_t>((options.budget + kEvalChunk - 1) / kEvalChunk),
                        [&](std::size_t chunk) {
                            const int lo = static_cast<int>(chunk) * kEvalChunk;
                            const int hi = std::min(options.budget, lo + kEvalChunk);
                            for (int i = lo; i < hi; ++i) {
                                const Vector x = plan.point(i);
                                values[i] = std::abs(f(x + r * plan.direction(i)) - f(x));
                            }
                        });
        const double best = *std::max_element(values.begin(), values.end());
        if (!(best > 0.0)) {
            fail(ErrorKind::DegenerateFit, "modulus of continuity vanishes at r = " + format_double(r));
        }
        log_r.push_back(std::log(r));
        log_omega.push_back(std::log(best));
    }
    return fit_exponent(std::move(log_r), std::move(log_omega));
}

ExponentFit theta_fit(const EvolutionModel& model, const DirectionSpace& space, double t,
                      const std::vector<double>& tau_grid)
{
    require_geometric(tau_grid, 2, "tau grid");
    std::vector<double> log_tau;
    std::vector<double> log_norm;
    for (double tau : tau_grid) {
        if (!(tau > 0.0 && tau <= t)) fail(ErrorKind::Validation, "tau grid must lie in (0, t]");
        const LambdaOperator lambda = lambda_operator(model, space, t - tau, t);
        log_tau.push_back(std::log(tau));
        log_norm.push_back(std::log(lambda.norm));
    }
    return fit_exponent(std::move(log_tau), std::move(log_norm));
}

ExponentFit blowup_check(const EvolutionModel& model, const DirectionSpace& space,
                         const TestFunction& phi, int n, double t,
                         const std::vector<double>& tau_grid, const SamplingOptions& options,
                         const EvalParams& params)
{
    if (n < 1 || n > 4) fail(ErrorKind::Validation, "blow-up check needs 1 <= n <= 4");
    require_geometric(tau_grid, 2, "tau grid");
    const SamplePlan plan(space, options);
    const int budget = options.budget;
    std::vector<Vector> points;
    std::vector<std::vector<Vector>> tuples;
    for (int i = 0; i < budget; ++i) {
        points.push_back(plan.point(i));
        std::vector<Vector> dirs;
        for (int j = 0; j < n; ++j) {
            dirs.push_back(plan.direction(static_cast<std::uint64_t>(i) * n + j));
        }
        tuples.push_back(std::move(dirs));
    }
    const int transported = std::min(n, phi.analytic_order());
    EvalParams inner = params;
    if (inner.op == 0) inner.op = op_id("regularity.blowup");
    std::vector<double> log_tau;
    std::vector<double> log_norm;
    for (double tau : tau_grid) {
        if (!(tau > 0.0 && tau <= t)) fail(ErrorKind::Validation, "tau grid must lie in (0, t]");
        const auto kernel = std::make_shared<const TransitionKernel>(model, t - tau, t);
        std::vector<double> values(static_cast<std::size_t>(budget));
        parallel_chunks(static_cast<std::size_t>(budget), [&](std::size_t i) {
            const SmoothingContext ctx(kernel, tuples[i], transported);
            values[i] = std::abs(ctx.expectation(phi, points[i], inner).value);
        });
        const double best = *std::max_element(values.begin(), values.end());
        if (!(best > 0.0)) {
            fail(ErrorKind::DegenerateFit, "derivative vanishes at tau = " + format_double(tau));
        }
        log_tau.push_back(std::log(tau));
        log_norm.push_back(std::log(best));
    }
    return fit_exponent(std::move(log_tau), std::move(log_norm));
}

RangeInclusion range_inclusion(const Matrix& l1, const Matrix& l2)
{
    if (l1.rows() != l2.rows()) {
        fail(ErrorKind::Validation, "range inclusion needs a common codomain");
    }
    RangeInclusion out;
    const Eigen::JacobiSVD<Matrix> svd(l2, Eigen::ComputeFullU);
    const Vector& sv = svd.singularValues();
    const double smax = sv.size() ? sv[0] : 0.0;
    const double tol = static_cast<double>(std::max(l2.rows(), l2.cols())) *
                       std::ldexp(1.0, -40) * smax;
    int rank = 0;
    while (rank < sv.size() && sv[rank] > tol && sv[rank] > 0.0) ++rank;
    const Matrix& u = svd.matrixU();
    const Matrix range = u.leftCols(rank);
    const Matrix kernel = u.rightCols(u.cols() - rank);
    const double l1_norm = l1.size() ? Eigen::JacobiSVD<Matrix>(l1).singularValues()[0] : 0.0;
    if (kernel.cols() > 0 && l1_norm > 0.0) {
        const Matrix leak = l1.transpose() * kernel;
        out.kernel_leak = Eigen::JacobiSVD<Matrix>(leak).singularValues()[0] / l1_norm;
    }
    out.holds = out.kernel_leak <= 1e-10;

    if (rank > 0) {
        const Matrix a = range.transpose() * l1 * l1.transpose() * range;
        const Matrix b = range.transpose() * l2 * l2.transpose() * range;
        const Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> gen(a, b, Eigen::EigenvaluesOnly);
        out.constant = std::sqrt(std::max(0.0, gen.eigenvalues().maxCoeff()));
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(l2);
        cod.setThreshold(tol > 0.0 ? tol / smax : 0.0);
        const Matrix product = cod.pseudoInverse() * l1;
        out.constant_pinv = product.size() ? Eigen::JacobiSVD<Matrix>(product).singularValues()[0] : 0.0;
    }
    if (!out.holds) out.constant = std::numeric_limits<double>::infinity();
    return out;
}

namespace {

/// sup_{u > 0} 2 sin(u / 2) / u^sigma; the maximizer v = u / 2 solves tan(v) / v = 1 / sigma.
double cosine_holder_factor(double sigma)
{
    double lo = 0.0;
    double hi = std::numbers::pi / 2;
    for (int i = 0; i < 200; ++i) {
        const double v = 0.5 * (lo + hi);
        if (std::tan(v) / v * sigma < 1.0) {
            lo = v;
        } else {
            hi = v;
        }
    }
    const double v = 0.5 * (lo + hi);
    return 2.0 * std::sin(v) / std::pow(2.0 * v, sigma);
}

}  // namespace

double closed_form_holder_norm(const TestFunction& phi, const DirectionSpace& space, double gamma)
{
    if (!(gamma >= 0.0)) fail(ErrorKind::Validation, "Hoelder order must be >= 0");
    switch (phi.kind()) {
    case TestFunction::Kind::Constant:
        return std::abs(phi.constant_value());
    case TestFunction::Kind::Cosine: {
        const double l = space.dual_norm(phi.direction());
        const int k = static_cast<int>(std::floor(gamma));
        const double frac = gamma - k;
        double norm = 0.0;
        for (int j = 0; j <= k; ++j) norm += std::pow(l, j);
        if (frac > 0.0) norm += std::pow(l, gamma) * cosine_holder_factor(frac);
        return norm;
    }
    default:
        fail(ErrorKind::UnsupportedFunction,
             "no closed-form Hoelder norms for " + phi.describe());
    }
}

InterpolationCheck interp_check(const TestFunction& phi, const DirectionSpace& space,
                                double alpha1, double sigma, int n)
{
    if (!(sigma > 0.0 && sigma < 1.0) || !(alpha1 >= 0.0) || n < 0) {
        fail(ErrorKind::Validation, "interpolation needs alpha1 >= 0, n >= 0, 0 < sigma < 1");
    }
    const double base = alpha1 + n;
    InterpolationCheck out;
    out.lhs = closed_form_holder_norm(phi, space, base + sigma);
    out.rhs = std::pow(closed_form_holder_norm(phi, space, base), 1.0 - sigma) *
              std::pow(closed_form_holder_norm(phi, space, base + 1.0), sigma);
    out.constant = 1.0 + std::pow(2.0, 1.0 - sigma);
    out.slack = out.constant * out.rhs - out.lhs;
    out.holds = out.slack >= -1e-12 * out.lhs;
    return out;
}

std::string zygmund_verdict(double growth, double bounded_factor, double unbounded_factor)
{
    if (growth <= bounded_factor) return "bounded";
    if (growth > unbounded_factor) return "unbounded";
    return "inconclusive";
}

double zygmund_growth(const std::vector<double>& radii, const std::vector<double>& quotients)
{
    if (radii.size() != quotients.size() || radii.empty()) {
        fail(ErrorKind::Validation, "Zygmund growth needs one quotient per radius");
    }
    const auto top = std::max_element(radii.begin(), radii.end()) - radii.begin();
    const double reference = quotients[static_cast<std::size_t>(top)];
    const double peak = *std::max_element(quotients.begin(), quotients.end());
    if (reference > 0.0) return peak / reference;
    return peak > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

SchauderReport schauder_report(const EvolutionModel& model, const DirectionSpace& space,
                               double theta, const TestFunction& phi, const SourceTerm& psi,
                               double t, double alpha, const std::vector<double>& s_grid,
                               const SchauderOptions& options)
{
    if (!(alpha >= 0.0 && alpha < 1.0)) fail(ErrorKind::Validation, "require 0 <= alpha < 1");
    if (!(theta > 0.0)) fail(ErrorKind::Validation, "theta must be positive");
    SchauderReport report;
    report.theta = theta;
    report.alpha = alpha;
    const double gain = alpha + 1.0 / theta;
    const double nearest = std::round(gain);
    report.zygmund_case = std::abs(gain - nearest) <= 1e-9;
    int top = report.zygmund_case ? static_cast<int>(nearest) - 1 : static_cast<int>(std::floor(gain));
    if (options.n_max >= 0) top = std::min(top, options.n_max);
    report.top_order = top;

    const SamplePlan plan(space, options.sampling);
    const Vector dir = options.sampling.directions.empty()
                           ? space.normalize(Vector::Unit(space.dim(), 0))
                           : space.normalize(options.sampling.directions.front());
    const std::vector<double> radii =
        geometric_grid(options.r_min, options.r_max, std::max(2, options.r_points));
    const int budget = options.sampling.budget;

    for (double s : s_grid) {
        const MildSolver solver(model, space, phi, psi, s, t, options.quad, options.params);
        auto field = [&](int order) -> ScalarField {
            const std::vector<Vector> dirs(static_cast<std::size_t>(order), dir);
            return [&solver, dirs, order, theta](const Vector& x) {
                return order == 0 ? solver.value(x).value : solver.derivative(x, dirs, theta).value;
            };
        };
        for (int order = 0; order <= top; ++order) {
            SchauderRow row;
            row.s = s;
            row.order = order;
            row.quantity = "sup_norm";
            row.value = max_abs_over(field(order), plan, budget);
            row.expected = std::numeric_limits<double>::quiet_NaN();
            row.verdict = std::isfinite(row.value) ? "finite" : "infinite";
            report.rows.push_back(row);
        }
        const ScalarField g = field(top);
        if (report.zygmund_case) {
            std::vector<double> quotients;
            for (double r : radii) {
                const Vector h = r * dir;
                const double q = max_abs_over(
                    [&](const Vector& x) { return zygmund_ratio(g, space, x, h); }, plan, budget);
                quotients.push_back(q);
                SchauderRow row{s, top, "zygmund_quotient", r, q,
                                std::numeric_limits<double>::quiet_NaN(), ""};
                report.rows.push_back(row);
            }
            const double growth = zygmund_growth(radii, quotients);
            report.rows.push_back({s, top, "zygmund_growth", 0.0, growth, options.bounded_factor,
                                   zygmund_verdict(growth, options.bounded_factor,
                                                   options.unbounded_factor)});
        } else {
            SchauderRow row{s, top, "modulus_exponent", 0.0, 0.0, std::min(1.0, gain - top), ""};
            try {
                std::vector<double> log_r;
                std::vector<double> log_omega;
                for (double r : radii) {
                    const Vector h = r * dir;
                    const double omega = max_abs_over(
                        [&](const Vector& x) { return g(x + h) - g(x); }, plan, budget);
                    if (!(omega > 0.0)) fail(ErrorKind::DegenerateFit, "modulus vanishes");
                    log_r.push_back(std::log(r));
                    log_omega.push_back(std::log(omega));
                }
                const ExponentFit fit = fit_exponent(std::move(log_r), std::move(log_omega));
                row.value = fit.slope;
                row.verdict = std::abs(fit.slope - row.expected) <= 0.1 ? "consistent" : "deviates";
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DegenerateFit) throw;
                row.value = std::numeric_limits<double>::quiet_NaN();
                row.verdict = "degenerate";
            }
            report.rows.push_back(row);
        }
    }
    return report;
}

}  // namespace nouk
