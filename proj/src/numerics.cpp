#include "nouk/numerics.hpp"

#include "nouk/error.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace nouk {

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double* error_estimate)
{
    if (a == b) {
        if (error_estimate) *error_estimate = 0.0;
        return 0.0;
    }
    // Boost's error floor is not scaled by the interval width, so short
    // intervals never meet a relative tolerance. Integrate over [0, 1] instead.
    const double width = b - a;
    double err = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double u) { return f(a + width * u); }, 0.0, 1.0, 20, rel_tol, &err, &l1);
    if (error_estimate) *error_estimate = err * std::abs(width);
    return value * width;
}

namespace {

// Golub-Welsch: nodes are eigenvalues of the symmetric Jacobi matrix, weights
// are mu0 times the squared first eigenvector components.
QuadratureRule golub_welsch(const Eigen::VectorXd& off_diagonal, int n, double mu0)
{
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, off_diagonal, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        fail(ErrorKind::Internal, "Golub-Welsch eigensolve failed");
    }
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v0 = solver.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    // Symmetrize: both families are symmetric about 0.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

template <class Build>
const QuadratureRule& cached_rule(std::map<int, std::unique_ptr<QuadratureRule>>& cache,
                                  std::mutex& mutex, int n, Build build)
{
    if (n < 1) fail(ErrorKind::Validation, "quadrature rule needs at least one node");
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<QuadratureRule>(build(n));
    return *slot;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n)
{
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    static std::mutex mutex;
    return cached_rule(cache, mutex, n, [](int m) {
        Eigen::VectorXd off(std::max(m - 1, 0));
        for (int k = 1; k < m; ++k) {
            off(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
        }
        return golub_welsch(off, m, 2.0);
    });
}

const QuadratureRule& gauss_hermite(int n)
{
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    static std::mutex mutex;
    return cached_rule(cache, mutex, n, [](int m) {
        Eigen::VectorXd off(std::max(m - 1, 0));
        for (int k = 1; k < m; ++k) {
            off(k - 1) = std::sqrt(static_cast<double>(k));
        }
        return golub_welsch(off, m, 1.0);
    });
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels,
                    int nodes)
{
    const auto& rule = gauss_legendre(nodes);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double mid = lo + 0.5 * width;
        double sum = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            sum += rule.weights[i] * f(mid + 0.5 * width * rule.nodes[i]);
        }
        total += 0.5 * width * sum;
    }
    return total;
}

namespace {

int nth_prime(int dim)
{
    static const std::vector<int> primes = [] {
        std::vector<int> out;
        for (int candidate = 2; out.size() < 512; ++candidate) {
            bool prime = true;
            for (int p : out) {
                if (p * p > candidate) break;
                if (candidate % p == 0) {
                    prime = false;
                    break;
                }
            }
            if (prime) out.push_back(candidate);
        }
        return out;
    }();
    if (dim < 0 || dim >= static_cast<int>(primes.size())) {
        fail(ErrorKind::Validation, "Halton dimension out of range");
    }
    return primes[dim];
}

}  // namespace

double halton(std::uint64_t index, int dim)
{
    const auto base = static_cast<std::uint64_t>(nth_prime(dim));
    const double inv_base = 1.0 / static_cast<double>(base);
    double factor = inv_base;
    double value = 0.0;
    while (index > 0) {
        value += static_cast<double>(index % base) * factor;
        index /= base;
        factor *= inv_base;
    }
    return value;
}

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        fail(ErrorKind::Validation, "normal_quantile requires p in (0, 1)");
    }
    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley step; the upper tail is refined through the complementary cdf.
    const double e = (x > 0.0) ? (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2)
                               : normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& weights)
{
    if (x.size() != y.size() || x.size() != weights.size() || x.size() < 2) {
        fail(ErrorKind::Validation, "fit_line needs matching arrays of length >= 2");
    }
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sw += weights[i];
        sx += weights[i] * x[i];
        sy += weights[i] * y[i];
    }
    const double mx = sx / sw;
    const double my = sy / sw;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += weights[i] * dx * dx;
        sxy += weights[i] * dx * dy;
        syy += weights[i] * dy * dy;
    }
    if (sxx <= 0.0) fail(ErrorKind::DegenerateFit, "fit_line: abscissae are all equal");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy <= 0.0) {
        fit.r_squared = 1.0;
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (fit.intercept + fit.slope * x[i]);
            ss_res += weights[i] * r * r;
        }
        fit.r_squared = 1.0 - ss_res / syy;
    }
    return fit;
}

}  // namespace nouk
