#include "nouk/gaussian.hpp"

#include "nouk/error.hpp"
#include "nouk/numerics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

namespace nouk {

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t op_id(std::string_view name)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t op_id(std::uint64_t parent, std::uint64_t child)
{
    return splitmix(parent ^ splitmix(child + 0x632be59bd9b4e019ULL));
}

double NormalSampler::uniform(std::uint64_t op, std::uint64_t sample, std::uint64_t coord) const
{
    std::uint64_t x = splitmix(seed_ ^ 0x243f6a8885a308d3ULL);
    x = splitmix(x ^ op);
    x = splitmix(x ^ sample);
    x = splitmix(x ^ (coord * 0xd1b54a32d192ed03ULL));
    return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
}

double NormalSampler::normal(std::uint64_t op, std::uint64_t sample, std::uint64_t coord) const
{
    return normal_quantile(uniform(op, sample, coord));
}

void NormalSampler::fill(std::uint64_t op, std::uint64_t sample, Eigen::Ref<Vector> z) const
{
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        z(k) = normal(op, sample, static_cast<std::uint64_t>(k));
    }
}

Matrix sample(const Covariance& cov, const Vector& mean, int n, std::uint64_t seed,
              std::uint64_t op)
{
    if (n < 1) fail(ErrorKind::Validation, "sample count must be >= 1");
    const NormalSampler sampler(seed);
    Matrix out(cov.dim(), n);
    Vector z(cov.dim());
    for (int i = 0; i < n; ++i) {
        sampler.fill(op, static_cast<std::uint64_t>(i), z);
        out.col(i) = mean + cov.sqrt_apply(z);
    }
    return out;
}

HHatFunctional h_hat(const Covariance& cov, const Vector& g)
{
    if (g.size() != cov.dim()) fail(ErrorKind::Validation, "h_hat: dimension mismatch");
    cov.require_in_range(g);
    HHatFunctional out;
    const Vector ge = cov.to_eigen(g);
    out.eigen_coefficients = Vector::Zero(cov.dim());
    for (int k = 0; k < cov.dim(); ++k) {
        if (cov.is_null(k)) continue;
        const double lambda = cov.eigenvalues()(k);
        out.eigen_coefficients(k) = ge(k) / lambda;
        out.norm_sq += ge(k) * ge(k) / lambda;
    }
    out.state_coefficients = cov.from_eigen(out.eigen_coefficients);
    return out;
}

double cm_density(const Covariance& cov, const Vector& h, const Vector& y)
{
    if (h.isZero(0.0)) return 1.0;
    const HHatFunctional functional = h_hat(cov, h);
    return std::exp(-0.5 * functional.norm_sq + functional(y));
}

// ---------------------------------------------------------------------------
// Gauss-Hermite

namespace {

using Complex = std::complex<double>;

// j-th derivative of the complex factor of mode k: the cosine is handled as
// Re(e^{i c} prod_k e^{i l_k x_k}).
Complex factor_derivative(const TestFunction& phi, int k, double x, int j)
{
    if (phi.kind() == TestFunction::Kind::Cosine) {
        const double l = phi.direction()(k);
        if (l == 0.0) return j == 0 ? Complex(1.0) : Complex(0.0);
        return std::pow(Complex(0.0, l), j) * std::exp(Complex(0.0, l * x));
    }
    const Factor1d& f = phi.factors()[static_cast<std::size_t>(k)];
    if (j > 0 && f.kind == Factor1d::Kind::One) return 0.0;
    return f.derivative(x, j);
}

bool factor_is_one(const TestFunction& phi, int k)
{
    if (phi.kind() == TestFunction::Kind::Cosine) return phi.direction()(k) == 0.0;
    return phi.factors()[static_cast<std::size_t>(k)].kind == Factor1d::Kind::One;
}

void require_gh_capable(const TestFunction& phi, const Covariance& cov)
{
    if (phi.kind() != TestFunction::Kind::Cosine && phi.kind() != TestFunction::Kind::Separable &&
        phi.kind() != TestFunction::Kind::Constant) {
        fail(ErrorKind::NotSeparable, phi.describe() + " is not separable");
    }
    if (!cov.is_diagonal() && phi.kind() == TestFunction::Kind::Separable) {
        fail(ErrorKind::MethodUnavailable,
             "Gauss-Hermite for separable functions needs a diagonal covariance");
    }
    if (phi.kind() != TestFunction::Kind::Constant && phi.dim() != cov.dim()) {
        fail(ErrorKind::Validation, "test function dimension differs from N");
    }
}

}  // namespace

double gh_expectation(const Covariance& cov, const Vector& mean, const TestFunction& phi,
                      int nodes)
{
    require_gh_capable(phi, cov);
    const auto& rule = gauss_hermite(nodes);
    if (phi.kind() == TestFunction::Kind::Constant) return phi.constant_value();
    if (phi.kind() == TestFunction::Kind::Cosine) {
        // <l, Y> is N(0, l^T Q l).
        const double sigma = std::sqrt(cov.quadratic(phi.direction()));
        const double a = phi.direction().dot(mean) + phi.phase();
        double total = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            total += rule.weights[i] * std::cos(a + sigma * rule.nodes[i]);
        }
        return total;
    }
    double product = 1.0;
    for (int k = 0; k < cov.dim(); ++k) {
        if (factor_is_one(phi, k)) continue;
        const double root = std::sqrt(cov.eigenvalues()(k));
        const Factor1d& f = phi.factors()[static_cast<std::size_t>(k)];
        double total = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            total += rule.weights[i] * f.eval(mean(k) + root * rule.nodes[i]);
        }
        product *= total;
    }
    return product;
}

std::vector<double> gh_weighted_moments(const Covariance& cov, const Vector& mean,
                                        const TestFunction& phi, std::span<const Vector> transported,
                                        std::span<const Vector> weights, int nodes)
{
    require_gh_capable(phi, cov);
    if (!cov.is_diagonal()) {
        fail(ErrorKind::MethodUnavailable, "weighted Gauss-Hermite needs a diagonal covariance");
    }
    const int k_count = static_cast<int>(transported.size());
    const int n_count = static_cast<int>(weights.size());
    const int vars = k_count + n_count;
    if (vars > 12) fail(ErrorKind::UnsupportedOrder, "too many directions for Gauss-Hermite");
    const std::size_t subsets = std::size_t{1} << vars;
    const std::size_t full_a = (std::size_t{1} << k_count) - 1;
    std::vector<double> out(std::size_t{1} << n_count, 0.0);

    if (phi.kind() == TestFunction::Kind::Constant && k_count > 0) return out;

    const auto& rule = gauss_hermite(nodes);
    std::vector<Complex> acc(subsets, Complex(0.0));
    acc[0] = phi.kind() == TestFunction::Kind::Cosine ? std::exp(Complex(0.0, phi.phase()))
             : phi.kind() == TestFunction::Kind::Constant ? Complex(phi.constant_value())
                                                         : Complex(1.0);
    std::vector<Complex> factor(subsets), next(subsets);
    // moments[j][p] = E[g^{(j)}(m + Y) Y^p]
    std::vector<std::vector<Complex>> moments(static_cast<std::size_t>(k_count) + 1,
                                              std::vector<Complex>(n_count + 1));
    const bool constant = phi.kind() == TestFunction::Kind::Constant;
    for (int k = 0; k < cov.dim(); ++k) {
        bool active = !constant && !factor_is_one(phi, k);
        for (const auto& c : weights) active = active || c(k) != 0.0;
        if (!active) continue;
        const double root = std::sqrt(cov.eigenvalues()(k));
        for (int j = 0; j <= k_count; ++j) {
            for (int p = 0; p <= n_count; ++p) {
                Complex total = 0.0;
                if (constant || factor_is_one(phi, k)) {
                    if (j == 0) {
                        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                            total += rule.weights[i] * std::pow(root * rule.nodes[i], p);
                        }
                    }
                } else {
                    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                        const double y = root * rule.nodes[i];
                        total += rule.weights[i] * factor_derivative(phi, k, mean(k) + y, j) *
                                 std::pow(y, p);
                    }
                }
                moments[static_cast<std::size_t>(j)][static_cast<std::size_t>(p)] = total;
            }
        }
        for (std::size_t s = 0; s < subsets; ++s) {
            const std::size_t a_part = s & full_a;
            const std::size_t b_part = s >> k_count;
            Complex coeff = moments[static_cast<std::size_t>(std::popcount(a_part))]
                                   [static_cast<std::size_t>(std::popcount(b_part))];
            for (int j = 0; j < k_count && coeff != 0.0; ++j) {
                if (a_part & (std::size_t{1} << j)) coeff *= transported[static_cast<std::size_t>(j)](k);
            }
            for (int i = 0; i < n_count && coeff != 0.0; ++i) {
                if (b_part & (std::size_t{1} << i)) coeff *= weights[static_cast<std::size_t>(i)](k);
            }
            factor[s] = coeff;
        }
        std::fill(next.begin(), next.end(), Complex(0.0));
        for (std::size_t s = 0; s < subsets; ++s) {
            for (std::size_t a = s;; a = (a - 1) & s) {
                if (factor[a] != 0.0) next[s] += acc[s ^ a] * factor[a];
                if (a == 0) break;
            }
        }
        acc.swap(next);
    }
    for (std::size_t b = 0; b < out.size(); ++b) {
        out[b] = acc[(b << k_count) | full_a].real();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ridge reduction

double hermite_he(int n, double z)
{
    double prev = 1.0;
    if (n == 0) return prev;
    double cur = z;
    for (int m = 1; m < n; ++m) {
        const double next = z * cur - m * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double ridge_hermite_moment(const TestFunction& phi, double a, double sigma, int n, int k,
                            double* error)
{
    if (!phi.is_ridge()) fail(ErrorKind::MethodUnavailable, "not a ridge function");
    if (error) *error = 0.0;
    if (sigma == 0.0) return n == 0 ? phi.ridge_profile_derivative(a, k) : 0.0;
    sigma = std::abs(sigma);
    constexpr double span = 12.0;
    std::vector<double> breaks{-span, span};
    if (phi.kind() == TestFunction::Kind::AbsSin) {
        // kinks at a + sigma z = j pi
        const double lo = (a - sigma * span) / std::numbers::pi;
        const double hi = (a + sigma * span) / std::numbers::pi;
        if (hi - lo > 1e5) fail(ErrorKind::MethodUnavailable, "ridge quadrature: too many kinks");
        for (double j = std::ceil(std::min(lo, hi)); j <= std::max(lo, hi); j += 1.0) {
            breaks.push_back((j * std::numbers::pi - a) / sigma);
        }
    }
    std::sort(breaks.begin(), breaks.end());
    const double max_width = std::min(0.5, 1.0 / sigma);
    const auto& rule = gauss_legendre(20);
    const auto& check = gauss_legendre(10);
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    auto integrand = [&](double z) {
        return norm * std::exp(-0.5 * z * z) * phi.ridge_profile_derivative(a + sigma * z, k) *
               hermite_he(n, z);
    };
    double total = 0.0;
    double deviation = 0.0;
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        const double left = breaks[b];
        const double right = breaks[b + 1];
        if (!(right > left)) continue;
        const int pieces = std::max(1, static_cast<int>(std::ceil((right - left) / max_width)));
        const double width = (right - left) / pieces;
        for (int p = 0; p < pieces; ++p) {
            const double mid = left + (p + 0.5) * width;
            double fine = 0.0;
            double coarse = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                fine += rule.weights[i] * integrand(mid + 0.5 * width * rule.nodes[i]);
            }
            for (std::size_t i = 0; i < check.nodes.size(); ++i) {
                coarse += check.weights[i] * integrand(mid + 0.5 * width * check.nodes[i]);
            }
            total += 0.5 * width * fine;
            deviation += 0.5 * width * std::abs(fine - coarse);
        }
    }
    if (error) *error = deviation;
    return total;
}

}  // namespace nouk
