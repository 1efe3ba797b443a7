#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace nouk {

/// Adaptive Gauss-Kronrod integral of f over [a, b] to relative tolerance
/// `rel_tol`. `error_estimate` receives the absolute error estimate.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, double* error_estimate = nullptr);

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1].
const QuadratureRule& gauss_legendre(int n);

/// Gauss-Hermite rule for the standard normal weight: E f(Z) ~ sum w_i f(x_i).
const QuadratureRule& gauss_hermite(int n);

/// Composite Gauss-Legendre integral over [a, b] with `panels` equal panels.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int panels,
                    int nodes = 8);

/// Radical-inverse (Halton) coordinate `dim` (0-based) of point `index`.
double halton(std::uint64_t index, int dim);

/// Standard normal quantile: rational approximation refined by one Halley step.
double normal_quantile(double p);

double normal_cdf(double x);

/// Weighted least squares line y = intercept + slope * x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<double>& weights);

}  // namespace nouk
