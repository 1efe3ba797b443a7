#pragma once

#include "nouk/mild.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace nouk {

using ScalarField = std::function<double(const Vector&)>;

/// Least-squares line through (log_x, log_y) with the two extreme points
/// weighted by one half.
struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<double> log_x;
    std::vector<double> log_y;
    std::vector<double> residuals;
};

ExponentFit fit_exponent(std::vector<double> log_x, std::vector<double> log_y);

/// n points from lo to hi, equally spaced in log.
std::vector<double> geometric_grid(double lo, double hi, int n);

struct SamplingOptions {
    int budget = 4096;
    std::uint64_t seed = 0;
    /// Sampling box; empty bounds mean [-3, 3]^N.
    Vector lower;
    Vector upper;
    /// Increment magnitudes ||h||_E span [h_min, h_max] in `scales` geometric bands.
    double h_min = 1e-4;
    double h_max = 1.0;
    int scales = 8;
    /// Restricts increments to multiples of these directions (E-normalized);
    /// empty means Halton directions over all of X.
    std::vector<Vector> directions;
    /// Hill-climbing steps around the incumbent after each dyadic block.
    int refine_steps = 32;
};

/// Lower bound of a sup-type seminorm together with the (x, h) realizing it.
struct SeminormEstimate {
    double value = 0.0;
    Vector x;
    Vector h;
    int budget = 0;
};

/// |f(x + h) - f(x)| / ||h||_E^alpha
double holder_ratio(const ScalarField& f, const DirectionSpace& space, double alpha,
                    const Vector& x, const Vector& h);
/// |f(x + 2h) - 2 f(x + h) + f(x)| / ||h||_E
double zygmund_ratio(const ScalarField& f, const DirectionSpace& space, const Vector& x,
                     const Vector& h);

/// Samples are processed in dyadic blocks (64, 64, 128, ...) and only complete
/// blocks trigger refinement, so a larger budget never lowers the estimate.
SeminormEstimate holder_seminorm(const ScalarField& f, const DirectionSpace& space, double alpha,
                                 const SamplingOptions& options = {});
SeminormEstimate zygmund_seminorm(const ScalarField& f, const DirectionSpace& space,
                                  const SamplingOptions& options = {});

/// Slope of log omega(r) against log r, omega(r) = max |f(x + h) - f(x)| over
/// the sampled x and ||h||_E = r. Throws DegenerateFit when omega vanishes.
ExponentFit modulus_fit(const ScalarField& f, const DirectionSpace& space,
                        const std::vector<double>& r_grid, const SamplingOptions& options = {});

/// Slope of log ||Lambda(t, s)||_{L(E, X)} against log(t - s) over s = t - tau.
/// The blow-up exponent is -slope.
ExponentFit theta_fit(const EvolutionModel& model, const DirectionSpace& space, double t,
                      const std::vector<double>& tau_grid);

/// Slope of log sup |D^n P_{t - tau, t} phi (x)(h_1..h_n)| against log tau, the
/// sup taken over `budget` sampled points x and unit direction tuples (the same
/// set for every tau).
ExponentFit blowup_check(const EvolutionModel& model, const DirectionSpace& space,
                         const TestFunction& phi, int n, double t,
                         const std::vector<double>& tau_grid, const SamplingOptions& options = {},
                         const EvalParams& params = {});

struct RangeInclusion {
    bool holds = false;
    /// sup ||L1^T x|| / ||L2^T x|| by the generalized eigenproblem; infinite
    /// when the inclusion fails.
    double constant = 0.0;
    /// ||pinv(L2) L1||, the cross-check.
    double constant_pinv = 0.0;
    /// ||L1^T x|| over unit x in ker L2^T, relative to ||L1||.
    double kernel_leak = 0.0;
};

/// range(L1) within range(L2), i.e. ||L1^T x|| <= C ||L2^T x||.
RangeInclusion range_inclusion(const Matrix& l1, const Matrix& l2);

/// Closed-form C^gamma_E norm: sum_{j <= floor gamma} sup ||D^j phi|| plus the
/// Hoelder seminorm of the top derivative for fractional gamma. Cosines and
/// constants only; UnsupportedFunction otherwise.
double closed_form_holder_norm(const TestFunction& phi, const DirectionSpace& space,
                               double gamma);

struct InterpolationCheck {
    bool holds = false;
    double lhs = 0.0;       // ||phi||_{alpha1 + n + sigma}
    double rhs = 0.0;       // ||phi||_{alpha1 + n}^{1 - sigma} ||phi||_{alpha1 + n + 1}^sigma
    double constant = 1.0;  // 1 + 2^{1 - sigma}
    double slack = 0.0;     // constant * rhs - lhs
};

InterpolationCheck interp_check(const TestFunction& phi, const DirectionSpace& space,
                                double alpha1, double sigma, int n);

struct SchauderRow {
    double s = 0.0;
    int order = 0;
    std::string quantity;  // sup_norm, modulus_exponent, zygmund_quotient, zygmund_growth
    /// ||h||_E for per-radius rows, 0 otherwise.
    double radius = 0.0;
    double value = 0.0;
    double expected = 0.0;
    std::string verdict;
};

struct SchauderOptions {
    SamplingOptions sampling;
    QuadSpec quad;
    EvalParams params;
    /// Highest derivative order examined; -1 means floor(alpha + 1/theta).
    int n_max = -1;
    /// Increment magnitudes for the Zygmund ratio and modulus fits.
    double r_min = 1e-3;
    double r_max = 1e-1;
    int r_points = 7;
    double bounded_factor = 3.0;
    double unbounded_factor = 10.0;
};

struct SchauderReport {
    double theta = 0.0;
    double alpha = 0.0;
    /// alpha + 1/theta is an integer k: the top order k - 1 is checked in Z^1.
    bool zygmund_case = false;
    int top_order = 0;
    std::vector<SchauderRow> rows;
};

/// "bounded" when growth <= bounded_factor, "unbounded" above unbounded_factor,
/// "inconclusive" in between.
std::string zygmund_verdict(double growth, double bounded_factor = 3.0,
                            double unbounded_factor = 10.0);

/// Growth of the Zygmund quotient as ||h|| decreases: max_j Z(r_j) / Z(r_max).
double zygmund_growth(const std::vector<double>& radii, const std::vector<double>& quotients);

SchauderReport schauder_report(const EvolutionModel& model, const DirectionSpace& space,
                               double theta, const TestFunction& phi, const SourceTerm& psi,
                               double t, double alpha, const std::vector<double>& s_grid,
                               const SchauderOptions& options = {});

}  // namespace nouk
