#pragma once

#include "nouk/semigroup.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nouk {

struct CheckRow {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct CheckOptions {
    std::uint64_t seed = 0;
    int in_trials = 1000;
    int cm_trials = 100;
    int cm_samples = 1 << 14;
    int gramian_grid = 512;
    int sde_paths = 8192;
    int sde_steps = 400;
};

/// Diagonal and dense models the suite falls back to when the configured model
/// is of the other kind or too stiff for explicit time stepping.
EvolutionModel reference_diagonal_model();
EvolutionModel reference_dense_model();

/// T sup_t ||A(t)||, sampled on 65 points.
double stiffness(const EvolutionModel& model);

/// Structural invariants: cocycle (diagonal and dense), covariance ODE against
/// quadrature, covariance monotonicity, Chapman-Kolmogorov, I_n against the
/// pairing expansion, Cameron-Martin density, minimum-energy control and the
/// SDE oracle. `phi` should be a cosine; other kinds are replaced by cos(x_1).
std::vector<CheckRow> run_checks(const EvolutionModel& model, const TestFunction& phi,
                                 const CheckOptions& options = {});

bool all_pass(const std::vector<CheckRow>& rows);

}  // namespace nouk
