#include "nouk/numerics.hpp"
#include "nouk/propagator.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nouk;
using nouk::test::random_matrix;
using nouk::test::random_vector;
using nouk::test::rel_diff;
using nouk::test::thrown_kind;

namespace {

EvolutionModel brownian(int n, double horizon = 1.0)
{
    return EvolutionModel::diagonal(horizon, std::vector<TimeFn>(n, TimeFn::constant(0.0)),
                                    std::vector<TimeFn>(n, TimeFn::constant(1.0)));
}

EvolutionModel example1(int n)
{
    std::vector<TimeFn> a, b;
    for (int k = 1; k <= n; ++k) {
        a.push_back(TimeFn::preset_ak(k));
        b.push_back(TimeFn::preset_bk(k, 2.0));
    }
    return EvolutionModel::diagonal(1.0, a, b);
}

EvolutionModel random_diagonal(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(-2.0, 0.5), amp(0.1, 1.0), freq(0.5, 3.0);
    std::vector<TimeFn> a, b;
    for (int k = 0; k < n; ++k) {
        a.push_back(TimeFn::poly({u(rng), u(rng), 0.5 * u(rng)}));
        b.push_back(TimeFn::trig(amp(rng), freq(rng), u(rng), 1.5));
    }
    return EvolutionModel::diagonal(1.0, a, b);
}

/// A(t) = A0 + sin(2t) A1, B(t) = B0 + 0.3 cos(t) I with random constant parts.
EvolutionModel random_dense(std::mt19937_64& rng, int n)
{
    const Matrix a0 = 0.5 * random_matrix(rng, n, n) - Matrix::Identity(n, n);
    const Matrix a1 = 0.5 * random_matrix(rng, n, n);
    const Matrix b0 = Matrix::Identity(n, n) + 0.3 * random_matrix(rng, n, n);
    return EvolutionModel::dense(
        1.0, n, {{TimeFn::constant(1.0), a0}, {TimeFn::trig(1.0, 2.0, 0.0, 0.0), a1}},
        {{TimeFn::constant(1.0), b0},
         {TimeFn::trig(0.3, 1.0, std::numbers::pi / 2, 0.0), Matrix::Identity(n, n)}});
}

/// Reference q_k(t, s) by composite Gauss-Legendre on a fine mesh.
double reference_q(const TimeFn& a, const TimeFn& b, double s, double t)
{
    return integrate_gl(
        [&](double r) {
            const double inner = integrate_gl([&](double v) { return a(v); }, r, t, 8, 10);
            return std::exp(2.0 * inner) * b(r) * b(r);
        },
        s, t, 64, 10);
}

}  // namespace

TEST_CASE("transition: closed-form multipliers")
{
    const auto u0 = transition(brownian(3), 0.2, 0.9);
    CHECK(u0.multipliers() == Vector::Ones(3));

    const auto sine = EvolutionModel::scalar_identity(4.0, TimeFn::trig(1.0, 1.0, 0.0, 0.0),
                                                      {TimeFn::constant(1.0)});
    CHECK(rel_diff(transition(sine, 0.0, std::numbers::pi).multipliers()(0), std::exp(2.0)) < 1e-14);

    const auto decay = EvolutionModel::diagonal(1.0, {TimeFn::constant(-1.0), TimeFn::constant(-1.0)},
                                                {TimeFn::constant(1.0), TimeFn::constant(1.0)});
    const auto u = transition(decay, 0.0, 1.0);
    CHECK(rel_diff(u.multipliers()(0), std::exp(-1.0)) < 1e-15);
    CHECK(rel_diff(u.multipliers()(1), std::exp(-1.0)) < 1e-15);

    const auto same = transition(example1(4), 0.4, 0.4);
    CHECK(same.multipliers() == Vector::Ones(4));
    CHECK(thrown_kind([] { transition(brownian(2), 0.5, 0.4); }) == ErrorKind::Validation);
    CHECK(thrown_kind([] { transition(brownian(2), 0.0, 1.5); }) == ErrorKind::Validation);
}

TEST_CASE("transition: dense integrator agrees with the diagonal path")
{
    std::mt19937_64 rng(41);
    const auto diag = random_diagonal(rng, 3);
    Matrix a0 = Matrix::Zero(3, 3), a1 = a0, a2 = a0;
    for (int k = 0; k < 3; ++k) {
        const auto& c = diag.drift_coefficient(k).params();
        a0(k, k) = c[0];
        a1(k, k) = c[1];
        a2(k, k) = c[2];
    }
    const auto dense = EvolutionModel::dense(
        1.0, 3,
        {{TimeFn::constant(1.0), a0}, {TimeFn::poly({0.0, 1.0}), a1}, {TimeFn::poly({0.0, 0.0, 1.0}), a2}},
        {{TimeFn::constant(1.0), Matrix::Identity(3, 3)}});
    const Matrix ud = transition(dense, 0.1, 0.95).matrix();
    const Matrix ux = transition(diag, 0.1, 0.95).matrix();
    CHECK((ud - ux).norm() < 1e-10);
    CHECK(transition(dense, 0.3, 0.3).matrix() == Matrix::Identity(3, 3));
}

TEST_CASE("mean: affine term")
{
    const Vector x{{1.0, -2.0}};
    const auto m0 = example1(2);
    CHECK((mean(m0, 0.2, 0.8, x) - transition(m0, 0.2, 0.8).apply(x)).norm() == 0.0);

    const auto drift_free = EvolutionModel::diagonal(
        1.0, {TimeFn::constant(0.0), TimeFn::constant(0.0)},
        {TimeFn::constant(1.0), TimeFn::constant(1.0)}, {TimeFn::constant(3.0), TimeFn::constant(-1.0)});
    const Vector g = mean(drift_free, 0.25, 0.75, Vector::Zero(2));
    CHECK(rel_diff(g(0), 1.5) < 1e-14);
    CHECK(rel_diff(g(1), -0.5) < 1e-14);

    const auto decay = EvolutionModel::diagonal(1.0, {TimeFn::constant(-1.0)}, {TimeFn::constant(1.0)},
                                                {TimeFn::constant(1.0)});
    CHECK(rel_diff(mean(decay, 0.0, 1.0, Vector::Zero(1))(0), 1.0 - std::exp(-1.0)) < 1e-12);

    // Dense path on the same data.
    const auto dense = EvolutionModel::dense(1.0, 1, {{TimeFn::constant(1.0), Matrix{{-1.0}}}},
                                             {{TimeFn::constant(1.0), Matrix{{1.0}}}},
                                             {TimeFn::constant(1.0)});
    CHECK(std::abs(mean(dense, 0.0, 1.0, Vector::Zero(1))(0) - (1.0 - std::exp(-1.0))) < 1e-10);
}

TEST_CASE("covariance: closed forms and quadrature")
{
    const auto no_noise = EvolutionModel::diagonal(1.0, {TimeFn::constant(-1.0)}, {TimeFn::constant(0.0)});
    CHECK(covariance(no_noise, 0.0, 1.0).eigenvalues()(0) == 0.0);

    const auto q = covariance(brownian(3), 0.3, 0.8);
    for (int k = 0; k < 3; ++k) CHECK(rel_diff(q.eigenvalues()(k), 0.5) < 1e-15);

    for (double alpha : {-3.0, -0.5, 0.7}) {
        const auto m = EvolutionModel::diagonal(1.0, {TimeFn::constant(alpha)}, {TimeFn::constant(1.0)});
        const double expected = std::expm1(2.0 * alpha * 0.6) / (2.0 * alpha);
        CHECK(rel_diff(covariance(m, 0.1, 0.7).eigenvalues()(0), expected) < 1e-10);
    }

    const auto ex = example1(6);
    for (double s : {0.0, 0.35, 0.9}) {
        const auto cov = covariance(ex, s, 1.0);
        for (int k = 0; k < 6; ++k) {
            const double ref = reference_q(ex.drift_coefficient(k), ex.diffusion_coefficient(k), s, 1.0);
            CHECK(rel_diff(cov.eigenvalues()(k), ref) < 1e-10);
        }
    }
    // Very short intervals.
    const double tiny = covariance(ex, 0.25, 0.25 + 1e-7).eigenvalues()(0);
    CHECK(rel_diff(tiny, 1e-7 * std::pow(std::sin(0.25) + 2.0, 2)) < 1e-6);
}

TEST_CASE("covariance: Lyapunov ODE against double quadrature on random dense models")
{
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = random_dense(rng, 4);
        const auto cov = covariance(m, 0.1, 0.9);
        const Matrix ref = covariance_by_quadrature(m, 0.1, 0.9);
        const Matrix q = cov.matrix();
        CHECK((q - ref).cwiseAbs().maxCoeff() <= 1e-8 * ref.cwiseAbs().maxCoeff());
        CHECK(cov.symmetry_defect() <= 1e-12);
        CHECK(cov.eigenvalues().minCoeff() >= 0.0);
        const Matrix s = cov.sqrt_factor();
        CHECK((s * s.transpose() - q).norm() <= 1e-10 * q.norm());
        CHECK(cov.trace() == doctest::Approx(q.trace()).epsilon(1e-12));
    }
}

TEST_CASE("Covariance: rank tolerance and pseudo-inverse")
{
    const auto c = Covariance::diagonal(Vector{{4.0, 0.0, 1.0}});
    CHECK(c.rank() == 2);
    CHECK(c.is_null(1));
    const Matrix p = c.pinv_sqrt();
    CHECK(p(0, 0) == 0.5);
    CHECK(p(1, 1) == 0.0);
    CHECK(p(2, 2) == 1.0);
    CHECK(thrown_kind([&] { c.require_in_range(Vector{{1.0, 1.0, 0.0}}); }) == ErrorKind::KernelComponent);

    std::mt19937_64 rng(47);
    const Matrix spd = nouk::test::random_spd(rng, 4);
    const auto d = Covariance::dense(spd);
    CHECK(d.rank() == 4);
    const Matrix w = d.pinv_sqrt();
    CHECK((w * spd * w - Matrix::Identity(4, 4)).norm() < 1e-12);
    CHECK(thrown_kind([] { Covariance::dense(Matrix{{1.0, 0.0}, {0.0, -0.5}}); }) == ErrorKind::Internal);
}

TEST_CASE("Lambda operator")
{
    const auto bm = brownian(5);
    const auto space = DirectionSpace::ambient(5);
    for (double tau : {1e-4, 1e-2, 0.5}) {
        const auto lambda = lambda_operator(bm, space, 0.9 - tau, 0.9);
        CHECK(rel_diff(lambda.norm, 1.0 / std::sqrt(tau)) < 1e-10);
    }

    const auto degenerate = EvolutionModel::diagonal(
        1.0, {TimeFn::constant(0.0), TimeFn::constant(0.0)}, {TimeFn::constant(0.0), TimeFn::constant(1.0)});
    try {
        lambda_operator(degenerate, DirectionSpace::ambient(2), 0.0, 1.0);
        FAIL("expected NotSmoothing");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NotSmoothing);
        CHECK(e.index() == 1);
    }

    // Diagonal formula max_k exp(int a_k) / (w_k sqrt q_k).
    const auto ex = example1(8);
    const auto cm = DirectionSpace::cm_at(ex, 0.0);
    const auto lambda = lambda_operator(ex, cm, 0.6, 1.0);
    const auto u = transition(ex, 0.6, 1.0);
    const auto q = covariance(ex, 0.6, 1.0);
    double expected = 0.0;
    for (int k = 0; k < 8; ++k) {
        expected = std::max(expected, u.multipliers()(k) / (cm.weights()(k) * std::sqrt(q.eigenvalues()(k))));
    }
    CHECK(rel_diff(lambda.norm, expected) < 1e-13);

    // Dense: largest singular value of Q^{-1/2} U W^{-1} from an independent SVD.
    std::mt19937_64 rng(53);
    const auto dense = random_dense(rng, 3);
    const auto w = DirectionSpace::weighted(Vector{{1.0, 2.0, 0.5}}, "w");
    const auto ld = lambda_operator(dense, w, 0.2, 0.7);
    const Matrix qd = covariance_by_quadrature(dense, 0.2, 0.7);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(qd);
    const Matrix qinvsqrt = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                            eig.eigenvectors().transpose();
    const Matrix op = qinvsqrt * transition(dense, 0.2, 0.7).matrix() *
                      w.weights().cwiseInverse().asDiagonal();
    const Eigen::JacobiSVD<Matrix> svd(op);
    CHECK(rel_diff(ld.norm, svd.singularValues()(0)) < 1e-7);
    const Vector h = Vector{{0.3, -1.0, 2.0}};
    CHECK((ld.apply(h) - op * h).norm() < 1e-6 * (op * h).norm());
}

TEST_CASE("minimum-energy control")
{
    const auto bm = brownian(2);
    const auto zero = gramian_min_energy(bm, 0.0, 1.0, Vector::Zero(2), 64);
    CHECK(zero.norm == 0.0);
    CHECK(zero.control.cwiseAbs().maxCoeff() == 0.0);

    const auto unit = gramian_min_energy(bm, 0.0, 1.0, Vector::Unit(2, 0), 64);
    CHECK(std::abs(unit.norm - 1.0) < 1e-12);
    CHECK(std::abs(unit.exact_norm - 1.0) < 1e-12);
    // The optimal control is constant.
    CHECK((unit.control.row(0).array() - 1.0).abs().maxCoeff() < 1e-10);
    CHECK(unit.control.row(1).cwiseAbs().maxCoeff() < 1e-12);

    std::mt19937_64 rng(59);
    const auto m = random_diagonal(rng, 4);
    const Vector target = random_vector(rng, 4);
    double previous = std::numeric_limits<double>::infinity();
    for (int grid : {32, 64, 128, 256, 512}) {
        const auto r = gramian_min_energy(m, 0.1, 0.9, target, grid);
        CHECK(r.defect <= previous);
        previous = r.defect;
    }
    CHECK(previous <= 1e-3);

    const auto blocked = EvolutionModel::diagonal(
        1.0, {TimeFn::constant(0.0), TimeFn::constant(0.0)}, {TimeFn::constant(0.0), TimeFn::constant(1.0)});
    CHECK(thrown_kind([&] { gramian_min_energy(blocked, 0.0, 1.0, Vector::Unit(2, 0), 32); }) ==
          ErrorKind::RangeError);
}

TEST_CASE("cocycle defect")
{
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto ex = example1(8);
    const auto dense = random_dense(rng, 4);
    CHECK(cocycle_defect(ex, 0.3, 0.3, 0.8) == 0.0);
    double worst_diag = 0.0, worst_dense = 0.0;
    for (int i = 0; i < 100; ++i) {
        double p[3] = {u(rng), u(rng), u(rng)};
        std::sort(p, p + 3);
        worst_diag = std::max(worst_diag, cocycle_defect(ex, p[0], p[1], p[2]));
        if (i < 20) worst_dense = std::max(worst_dense, cocycle_defect(dense, p[0], p[1], p[2]));
    }
    CHECK(worst_diag <= 1e-13);
    CHECK(worst_dense <= 1e-8);
}

TEST_CASE("covariance monotonicity")
{
    const auto bm = brownian(3);
    CHECK(cov_monotonicity_defect(bm, 0.9, 0.4, 0.4).defect == 0.0);
    const auto r = cov_monotonicity_defect(bm, 0.9, 0.2, 0.5);
    CHECK(r.defect == 0.0);
    CHECK(rel_diff(r.lipschitz_ratio, 1.0) < 1e-12);
    CHECK(r.lipschitz_ratio <= r.lipschitz_bound);

    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto ex = example1(8);
    for (int i = 0; i < 100; ++i) {
        double p[3] = {u(rng), u(rng), u(rng)};
        std::sort(p, p + 3);
        if (p[1] == p[2]) continue;
        const auto m = cov_monotonicity_defect(ex, p[2], p[0], p[1]);
        CHECK(m.defect <= 1e-10 * m.scale);
        CHECK(m.lipschitz_ratio <= m.lipschitz_bound);
    }
}

TEST_CASE("Cameron-Martin norm equivalence and embedding constants")
{
    const auto bm = brownian(3);
    const auto same = cm_equivalence_constants(bm, 1.0, 0.4, 0.4);
    CHECK(same.c12 == 1.0);
    CHECK(same.c21 == 1.0);
    const auto c = cm_equivalence_constants(bm, 1.0, 0.2, 0.6);
    const double expected = std::sqrt(0.4 / 0.8);
    CHECK(rel_diff(c.c12, expected) < 1e-12);
    CHECK(rel_diff(c.c21, 1.0 / expected) < 1e-12);

    const auto ex = example1(6);
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        double p[3] = {u(rng), u(rng), u(rng)};
        std::sort(p, p + 3);
        const auto e = cm_equivalence_constants(ex, p[2], p[0], p[1]);
        CHECK(e.c12 <= 1.0 + 1e-12);
        CHECK(e.c21 >= 1.0 - 1e-12);
    }

    const auto k1 = ht_embedding_constant(bm, 0.5, 0.9);
    CHECK(rel_diff(k1.value, std::sqrt(0.4)) < 1e-12);
    const auto k2 = ht_embedding_constant(bm, 0.7, 0.9);
    CHECK(rel_diff(k1.value / k2.value, std::sqrt(2.0)) < 1e-12);
    const auto vanishing = EvolutionModel::diagonal(1.0, {TimeFn::constant(0.0)},
                                                    {TimeFn::poly({1.0, -1.0})});
    CHECK(thrown_kind([&] { ht_embedding_constant(vanishing, 0.5, 1.0); }) == ErrorKind::RankDeficient);
}
