#include "nouk/model.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nouk;
using nouk::test::random_vector;
using nouk::test::thrown_kind;

namespace {

const char* const kExample1 =
    "[model]\nkind = diagonal\nT = 1\nN = 4\na = preset_ak\nb = preset_bk(2)\n";

}  // namespace

TEST_CASE("load_model: Example-1 presets")
{
    const auto m = load_model(std::string(kExample1));
    CHECK(m.dim() == 4);
    CHECK(m.kind() == ModelKind::Diagonal);
    CHECK(m.drift_coefficient(0)(1.0) == -2.0);
    CHECK(m.diffusion_coefficient(0)(0.0) == 2.0);
    CHECK(m.drift_coefficient(2)(0.5) == doctest::Approx(-9.0 * 1.125));
    CHECK(m.diffusion_coefficient(3)(0.25) == doctest::Approx(std::sin(1.0) + 2.0));
    CHECK_FALSE(m.has_affine_term());
}

TEST_CASE("load_model: scalar identity drift a(t) = sin t")
{
    const auto m = load_model(std::string(
        "[model]\nkind = scalar_identity\nN = 3\na = trig(1, 1, 0, 0)\nb = const(1)\n"));
    for (double t : {0.0, 0.3, 0.9}) {
        const Matrix a = m.drift(t);
        CHECK((a - std::sin(t) * Matrix::Identity(3, 3)).norm() < 1e-15);
    }
}

TEST_CASE("load_model: validation errors")
{
    const auto kind_of = [](const std::string& text) {
        return thrown_kind([&] { load_model(text); });
    };
    CHECK(kind_of("[model]\nN = 2\na = const(0)\nb = []\n") == ErrorKind::Validation);
    CHECK(kind_of("[model]\nN = 2\na = const(0)\n") == ErrorKind::Validation);
    CHECK(kind_of("[model]\nN = 0\na = const(0)\nb = const(1)\n") == ErrorKind::Validation);
    CHECK(kind_of("[model]\nN = 2\nkind = banded\na = const(0)\nb = const(1)\n") ==
          ErrorKind::Validation);
    CHECK(kind_of("[model]\nN = 2\na = preset_zz\nb = const(1)\n") == ErrorKind::Validation);
    CHECK(kind_of("[model]\nN = 2\nT = -1\na = const(0)\nb = const(1)\n") == ErrorKind::Validation);
    CHECK(kind_of("[model]\nN = 2\ncolor = red\na = const(0)\nb = const(1)\n") ==
          ErrorKind::Validation);
    CHECK(kind_of("[model]\nN = 2\na = [const(0)]\nb = const(1)\n") == ErrorKind::Validation);
    CHECK(kind_of("[model]\nN = two\na = const(0)\nb = const(1)\n") == ErrorKind::Parse);
}

TEST_CASE("load_model: dense families")
{
    const auto m = load_model(std::string(
        "[model]\nkind = dense\nN = 2\nT = 2\n"
        "[drift]\nmatrix = [[-1, 0], [0, -2]]\n"
        "[drift]\nfn = trig(1, 1, 0, 0)\nmatrix = [[0, 1], [-1, 0]]\n"
        "[diffusion]\nfn = const(0.5)\nmatrix = [[1, 0], [1, 1]]\n"));
    CHECK(m.kind() == ModelKind::Dense);
    const double t = 0.7;
    const Matrix expected_a = Matrix{{-1.0, std::sin(t)}, {-std::sin(t), -2.0}};
    CHECK((m.drift(t) - expected_a).norm() < 1e-15);
    CHECK((m.diffusion(t) - 0.5 * Matrix{{1.0, 0.0}, {1.0, 1.0}}).norm() < 1e-15);
}

TEST_CASE("model serialization round-trips")
{
    const std::vector<std::string> texts{
        kExample1,
        "[model]\nkind = diagonal\nT = 2\nN = 3\na = [const(-1), poly(0, -2), heat(3)]\n"
        "b = [bk(1, 3), const(0.5), trig(1, 2, 0.1, 2)]\nf = [const(1), const(0), const(-0.5)]\n",
        "[model]\nkind = scalar_identity\nN = 2\na = trig(1, 1, 0, 0)\nb = const(1)\n",
        "[model]\nkind = dense\nN = 2\n[drift]\nmatrix = [[-1, 0.25], [0, -2]]\n"
        "[diffusion]\nfn = trig(0.2, 1, 0, 1)\nmatrix = [[1, 0], [0.1, 1]]\n",
    };
    for (const auto& text : texts) {
        const auto m = load_model(text);
        const auto again = load_model(m.to_config());
        CHECK(again == m);
        CHECK(again.to_config() == m.to_config());
    }
}

TEST_CASE("model: summability diagnostic of Example 1")
{
    const auto m = load_model(std::string(kExample1));
    // lambda_k = max_t a_k = -k^2 at t = 0; sup |b_1| = sin 1 + 2, sup |b_k| = 3 for k >= 2.
    double expected = std::pow(std::sin(1.0) + 2.0, 2);
    for (int k = 2; k <= 4; ++k) expected += 9.0 / (k * k);
    CHECK(m.summability_diagnostic() == doctest::Approx(expected).epsilon(1e-5));
    CHECK(m.diffusion_bound() == doctest::Approx(3.0).epsilon(1e-5));
}

TEST_CASE("direction spaces: presets")
{
    const auto m = load_model(std::string(kExample1));
    const auto ambient = direction_space("ambient", m);
    CHECK(ambient.weights() == Vector::Ones(4));
    CHECK(ambient.embedding_constant() == 1.0);

    const auto cm = direction_space("cm_at", m, 0.0);
    CHECK((cm.weights() - Vector::Constant(4, 0.5)).norm() == 0.0);
    CHECK(cm.embedding_constant() == 2.0);

    const auto sob = direction_space("sobolev", m, 0.5);
    for (int k = 1; k <= 4; ++k) {
        CHECK(sob.weights()(k - 1) == doctest::Approx(std::sqrt(k * std::numbers::pi)));
    }
    CHECK(thrown_kind([&] { direction_space("besov", m); }) == ErrorKind::Validation);

    const auto zero_b = load_model(std::string(
        "[model]\nN = 2\na = const(0)\nb = [const(1), trig(1, 1, 0, 0)]\n"));
    CHECK(thrown_kind([&] { direction_space("cm_at", zero_b, 0.0); }) ==
          ErrorKind::DegenerateDiffusion);
    CHECK_FALSE(thrown_kind([&] { direction_space("cm_at", zero_b, 0.5); }));
    CHECK(thrown_kind([] { DirectionSpace::weighted(Vector{{1.0, 0.0}}, "w"); }) ==
          ErrorKind::Validation);
}

TEST_CASE("direction spaces: the E-norm is a norm")
{
    std::mt19937_64 rng(3);
    const auto space = DirectionSpace::weighted(random_vector(rng, 6, 0.1, 4.0), "random");
    std::uniform_real_distribution<double> c(-5.0, 5.0);
    for (int i = 0; i < 200; ++i) {
        const Vector x = random_vector(rng, 6), y = random_vector(rng, 6);
        const double lambda = c(rng);
        CHECK(space.norm(lambda * x) == doctest::Approx(std::abs(lambda) * space.norm(x)).epsilon(1e-14));
        CHECK(space.norm(x + y) <= space.norm(x) + space.norm(y) * (1.0 + 1e-15));
        CHECK(x.norm() <= space.embedding_constant() * space.norm(x) * (1.0 + 1e-15));
        CHECK(std::abs(x.dot(y)) <= space.dual_norm(x) * space.norm(y) * (1.0 + 1e-14));
    }
    CHECK(space.norm(Vector::Zero(6)) == 0.0);
}

TEST_CASE("test functions: values and analytic derivatives")
{
    const Vector e1 = Vector::Unit(3, 0);
    const auto c = TestFunction::cosine(e1);
    CHECK(c(Vector::Zero(3)) == 1.0);
    const std::vector<Vector> one{e1};
    CHECK(std::abs(c.derivative(Vector::Zero(3), one)) < 1e-15);
    const auto rough = TestFunction::abs_sin(e1);
    CHECK(rough.analytic_order() == 0);
    CHECK(thrown_kind([&] { rough.derivative(Vector::Zero(3), one); }) ==
          ErrorKind::UnsupportedOrder);
    CHECK(TestFunction::constant(2.5)(Vector::Ones(3)) == 2.5);
    CHECK(TestFunction::constant(2.5).derivative(Vector::Ones(3), one) == 0.0);
    CHECK(c.has_closed_form_expectation());
    CHECK_FALSE(TestFunction::tanh_linear(e1).has_closed_form_expectation());
}

TEST_CASE("test functions: each derivative order matches a difference of the previous one")
{
    std::mt19937_64 rng(17);
    const int n = 3;
    const std::vector<TestFunction> smooth{
        TestFunction::cosine(Vector{{1.0, -0.5, 2.0}}, 0.3),
        TestFunction::tanh_linear(Vector{{0.7, 0.2, -0.4}}),
        TestFunction::separable({{Factor1d::Kind::Cos, 1.5, 0.2},
                                 {Factor1d::Kind::Tanh, 0.8, 0.0},
                                 {Factor1d::Kind::One, 0.0, 0.0}}),
    };
    const double step = 1e-5;
    for (const auto& phi : smooth) {
        CAPTURE(phi.describe());
        for (int trial = 0; trial < 10; ++trial) {
            const Vector x = random_vector(rng, n, -2.0, 2.0);
            std::vector<Vector> dirs;
            for (int order = 1; order <= 4; ++order) {
                dirs.push_back(random_vector(rng, n));
                const std::span<const Vector> lower(dirs.data(), dirs.size() - 1);
                const Vector& h = dirs.back();
                const double fd = (phi.derivative(x + step * h, lower) -
                                   phi.derivative(x - step * h, lower)) /
                                  (2.0 * step);
                const double exact = phi.derivative(x, dirs);
                CHECK(std::abs(fd - exact) <= 1e-6 * std::max(1.0, std::abs(exact)));
            }
        }
    }
}

TEST_CASE("test functions: declared bounds hold on 10^4 samples")
{
    std::mt19937_64 rng(23);
    const int n = 4;
    const Vector l{{2.0, -1.0, 0.5, 3.0}};
    const std::vector<TestFunction> catalog{
        TestFunction::constant(-1.5), TestFunction::cosine(l, 1.0), TestFunction::tanh_linear(l),
        TestFunction::abs_sin(l),
        TestFunction::separable({{Factor1d::Kind::Cos, 2.0, 0.0},
                                 {Factor1d::Kind::AbsSin, 1.0, 0.5},
                                 {Factor1d::Kind::Tanh, 3.0, 0.0},
                                 {Factor1d::Kind::One, 0.0, 0.0}}),
    };
    for (const auto& phi : catalog) {
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) worst = std::max(worst, std::abs(phi(random_vector(rng, n, -10.0, 10.0))));
        CHECK(worst <= phi.bound());
    }
}

TEST_CASE("test functions: abs_sin is Lipschitz along every direction")
{
    std::mt19937_64 rng(29);
    const Vector l{{1.0, -2.0, 0.5}};
    const auto phi = TestFunction::abs_sin(l);
    const auto space = DirectionSpace::weighted(Vector{{0.5, 1.0, 2.0}}, "w");
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const Vector x = random_vector(rng, 3, -3.0, 3.0);
        const Vector h = 1e-3 * random_vector(rng, 3);
        worst = std::max(worst, std::abs(phi(x + h) - phi(x)) / space.norm(h));
    }
    CHECK(worst <= l.norm() * space.embedding_constant());
    // At a zero of sin the one-sided slopes are +-|l.h|, so there is no derivative.
    const Vector h = Vector::Unit(3, 0);
    const double eps = 1e-7;
    const Vector x0 = Vector::Zero(3);
    const double right = (phi(x0 + eps * h) - phi(x0)) / eps;
    const double left = (phi(x0) - phi(x0 - eps * h)) / eps;
    CHECK(right == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(left == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("test function sections")
{
    const auto doc = ConfigDocument::parse(
        "[phi]\nkind = cosine\nl = [1, 2]\nphase = 0.5\n"
        "[psi]\nkind = separable\nfactors = [cos(2), one, tanh(1, 0.5)]\nrho = trig(1, 1, 0, 0)\n"
        "[bad]\nkind = gaussian\n");
    const auto phi = parse_test_function(*doc.section("phi"), 4);
    CHECK(phi.kind() == TestFunction::Kind::Cosine);
    CHECK(phi.direction() == Vector{{1.0, 2.0, 0.0, 0.0}});
    CHECK(phi.phase() == 0.5);
    const auto psi = parse_source_term(*doc.section("psi"), 4);
    CHECK(psi.phi.factors().size() == 4);
    CHECK(psi.phi.factors()[3].kind == Factor1d::Kind::One);
    const Vector x{{0.1, 0.2, 0.3, 0.4}};
    CHECK(psi(0.5, x) == doctest::Approx(std::sin(0.5) * std::cos(0.2) * std::tanh(0.8)));
    CHECK(thrown_kind([&] { parse_test_function(*doc.section("bad"), 4); }) ==
          ErrorKind::Validation);
    CHECK(thrown_kind([&] { parse_test_function(*doc.section("psi"), 2); }) ==
          ErrorKind::Validation);
}
