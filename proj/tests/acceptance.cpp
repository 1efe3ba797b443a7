#include "nouk/check.hpp"
#include "nouk/cli.hpp"
#include "nouk/gaussian.hpp"
#include "nouk/numerics.hpp"
#include "nouk/oracle.hpp"
#include "nouk/parallel.hpp"
#include "nouk/regularity.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace nouk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    std::ostringstream out;
    out << std::setprecision(4) << v;
    return out.str();
}

double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vector random_vector(std::mt19937_64& rng, int n, double lo, double hi)
{
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
    return v;
}

TimeFn random_drift(std::mt19937_64& rng)
{
    if (rng() % 2) return TimeFn::constant(uniform(rng, -4.0, 0.5));
    return TimeFn::trig(uniform(rng, 0.1, 1.0), uniform(rng, 0.5, 4.0), uniform(rng, 0.0, 3.0),
                        uniform(rng, -3.0, 0.0));
}

TimeFn random_diffusion(std::mt19937_64& rng)
{
    if (rng() % 2) return TimeFn::constant(uniform(rng, 0.3, 1.5));
    const double amplitude = uniform(rng, 0.1, 0.4);
    return TimeFn::trig(amplitude, uniform(rng, 0.5, 4.0), uniform(rng, 0.0, 3.0),
                        amplitude + uniform(rng, 0.3, 1.0));
}

struct RandomDiagonal {
    std::vector<TimeFn> a, b, f;
};

RandomDiagonal random_modes(std::mt19937_64& rng, int n, bool forcing)
{
    RandomDiagonal out;
    for (int k = 0; k < n; ++k) {
        out.a.push_back(random_drift(rng));
        out.b.push_back(random_diffusion(rng));
        if (forcing) out.f.push_back(TimeFn::constant(uniform(rng, -1.0, 1.0)));
    }
    return out;
}

EvolutionModel brownian(int n)
{
    return EvolutionModel::diagonal(1.0, std::vector<TimeFn>(n, TimeFn::constant(0.0)),
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

EvolutionModel heat(int n, double gamma)
{
    std::vector<TimeFn> a, b;
    for (int k = 1; k <= n; ++k) {
        a.push_back(TimeFn::preset_heat(k));
        b.push_back(TimeFn::constant(std::pow(k * std::numbers::pi, -gamma)));
    }
    return EvolutionModel::diagonal(1.0, a, b);
}

/// cos(<l, m>) exp(-<Q l, l> / 2) with the per-mode mean and variance integrals done by
/// Gauss-Legendre quadrature on the drift antiderivative.
double cosine_oracle(const RandomDiagonal& modes, const Vector& l, double s, double t, const Vector& x)
{
    double phase = 0.0, variance = 0.0;
    for (int k = 0; k < l.size(); ++k) {
        const TimeFn& a = modes.a[k];
        const TimeFn& b = modes.b[k];
        double m = x[k] * std::exp(a.integral(s, t));
        if (!modes.f.empty()) {
            const TimeFn& f = modes.f[k];
            m += integrate_gl([&](double r) { return std::exp(a.integral(r, t)) * f(r); }, s, t, 400, 10);
        }
        const double q = integrate_gl(
            [&](double r) { return std::exp(2.0 * a.integral(r, t)) * b(r) * b(r); }, s, t, 400, 10);
        phase += l[k] * m;
        variance += l[k] * l[k] * q;
    }
    return std::cos(phase) * std::exp(-0.5 * variance);
}

struct OracleRun {
    double worst_mc_z = 0.0;
    double worst_gh = 0.0;
};

OracleRun characteristic_run(bool doubled)
{
    std::mt19937_64 rng(2024);
    OracleRun out;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 16);
        const int dim = doubled ? 2 * n : n;
        const RandomDiagonal modes = random_modes(rng, dim, trial % 2 == 1);
        const EvolutionModel model = EvolutionModel::diagonal(1.0, modes.a, modes.b, modes.f);
        const double s = uniform(rng, 0.0, 0.5);
        const double t = uniform(rng, s + 0.05, 1.0);
        Vector l = Vector::Zero(dim);
        l.head(n) = random_vector(rng, n, -1.5, 1.5);
        if (doubled) l.tail(n) = random_vector(rng, n, -1.5, 1.5);
        const Vector x = random_vector(rng, dim, -2.0, 2.0);
        const auto phi = TestFunction::cosine(l);
        const double exact = cosine_oracle(modes, l, s, t, x);

        EvalParams mc;
        mc.method = Method::MonteCarlo;
        mc.samples = 1 << 16;
        mc.seed = 100 + static_cast<std::uint64_t>(trial);
        const EvalReport r = apply(model, phi, s, t, x, mc);
        out.worst_mc_z = std::max(out.worst_mc_z, std::abs(r.value - exact) / r.uncertainty);

        EvalParams gh;
        gh.method = Method::GaussHermite;
        out.worst_gh = std::max(out.worst_gh, std::abs(apply(model, phi, s, t, x, gh).value - exact));
    }
    return out;
}

Outcome criterion1()
{
    const OracleRun r = characteristic_run(false);
    return {r.worst_mc_z <= 4.0 && r.worst_gh <= 1e-10,
            "max MC |dev|/SE = " + fmt(r.worst_mc_z) + " (<= 4), max GH |dev| = " + fmt(r.worst_gh) +
                " (<= 1e-10)"};
}

Outcome criterion2()
{
    std::mt19937_64 rng(77);
    std::normal_distribution<double> z;
    double worst_rel = 0.0;
    double worst_z = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Matrix g(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) g(i, j) = z(rng);
        const Eigen::HouseholderQR<Matrix> qr(g);
        const Matrix basis = qr.householderQ();
        const Matrix q = basis * random_vector(rng, 4, 0.2, 3.0).asDiagonal() * basis.transpose();
        const Covariance cov = Covariance::dense(q);
        const Vector h = random_vector(rng, 4, -1.0, 1.0);
        const Vector y = cov.sqrt_apply(random_vector(rng, 4, -2.0, 2.0));
        const double density = cm_density(cov, h, y);
        const double ratio = oracle::gaussian_pdf_ratio(q, h, y);
        worst_rel = std::max(worst_rel, std::abs(density - ratio) / std::abs(ratio));

        if (trial % 5 == 0) {
            // E phi(Y + h) against E phi(Y) rho_h(Y) with independent sample sets.
            const Vector l = random_vector(rng, 4, -1.0, 1.0);
            const int count = 1 << 16;
            const Matrix shifted = sample(cov, h, count, 500 + trial, op_id("acceptance.cm.shifted"));
            const Matrix plain = sample(cov, Vector::Zero(4), count, 900 + trial, op_id("acceptance.cm.plain"));
            double s1 = 0, s1sq = 0, s2 = 0, s2sq = 0;
            for (int i = 0; i < count; ++i) {
                const double a = std::cos(l.dot(shifted.col(i)));
                const double b = std::cos(l.dot(plain.col(i))) * cm_density(cov, h, plain.col(i));
                s1 += a;
                s1sq += a * a;
                s2 += b;
                s2sq += b * b;
            }
            const double m1 = s1 / count, m2 = s2 / count;
            const double v1 = (s1sq / count - m1 * m1) / (count - 1);
            const double v2 = (s2sq / count - m2 * m2) / (count - 1);
            worst_z = std::max(worst_z, std::abs(m1 - m2) / std::sqrt(v1 + v2));
        }
    }
    return {worst_rel <= 1e-10 && worst_z <= 4.0,
            "max rel |density - pdf ratio| = " + fmt(worst_rel) +
                " (<= 1e-10), change of measure max |dev|/SE = " + fmt(worst_z) + " (<= 4)"};
}

Outcome criterion3()
{
    std::mt19937_64 rng(31);
    double worst_det = 0.0;
    double worst_z = 0.0;
    int comparisons = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 3;
        const bool dense = trial % 4 == 3;
        EvolutionModel model = brownian(1);
        int dim = 0;
        if (dense) {
            dim = 3;
            Matrix a0 = -1.5 * Matrix::Identity(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (i != j) a0(i, j) = uniform(rng, -0.5, 0.5);
            Matrix a1 = Matrix::Zero(3, 3);
            a1(0, 1) = 1.0;
            a1(1, 0) = -1.0;
            Matrix b0 = Matrix::Identity(3, 3);
            b0(1, 0) = uniform(rng, -0.5, 0.5);
            b0(2, 1) = uniform(rng, -0.5, 0.5);
            model = EvolutionModel::dense(1.0, 3,
                                          {{TimeFn::constant(1.0), a0}, {TimeFn::trig(1.0, 2.0, 0.0, 0.0), a1}},
                                          {{TimeFn::constant(1.0), b0}});
        } else {
            dim = 2 + static_cast<int>(rng() % 4);
            const RandomDiagonal modes = random_modes(rng, dim, trial % 2 == 0);
            model = EvolutionModel::diagonal(1.0, modes.a, modes.b, modes.f);
        }
        const auto space = DirectionSpace::ambient(dim);
        const double s = uniform(rng, 0.0, 0.5);
        const double t = uniform(rng, s + 0.2, 1.0);
        const Vector l = random_vector(rng, dim, -1.2, 1.2);
        const Vector x = random_vector(rng, dim, -2.0, 2.0);
        std::vector<Vector> dirs;
        for (int i = 0; i < n; ++i) dirs.push_back(random_vector(rng, dim, -1.0, 1.0));
        const auto phi = TestFunction::cosine(l, uniform(rng, 0.0, 3.0));

        // Amplitude of the cosine derivative: prod |<l, U h_i>| exp(-<Q l, l> / 2).
        const Propagator u = transition(model, s, t);
        const Matrix um = u.matrix();
        double amplitude = std::exp(-0.5 * l.dot(covariance(model, s, t).matrix() * l));
        for (const auto& h : dirs) amplitude *= std::abs(l.dot(um * h));
        auto rel = [&](double a, double b) {
            return std::abs(a - b) / std::max({std::abs(a), std::abs(b), amplitude});
        };

        std::vector<double> deterministic;
        for (int k = 0; k <= n; ++k) {
            deterministic.push_back(mixed_derivative(model, space, phi, s, t, x, dirs, k).value);
            if (model.is_diagonal()) {
                EvalParams gh;
                gh.method = Method::GaussHermite;
                deterministic.push_back(mixed_derivative(model, space, phi, s, t, x, dirs, k, gh).value);
            }
        }
        EvalParams closed;
        closed.method = Method::ClosedForm;
        const FdResult fd = fd_derivative(
            [&](const Vector& z) { return apply(model, phi, s, t, z, closed).value; }, x, dirs);
        deterministic.push_back(fd.value);
        for (std::size_t i = 0; i < deterministic.size(); ++i) {
            for (std::size_t j = i + 1; j < deterministic.size(); ++j) {
                worst_det = std::max(worst_det, rel(deterministic[i], deterministic[j]));
                ++comparisons;
            }
        }

        EvalParams mc;
        mc.method = Method::MonteCarlo;
        mc.samples = 1 << 16;
        mc.seed = 7000 + static_cast<std::uint64_t>(trial);
        for (int k : {0, n}) {
            const EvalReport r = mixed_derivative(model, space, phi, s, t, x, dirs, k, mc);
            worst_z = std::max(worst_z, std::abs(r.value - deterministic.front()) / r.uncertainty);
        }
    }
    return {worst_det <= 1e-5 && worst_z <= 4.0,
            "deterministic paths max rel dev = " + fmt(worst_det) + " over " +
                std::to_string(comparisons) + " pairs (<= 1e-5), MC max |dev|/SE = " + fmt(worst_z) +
                " (<= 4)"};
}

Outcome criterion4()
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z;
    std::vector<std::shared_ptr<const TransitionKernel>> kernels;
    for (int m = 0; m < 10; ++m) {
        const double s = uniform(rng, 0.0, 0.3);
        const double t = s + uniform(rng, 0.3, 0.7);
        if (m % 2) {
            Matrix a0 = -Matrix::Identity(3, 3);
            a0(0, 2) = uniform(rng, -0.5, 0.5);
            a0(1, 0) = uniform(rng, -0.5, 0.5);
            const auto model = EvolutionModel::dense(1.0, 3, {{TimeFn::constant(1.0), a0}},
                                                     {{TimeFn::constant(1.0), Matrix::Identity(3, 3)}});
            kernels.push_back(std::make_shared<const TransitionKernel>(model, s, t));
        } else {
            const int dim = 2 + m;
            const RandomDiagonal modes = random_modes(rng, dim, false);
            const auto model = EvolutionModel::diagonal(1.0, modes.a, modes.b);
            kernels.push_back(std::make_shared<const TransitionKernel>(model, s, t));
        }
    }
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto& kernel = kernels[static_cast<std::size_t>(trial) % kernels.size()];
        const int dim = kernel->dim();
        const int order = 1 + trial % 4;
        std::vector<Vector> dirs;
        for (int i = 0; i < order; ++i) dirs.push_back(random_vector(rng, dim, -1.0, 1.0));
        const SmoothingContext ctx(kernel, dirs, 0);
        Vector g(dim);
        for (int i = 0; i < dim; ++i) g[i] = z(rng);
        const Vector y = kernel->cov().sqrt_apply(g);
        std::vector<double> values;
        for (const auto& f : ctx.functionals()) values.push_back(f(y));
        const unsigned mask = (1u << order) - 1u;
        worst = std::max(worst, std::abs(ctx.in_eval(y) - oracle::in_pairing_expansion(values, ctx.pairing(), mask)));
    }
    return {worst <= 1e-12, "max |recursion - pairing expansion| = " + fmt(worst) + " (<= 1e-12)"};
}

double theta_of(const ExponentFit& fit) { return -fit.slope; }

struct ThetaPart {
    std::string label;
    double theta;
    double r2;
    bool pass;
};

ThetaPart theta_part(const std::string& label, const EvolutionModel& model, const DirectionSpace& space,
                     const std::vector<double>& taus, double lo, double hi)
{
    const ExponentFit fit = theta_fit(model, space, 1.0, taus);
    const double th = theta_of(fit);
    return {label, th, fit.r_squared, th >= lo && th <= hi && fit.r_squared >= 0.99};
}

const std::vector<double>& example_taus()
{
    static const auto grid = geometric_grid(1e-6, 1e-3, 9);
    return grid;
}

const std::vector<double>& heat_taus()
{
    static const auto grid = geometric_grid(1e-4, 1e-2, 9);
    return grid;
}

Outcome criterion5()
{
    std::vector<ThetaPart> parts;
    parts.push_back(theta_part("(i)", brownian(4), DirectionSpace::ambient(4), geometric_grid(1e-3, 0.5, 9),
                               0.49, 0.51));
    const auto ex = example1(32);
    parts.push_back(theta_part("(ii)", ex, DirectionSpace::cm_at(ex, 0.0), example_taus(), 0.45, 0.55));
    const auto h64 = heat(64, 0.0);
    for (double alpha : {0.1, 0.25}) {
        parts.push_back(theta_part("(iii) alpha=" + fmt(alpha), h64, DirectionSpace::sobolev(64, 2.0 * alpha),
                                   heat_taus(), 0.5 - alpha - 0.05, 0.5 - alpha + 0.05));
    }
    const double gamma = 0.5;
    parts.push_back(theta_part("(iv)", heat(64, gamma), DirectionSpace::ambient(64), heat_taus(),
                               0.5 + gamma / 2 - 0.05, 0.5 + gamma / 2 + 0.05));
    Outcome out{true, ""};
    for (const auto& p : parts) {
        out.pass = out.pass && p.pass;
        if (!out.detail.empty()) out.detail += "; ";
        out.detail += p.label + " theta = " + fmt(p.theta) + " r2 = " + fmt(p.r2) + (p.pass ? " ok" : " MISS");
    }
    return out;
}

Outcome criterion6()
{
    const auto bm = brownian(2);
    const auto space = DirectionSpace::ambient(2);
    const auto phi = TestFunction::abs_sin(Vector::Unit(2, 0));
    SamplingOptions sampling;
    sampling.budget = 1024;
    EvalParams ridge;
    ridge.method = Method::Ridge;
    Outcome out{true, ""};
    for (int n : {1, 2}) {
        const ExponentFit fit =
            blowup_check(bm, space, phi, n, 1.0, geometric_grid(1e-4, 1e-1, 7), sampling, ridge);
        const double target = -0.5 * n;
        const bool ok = std::abs(fit.slope - target) <= 0.1;
        out.pass = out.pass && ok;
        if (!out.detail.empty()) out.detail += "; ";
        out.detail += "n=" + std::to_string(n) + " slope = " + fmt(fit.slope) + " (target " + fmt(target) +
                      " +- 0.1)" + (ok ? " ok" : " MISS");
    }
    return out;
}

Outcome criterion7()
{
    const auto model = example1(4);
    const auto space = DirectionSpace::cm_at(model, 0.0);
    SchauderOptions options;
    options.sampling.budget = 256;
    const SourceTerm psi{TimeFn::constant(1.0), TestFunction::cosine(Vector::Unit(4, 0))};
    const auto zyg = schauder_report(model, space, 0.5, TestFunction::constant(0.0), psi, 1.0, 0.0,
                                     {0.25, 0.5, 0.75}, options);
    int bounded = 0;
    double worst_growth = 0.0;
    for (const auto& row : zyg.rows) {
        if (row.quantity != "zygmund_growth") continue;
        worst_growth = std::max(worst_growth, row.value);
        if (row.verdict == "bounded") ++bounded;
    }

    const SourceTerm none{TimeFn::constant(0.0), TestFunction::constant(0.0)};
    const Vector l = Vector::Unit(4, 0);
    const auto smooth = schauder_report(model, space, 0.5, TestFunction::cosine(l), none, 1.0, 0.25,
                                        {0.25, 0.5, 0.75, 0.9, 0.99, 0.999}, options);
    // |D^n P phi (h_1..h_n)| <= prod |<U^T l, h_i>| <= |l|_{E*}^n for contractive diagonal U.
    const double dual = space.dual_norm(l);
    double worst_ratio = 0.0;
    int measured = 0;
    for (const auto& row : smooth.rows) {
        if (row.quantity != "sup_norm") continue;
        ++measured;
        const double bound = std::pow(dual, row.order);
        worst_ratio = std::max(worst_ratio, std::isfinite(row.value) ? row.value / bound : INFINITY);
    }
    const bool pass = bounded == 3 && worst_ratio <= 1.0 + 1e-9;
    return {pass, "Zygmund verdict bounded at " + std::to_string(bounded) + "/3 s (max growth " +
                      fmt(worst_growth) + " <= 3); u0 derivative norms over " + std::to_string(measured) +
                      " (s, n) pairs up to D^" + std::to_string(smooth.top_order) +
                      ", max norm / s-independent bound = " + fmt(worst_ratio)};
}

int cli(std::vector<std::string> args, std::ostream& out)
{
    args.insert(args.begin(), "nouk");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    set_worker_threads(1);
    if (code != 0) out << err.str();
    return code;
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("nouk_acceptance_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Outcome criterion8()
{
    std::ostringstream out;
    const int code = cli({"check", "--out", scratch("check").string()}, out);
    std::string failing;
    std::istringstream lines(out.str());
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("check: ", 0) != 0) continue;
        ++rows;
        if (line.rfind("check: FAIL", 0) == 0) failing += " " + line.substr(12);
    }
    return {code == 0 && rows > 0,
            std::to_string(rows) + " invariant rows, exit code " + std::to_string(code) +
                (failing.empty() ? "" : ", failing:" + failing)};
}

Outcome criterion9()
{
    const std::string dir = NOUK_CONFIG_DIR;
    auto text = [&](const std::string& name) { return slurp(fs::path(dir) / name); };
    const std::vector<std::pair<std::string, std::string>> cases{
        {"evolve", text("dense.cfg")},
        {"apply", text("example1.cfg") + "\n[run]\nmethod = mc\nsamples = 16384\nseed = 9\n"},
        {"deriv", text("example1.cfg") + "\n[run]\nmethod = mc\nsamples = 16384\nseed = 9\n"},
        {"mild", text("mild.cfg")},
        {"fit-theta", text("heat.cfg")},
        {"holder", text("ou.cfg")},
        {"zygmund", text("ou.cfg") + "\n[zygmund]\ntarget = apply\ns = 0.5\nt = 1\nbudget = 512\n"},
        {"schauder", text("schauder.cfg")},
        {"check", ""},
    };
    int identical = 0;
    std::string mismatched;
    for (const auto& [command, cfg] : cases) {
        const fs::path base = scratch("det_" + command);
        const fs::path path = base / "input.cfg";
        std::ofstream(path, std::ios::binary) << cfg;
        std::ostringstream log;
        bool same = true;
        for (int repeat = 0; repeat < 2; ++repeat) {
            const fs::path one = base / ("one_" + std::to_string(repeat));
            const fs::path eight = base / ("eight_" + std::to_string(repeat));
            const int a = cli({command, "--config", path.string(), "--out", one.string(), "--threads", "1"}, log);
            const int b = cli({command, "--config", path.string(), "--out", eight.string(), "--threads", "8"}, log);
            if (a != b || (a != 0 && a != 4)) same = false;
            for (const auto& entry : fs::directory_iterator(one)) {
                if (slurp(entry.path()) != slurp(eight / entry.path().filename())) same = false;
                if (repeat == 1 &&
                    slurp(entry.path()) != slurp(base / "one_0" / entry.path().filename())) {
                    same = false;
                }
            }
        }
        if (same) {
            ++identical;
        } else {
            mismatched += " " + command;
        }
    }
    return {identical == static_cast<int>(cases.size()),
            std::to_string(identical) + "/" + std::to_string(cases.size()) +
                " subcommands byte-identical across repeats and 1 vs 8 threads" +
                (mismatched.empty() ? "" : ", differing:" + mismatched)};
}

Outcome criterion10()
{
    const OracleRun doubled = characteristic_run(true);
    const bool oracle_ok = doubled.worst_mc_z <= 4.0 && doubled.worst_gh <= 1e-10;

    const auto ex32 = example1(32);
    const auto ex64 = example1(64);
    const double t32 = theta_of(theta_fit(ex32, DirectionSpace::cm_at(ex32, 0.0), 1.0, example_taus()));
    const double t64 = theta_of(theta_fit(ex64, DirectionSpace::cm_at(ex64, 0.0), 1.0, example_taus()));
    double worst_shift = std::abs(t64 - t32);
    std::string detail = "doubled-N oracle: MC |dev|/SE = " + fmt(doubled.worst_mc_z) + ", GH |dev| = " +
                         fmt(doubled.worst_gh) + "; (ii) theta N=32 -> 64: " + fmt(t32) + " -> " + fmt(t64);
    const auto h64 = heat(64, 0.0);
    const auto h128 = heat(128, 0.0);
    for (double alpha : {0.1, 0.25}) {
        const double a = theta_of(theta_fit(h64, DirectionSpace::sobolev(64, 2 * alpha), 1.0, heat_taus()));
        const double b = theta_of(theta_fit(h128, DirectionSpace::sobolev(128, 2 * alpha), 1.0, heat_taus()));
        worst_shift = std::max(worst_shift, std::abs(b - a));
        detail += "; (iii) alpha=" + fmt(alpha) + " theta N=64 -> 128: " + fmt(a) + " -> " + fmt(b);
    }
    detail += "; max exponent shift = " + fmt(worst_shift) + " (<= 0.02)";
    return {oracle_ok && worst_shift <= 0.02, detail};
}

struct Criterion {
    std::string id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main()
{
    set_worker_threads(1);
    const std::vector<Criterion> criteria{
        {"1", "characteristic-function oracle", 30, criterion1},
        {"2", "Cameron-Martin identity", 10, criterion2},
        {"3", "derivative representations agree", 60, criterion3},
        {"4", "I_n recursion vs pairing expansion", 5, criterion4},
        {"5", "theta exponents", 60, criterion5},
        {"6", "blow-up law for abs_sin", 120, criterion6},
        {"7", "Schauder / Zygmund gain", 120, criterion7},
        {"8", "structural suite", 120, criterion8},
        {"9", "determinism", 30, criterion9},
        {"10", "truncation stability", 0, criterion10},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("threw ") + e.what()};
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.budget_seconds <= 0.0 || seconds <= c.budget_seconds;
        const bool pass = outcome.pass && in_time;
        if (!pass) ++failed;
        std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << " [" << c.name << "] "
                  << outcome.detail << "; " << fmt(seconds) << " s";
        if (c.budget_seconds > 0.0) std::cout << " (<= " << fmt(c.budget_seconds) << " s)";
        std::cout << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria pass" << std::endl;
    return failed == 0 ? 0 : 1;
}
