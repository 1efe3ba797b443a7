#include "nouk/cli.hpp"

#include "nouk/check.hpp"
#include "nouk/error.hpp"
#include "nouk/mild.hpp"
#include "nouk/parallel.hpp"
#include "nouk/regularity.hpp"
#include "nouk/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

namespace nouk {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* const kDefaultModel =
    "[model]\nkind = diagonal\nT = 1\nN = 8\na = preset_ak\nb = preset_bk(2)\n";

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out = ".";
    std::optional<std::string> format;
};

/// Accumulates the resolved configuration with every default made explicit.
class Echo {
public:
    void raw(const std::string& text) { blocks_.push_back({"", text}); }
    std::size_t section(const std::string& name)
    {
        blocks_.push_back({name, ""});
        return blocks_.size() - 1;
    }
    void put(std::size_t block, const std::string& key, const std::string& value)
    {
        blocks_[block].second += key + " = " + value + "\n";
    }
    void lines(std::size_t block, const std::string& text) { blocks_[block].second += text; }

    std::string text() const
    {
        std::string out;
        for (const auto& [name, body] : blocks_) {
            if (!out.empty()) out += "\n";
            out += name.empty() ? body : "[" + name + "]\n" + body;
        }
        return out;
    }

private:
    std::vector<std::pair<std::string, std::string>> blocks_;
};

/// Typed lookups on an optional section; every value read is echoed.
class Reader {
public:
    Reader(const ConfigDocument& doc, const std::string& name, std::set<std::string> keys, Echo& echo)
        : section_(doc.section(name)), echo_(echo)
    {
        if (doc.all(name).size() > 1) fail(ErrorKind::Validation, "duplicate [" + name + "] section");
        if (section_) section_->require_known_keys(keys);
        block_ = echo_.section(name);
    }

    void put(const std::string& key, const std::string& value) { echo_.put(block_, key, value); }

    bool has(const std::string& key) const { return section_ && section_->has(key); }

    double number(const std::string& key, double fallback)
    {
        const double v = section_ ? section_->get_double(key, fallback) : fallback;
        put(key, format_double(v));
        return v;
    }
    long long integer(const std::string& key, long long fallback)
    {
        const long long v = section_ ? section_->get_int(key, fallback) : fallback;
        put(key, std::to_string(v));
        return v;
    }
    std::string text(const std::string& key, const std::string& fallback)
    {
        const std::string v = section_ ? section_->get_string(key, fallback) : fallback;
        put(key, v);
        return v;
    }
    Vector vector(const std::string& key, const Vector& fallback)
    {
        Vector v = fallback;
        if (has(key)) {
            const auto* e = section_->find(key);
            v = parse_vector(e->value, e->line);
        }
        put(key, format_vector(v));
        return v;
    }
    std::optional<Matrix> matrix(const std::string& key)
    {
        if (!has(key)) return std::nullopt;
        const auto* e = section_->find(key);
        Matrix m = parse_matrix(e->value, e->line);
        put(key, format_matrix(m));
        return m;
    }
    bool flag(const std::string& key, bool fallback)
    {
        bool v = fallback;
        if (has(key)) {
            const std::string s = section_->get_string(key);
            if (s == "true" || s == "1") v = true;
            else if (s == "false" || s == "0") v = false;
            else fail(ErrorKind::Validation, "'" + key + "' must be true or false", section_->find(key)->line);
        }
        put(key, v ? "true" : "false");
        return v;
    }

private:
    const ConfigSection* section_;
    Echo& echo_;
    std::size_t block_ = 0;
};

std::string test_function_body(const TestFunction& phi)
{
    std::ostringstream out;
    switch (phi.kind()) {
    case TestFunction::Kind::Constant:
        out << "kind = constant\nc = " << format_double(phi.constant_value()) << "\n";
        break;
    case TestFunction::Kind::Cosine:
        out << "kind = cosine\nl = " << format_vector(phi.direction())
            << "\nphase = " << format_double(phi.phase()) << "\n";
        break;
    case TestFunction::Kind::TanhLinear:
        out << "kind = tanh_linear\nl = " << format_vector(phi.direction()) << "\n";
        break;
    case TestFunction::Kind::AbsSin:
        out << "kind = abs_sin\nl = " << format_vector(phi.direction()) << "\n";
        break;
    case TestFunction::Kind::Separable: {
        out << "kind = separable\nfactors = [";
        bool first = true;
        for (const auto& f : phi.factors()) {
            if (!first) out << ", ";
            first = false;
            switch (f.kind) {
            case Factor1d::Kind::One: out << "one"; break;
            case Factor1d::Kind::Cos:
                out << "cos(" << format_double(f.freq) << ", " << format_double(f.phase) << ")";
                break;
            case Factor1d::Kind::Tanh:
                out << "tanh(" << format_double(f.freq) << ", " << format_double(f.phase) << ")";
                break;
            case Factor1d::Kind::AbsSin:
                out << "abs_sin(" << format_double(f.freq) << ", " << format_double(f.phase) << ")";
                break;
            }
        }
        out << "]\n";
        break;
    }
    }
    return out.str();
}

const std::set<std::string> kFunctionKeys{"kind", "c", "l", "phase", "factors"};

struct Run {
    std::string command;
    ConfigDocument doc;
    EvolutionModel model;
    Echo echo;
    EvalParams params;
    ReportFormat format = ReportFormat::Csv;
    json summary = json::object();
    std::ostream& out;

    int dim() const { return model.dim(); }
};

EvolutionModel read_model(const ConfigDocument& doc)
{
    return doc.section("model") ? load_model(doc) : load_model(kDefaultModel);
}

TestFunction read_phi(Run& run, const TestFunction& fallback)
{
    const ConfigSection* section = run.doc.section("phi");
    TestFunction phi = fallback;
    if (section) {
        section->require_known_keys(kFunctionKeys);
        phi = parse_test_function(*section, run.dim());
    }
    run.echo.lines(run.echo.section("phi"), test_function_body(phi));
    return phi;
}

SourceTerm read_psi(Run& run)
{
    const ConfigSection* section = run.doc.section("psi");
    SourceTerm psi{TimeFn::constant(0.0), TestFunction::constant(0.0)};
    if (section) {
        auto keys = kFunctionKeys;
        keys.insert("rho");
        section->require_known_keys(keys);
        psi = parse_source_term(*section, run.dim());
    }
    const std::size_t block = run.echo.section("psi");
    run.echo.put(block, "rho", psi.rho.to_string());
    run.echo.lines(block, test_function_body(psi.phi));
    return psi;
}

std::optional<DirectionSpace> read_space(Run& run, bool required)
{
    const ConfigSection* section = run.doc.section("space");
    if (!section && !required) return std::nullopt;
    Reader r(run.doc, "space", {"preset", "param", "weights"}, run.echo);
    const std::string preset = r.text("preset", "ambient");
    if (preset == "weighted") {
        return DirectionSpace::weighted(r.vector("weights", Vector::Ones(run.dim())), "weighted");
    }
    const double param = r.number("param", 0.0);
    return direction_space(preset, run.model, param);
}

void require_times(const EvolutionModel& model, double s, double t)
{
    if (t < s) fail(ErrorKind::Validation, "require s <= t");
    if (s < 0.0 || t > model.horizon()) {
        fail(ErrorKind::Validation, "require 0 <= s <= t <= T");
    }
}

std::vector<Vector> read_points(Reader& r, int dim)
{
    std::vector<Vector> rows;
    if (auto m = r.matrix("points")) {
        for (Eigen::Index i = 0; i < m->rows(); ++i) rows.push_back(m->row(i).transpose());
    } else {
        rows.push_back(r.vector("x", Vector::Zero(dim)));
    }
    // Shorter points are zero-padded, like directions.
    std::vector<Vector> points;
    for (const auto& p : rows) {
        if (p.size() > dim) fail(ErrorKind::Validation, "evaluation point longer than N");
        Vector x = Vector::Zero(dim);
        x.head(p.size()) = p;
        points.push_back(x);
    }
    return points;
}

std::vector<Vector> read_directions(Reader& r, int dim)
{
    std::vector<Vector> dirs;
    if (auto m = r.matrix("directions")) {
        for (Eigen::Index i = 0; i < m->rows(); ++i) {
            Vector h = Vector::Zero(dim);
            if (m->cols() > dim) fail(ErrorKind::Validation, "direction longer than N");
            h.head(m->cols()) = m->row(i).transpose();
            dirs.push_back(h);
        }
    }
    return dirs;
}

SamplingOptions read_sampling(Reader& r, int dim, std::uint64_t seed)
{
    SamplingOptions o;
    o.seed = seed;
    o.budget = static_cast<int>(r.integer("budget", o.budget));
    o.h_min = r.number("h_min", o.h_min);
    o.h_max = r.number("h_max", o.h_max);
    o.scales = static_cast<int>(r.integer("scales", o.scales));
    o.refine_steps = static_cast<int>(r.integer("refine_steps", o.refine_steps));
    o.lower = r.vector("lower", Vector::Constant(dim, -3.0));
    o.upper = r.vector("upper", Vector::Constant(dim, 3.0));
    o.directions = read_directions(r, dim);
    return o;
}

QuadSpec read_quad(Reader& r)
{
    QuadSpec q;
    q.panels = static_cast<int>(r.integer("panels", q.panels));
    q.ratio = r.number("ratio", q.ratio);
    q.nodes = static_cast<int>(r.integer("nodes", q.nodes));
    q.uniform = r.flag("uniform", q.uniform);
    q.validate();
    return q;
}

double closed_form_oracle(const EvolutionModel& model, const TestFunction& phi, double s, double t,
                          const Vector& x)
{
    if (phi.kind() == TestFunction::Kind::Constant) return phi.constant_value();
    if (phi.kind() != TestFunction::Kind::Cosine) return kNaN;
    const Vector m = mean(model, s, t, x);
    const double var = covariance(model, s, t).quadratic(phi.direction());
    return std::cos(phi.direction().dot(m) + phi.phase()) * std::exp(-0.5 * var);
}

Table evolve(Run& run)
{
    Reader r(run.doc, "evolve", {"s", "t", "x"}, run.echo);
    const double s = r.number("s", 0.0);
    const double t = r.number("t", run.model.horizon());
    std::optional<Vector> x;
    if (r.has("x")) x = r.vector("x", Vector::Zero(run.dim()));
    const auto space = read_space(run, false);
    require_times(run.model, s, t);
    if (x && x->size() != run.dim()) fail(ErrorKind::Validation, "x needs N entries");

    const Propagator u = transition(run.model, s, t);
    const Vector shift = affine_shift(run.model, s, t);
    const Covariance q = covariance(run.model, s, t);
    const int n = run.dim();
    Table table;
    table.columns = {"k"};
    if (u.is_diagonal()) {
        table.columns.push_back("u");
    } else {
        for (int j = 1; j <= n; ++j) table.columns.push_back("u_" + std::to_string(j));
    }
    table.columns.push_back(q.is_diagonal() ? "q" : "q_eigenvalue");
    table.columns.push_back("shift");
    if (x) table.columns.push_back("mean");
    const Matrix um = u.is_diagonal() ? Matrix() : u.matrix();
    const Vector m = x ? Vector(u.apply(*x) + shift) : Vector();
    for (int k = 0; k < n; ++k) {
        std::vector<Cell> row{static_cast<long long>(k + 1)};
        if (u.is_diagonal()) {
            row.emplace_back(u.multipliers()[k]);
        } else {
            for (int j = 0; j < n; ++j) row.emplace_back(um(k, j));
        }
        row.emplace_back(q.eigenvalues()[k]);
        row.emplace_back(shift[k]);
        if (x) row.emplace_back(m[k]);
        table.add_row(std::move(row));
    }
    run.summary["trace"] = q.trace();
    run.summary["rank"] = q.rank();
    run.out << "evolve: N = " << n << ", trace Q = " << format_double(q.trace())
            << ", rank = " << q.rank() << "\n";
    if (space) {
        const LambdaOperator lambda = lambda_operator(run.model, *space, s, t);
        run.summary["lambda_norm"] = lambda.norm;
        run.summary["space"] = space->label();
        run.out << "evolve: ||Lambda||_{L(E,X)} = " << format_double(lambda.norm) << " (E = "
                << space->label() << ")\n";
    }
    return table;
}

Table apply_cmd(Run& run)
{
    Reader r(run.doc, "apply", {"s", "t", "x", "points"}, run.echo);
    const double s = r.number("s", 0.0);
    const double t = r.number("t", run.model.horizon());
    const auto points = read_points(r, run.dim());
    const TestFunction phi = read_phi(run, TestFunction::cosine(Vector::Unit(run.dim(), 0)));
    require_times(run.model, s, t);
    Table table;
    table.columns = {"point", "x", "value", "uncertainty", "method", "n_samples", "oracle", "deviation"};
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const EvalReport rep = apply(run.model, phi, s, t, points[i], run.params);
        const double oracle = closed_form_oracle(run.model, phi, s, t, points[i]);
        const double dev = std::abs(rep.value - oracle);
        if (std::isfinite(dev)) worst = std::max(worst, dev);
        table.add_row({static_cast<long long>(i), format_vector(points[i]), rep.value,
                       rep.uncertainty, std::string(to_string(rep.method)), rep.n_samples, oracle, dev});
    }
    run.summary["max_deviation"] = worst;
    run.out << "apply: " << points.size() << " point(s), max |value - oracle| = "
            << format_double(worst) << "\n";
    return table;
}

Table deriv_cmd(Run& run)
{
    Reader r(run.doc, "deriv", {"s", "t", "x", "points", "directions", "transported", "fd"}, run.echo);
    const double s = r.number("s", 0.0);
    const double t = r.number("t", run.model.horizon());
    const auto points = read_points(r, run.dim());
    const auto dirs = read_directions(r, run.dim());
    const int transported = static_cast<int>(r.integer("transported", -1));
    const TestFunction phi = read_phi(run, TestFunction::cosine(Vector::Unit(run.dim(), 0)));
    const bool fd = r.flag("fd", phi.has_closed_form_expectation());
    const DirectionSpace space = *read_space(run, true);
    require_times(run.model, s, t);
    if (dirs.empty()) fail(ErrorKind::Validation, "[deriv] needs directions");
    if (transported > static_cast<int>(dirs.size())) {
        fail(ErrorKind::Validation, "transported order exceeds the number of directions");
    }
    const int k = transported >= 0 ? transported
                                   : std::min(static_cast<int>(dirs.size()), phi.analytic_order());
    Table table;
    table.columns = {"point", "x", "value", "uncertainty", "method", "transported", "fd", "deviation"};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const EvalReport rep =
            mixed_derivative(run.model, space, phi, s, t, points[i], dirs, k, run.params);
        double fd_value = kNaN;
        if (fd) {
            if (!phi.has_closed_form_expectation()) {
                fail(ErrorKind::MethodUnavailable, "fd oracle needs a closed-form expectation");
            }
            fd_value = fd_derivative(
                           [&](const Vector& z) { return closed_form_oracle(run.model, phi, s, t, z); },
                           points[i], dirs)
                           .value;
        }
        table.add_row({static_cast<long long>(i), format_vector(points[i]), rep.value,
                       rep.uncertainty, std::string(to_string(rep.method)),
                       static_cast<long long>(k), fd_value, std::abs(rep.value - fd_value)});
    }
    run.out << "deriv: order " << dirs.size() << " (" << k << " transported) at "
            << points.size() << " point(s)\n";
    return table;
}

Table mild_cmd(Run& run)
{
    Reader r(run.doc, "mild",
             {"s", "t", "x", "points", "directions", "theta", "panels", "ratio", "nodes", "uniform"},
             run.echo);
    const double s = r.number("s", 0.0);
    const double t = r.number("t", run.model.horizon());
    const auto points = read_points(r, run.dim());
    const auto dirs = read_directions(r, run.dim());
    const double theta = r.number("theta", 0.5);
    const QuadSpec quad = read_quad(r);
    const TestFunction phi = read_phi(run, TestFunction::constant(0.0));
    const SourceTerm psi = read_psi(run);
    const DirectionSpace space =
        read_space(run, false).value_or(DirectionSpace::ambient(run.dim()));
    require_times(run.model, s, t);
    const MildSolver solver(run.model, space, phi, psi, s, t, quad, run.params);
    Table table;
    table.columns = {"point", "x", "u0", "u1", "value", "uncertainty"};
    if (!dirs.empty()) {
        table.columns.push_back("derivative");
        table.columns.push_back("derivative_uncertainty");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const EvalReport a = solver.u0(points[i]);
        const EvalReport b = solver.u1(points[i]);
        std::vector<Cell> row{static_cast<long long>(i), format_vector(points[i]), a.value, b.value,
                              a.value + b.value, a.uncertainty + b.uncertainty};
        if (!dirs.empty()) {
            const EvalReport d = solver.derivative(points[i], dirs, theta);
            row.emplace_back(d.value);
            row.emplace_back(d.uncertainty);
        }
        table.add_row(std::move(row));
    }
    run.out << "mild: " << points.size() << " point(s) on [" << format_double(s) << ", "
            << format_double(t) << "]\n";
    return table;
}

Table fit_theta_cmd(Run& run)
{
    Reader r(run.doc, "fit_theta", {"t", "tau_min", "tau_max", "points"}, run.echo);
    const double t = r.number("t", run.model.horizon());
    const double tau_min = r.number("tau_min", 1e-3 * t);
    const double tau_max = r.number("tau_max", 1e-1 * t);
    const int count = static_cast<int>(r.integer("points", 9));
    const DirectionSpace space = *read_space(run, true);
    require_times(run.model, 0.0, t);
    const auto grid = geometric_grid(tau_min, tau_max, count);
    const ExponentFit fit = theta_fit(run.model, space, t, grid);
    Table table;
    table.columns = {"tau", "lambda_norm", "log_tau", "log_norm", "residual"};
    for (std::size_t i = 0; i < grid.size(); ++i) {
        table.add_row({grid[i], std::exp(fit.log_y[i]), fit.log_x[i], fit.log_y[i], fit.residuals[i]});
    }
    run.summary["theta"] = -fit.slope;
    run.summary["slope"] = fit.slope;
    run.summary["intercept"] = fit.intercept;
    run.summary["r_squared"] = fit.r_squared;
    run.summary["tau_grid"] = grid;
    run.out << "fit-theta: theta = " << format_double(-fit.slope)
            << ", r^2 = " << format_double(fit.r_squared) << " over " << grid.size()
            << " points in [" << format_double(tau_min) << ", " << format_double(tau_max) << "]\n";
    return table;
}

struct Target {
    ScalarField field;
    std::shared_ptr<MildSolver> solver;
};

Target read_target(Run& run, Reader& r)
{
    const std::string target = r.text("target", "phi");
    const double s = r.number("s", 0.0);
    const double t = r.number("t", run.model.horizon());
    const TestFunction phi = read_phi(run, TestFunction::cosine(Vector::Unit(run.dim(), 0)));
    if (target == "phi") {
        return {[phi](const Vector& x) { return phi(x); }, nullptr};
    }
    require_times(run.model, s, t);
    if (target == "apply") {
        const EvolutionModel model = run.model;
        const EvalParams params = run.params;
        return {[model, phi, s, t, params](const Vector& x) {
                    return apply(model, phi, s, t, x, params).value;
                },
                nullptr};
    }
    if (target == "mild") {
        const SourceTerm psi = read_psi(run);
        auto solver = std::make_shared<MildSolver>(run.model, DirectionSpace::ambient(run.dim()),
                                                   phi, psi, s, t, QuadSpec{}, run.params);
        return {[solver](const Vector& x) { return solver->value(x).value; }, solver};
    }
    fail(ErrorKind::Validation, "target must be phi, apply or mild");
}

Table seminorm_cmd(Run& run, bool zygmund)
{
    std::set<std::string> keys{"target", "s", "t", "budget", "h_min", "h_max", "scales",
                               "refine_steps", "lower", "upper", "directions"};
    if (!zygmund) keys.insert("alpha");
    Reader r(run.doc, zygmund ? "zygmund" : "holder", keys, run.echo);
    const double alpha = zygmund ? 1.0 : r.number("alpha", 1.0);
    const SamplingOptions options = read_sampling(r, run.dim(), run.params.seed);
    const Target target = read_target(run, r);
    const DirectionSpace space =
        read_space(run, false).value_or(DirectionSpace::ambient(run.dim()));
    const SeminormEstimate est = zygmund ? zygmund_seminorm(target.field, space, options)
                                         : holder_seminorm(target.field, space, alpha, options);
    Table table;
    table.columns = {"budget", "value", "witness_x", "witness_h", "h_norm"};
    table.add_row({static_cast<long long>(est.budget), est.value, format_vector(est.x),
                   format_vector(est.h), space.norm(est.h)});
    run.summary["value"] = est.value;
    run.out << run.command << ": estimate " << format_double(est.value) << " (lower bound, budget "
            << est.budget << ")\n";
    return table;
}

Table schauder_cmd(Run& run)
{
    Reader r(run.doc, "schauder",
             {"theta", "alpha", "t", "s", "n_max", "budget", "h_min", "h_max", "scales",
              "refine_steps", "lower", "upper", "directions", "r_min", "r_max", "r_points",
              "panels", "ratio", "nodes", "uniform"},
             run.echo);
    SchauderOptions o;
    const double theta = r.number("theta", 0.5);
    const double alpha = r.number("alpha", 0.0);
    const double t = r.number("t", run.model.horizon());
    const Vector s_grid = r.vector("s", Vector{{0.25 * t, 0.5 * t, 0.75 * t}});
    o.n_max = static_cast<int>(r.integer("n_max", -1));
    o.sampling = read_sampling(r, run.dim(), run.params.seed);
    o.r_min = r.number("r_min", o.r_min);
    o.r_max = r.number("r_max", o.r_max);
    o.r_points = static_cast<int>(r.integer("r_points", o.r_points));
    o.quad = read_quad(r);
    o.params = run.params;
    const TestFunction phi = read_phi(run, TestFunction::constant(0.0));
    const SourceTerm psi = read_psi(run);
    const DirectionSpace space = *read_space(run, true);
    std::vector<double> grid(s_grid.data(), s_grid.data() + s_grid.size());
    for (double s : grid) require_times(run.model, s, t);
    const SchauderReport rep =
        schauder_report(run.model, space, theta, phi, psi, t, alpha, grid, o);
    Table table;
    table.columns = {"s", "order", "quantity", "radius", "value", "expected", "verdict"};
    for (const auto& row : rep.rows) {
        table.add_row({row.s, static_cast<long long>(row.order), row.quantity, row.radius,
                       row.value, row.expected, row.verdict});
        if (row.quantity == "zygmund_growth" || row.quantity == "modulus_exponent") {
            run.out << "schauder: s = " << format_double(row.s) << " D^" << row.order << " "
                    << row.quantity << " = " << format_double(row.value) << " (" << row.verdict
                    << ")\n";
        }
    }
    run.summary["zygmund_case"] = rep.zygmund_case;
    run.summary["top_order"] = rep.top_order;
    return table;
}

Table check_cmd(Run& run, bool& failed)
{
    Reader r(run.doc, "check",
             {"in_trials", "cm_trials", "cm_samples", "gramian_grid", "sde_paths", "sde_steps"},
             run.echo);
    CheckOptions o;
    o.seed = run.params.seed;
    o.in_trials = static_cast<int>(r.integer("in_trials", o.in_trials));
    o.cm_trials = static_cast<int>(r.integer("cm_trials", o.cm_trials));
    o.cm_samples = static_cast<int>(r.integer("cm_samples", o.cm_samples));
    o.gramian_grid = static_cast<int>(r.integer("gramian_grid", o.gramian_grid));
    o.sde_paths = static_cast<int>(r.integer("sde_paths", o.sde_paths));
    o.sde_steps = static_cast<int>(r.integer("sde_steps", o.sde_steps));
    const TestFunction phi = read_phi(run, TestFunction::cosine(Vector::Unit(run.dim(), 0)));
    const auto rows = run_checks(run.model, phi, o);
    Table table;
    table.columns = {"name", "value", "tolerance", "status", "detail"};
    for (const auto& row : rows) {
        table.add_row({row.name, row.value, row.tolerance, std::string(row.pass ? "pass" : "fail"),
                       row.detail});
        run.out << "check: " << (row.pass ? "pass " : "FAIL ") << row.name << " "
                << format_double(row.value) << " <= " << format_double(row.tolerance) << "\n";
    }
    failed = !all_pass(rows);
    run.summary["all_pass"] = !failed;
    return table;
}

const std::set<std::string> kCommandSections{"evolve", "apply", "deriv", "mild", "fit_theta",
                                              "holder", "zygmund", "schauder", "check"};

int execute(const std::string& command, const Flags& flags, std::ostream& out)
{
    std::string text;
    if (!flags.config.empty()) {
        std::ifstream in(flags.config, std::ios::binary);
        if (!in) fail(ErrorKind::Validation, "cannot read config " + flags.config);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        text = buffer.str();
    }
    ConfigDocument doc = ConfigDocument::parse(text);
    std::set<std::string> allowed{"model", "drift", "diffusion", "run", "space", "phi", "psi"};
    allowed.insert(kCommandSections.begin(), kCommandSections.end());
    doc.require_known_sections(allowed);

    Run run{command, doc, read_model(doc), {}, {}, ReportFormat::Csv, json::object(), out};
    run.echo.raw(run.model.to_config());
    {
        Reader r(doc, "run", {"seed", "method", "samples", "nodes", "format"}, run.echo);
        const long long cfg_seed = r.has("seed") ? doc.section("run")->get_int("seed") : 0;
        if (cfg_seed < 0) fail(ErrorKind::Validation, "seed must be non-negative");
        run.params.seed = flags.seed.value_or(static_cast<std::uint64_t>(cfg_seed));
        r.put("seed", std::to_string(run.params.seed));
        run.params.method = parse_method(r.text("method", "auto"));
        run.params.samples = static_cast<int>(r.integer("samples", run.params.samples));
        run.params.nodes = static_cast<int>(r.integer("nodes", run.params.nodes));
        const std::string cfg_format = r.has("format") ? doc.section("run")->get_string("format") : "csv";
        run.format = parse_report_format(flags.format.value_or(cfg_format));
        r.put("format", to_string(run.format));
        if (run.params.samples < 2) fail(ErrorKind::Validation, "samples must be >= 2");
    }

    bool failed = false;
    Table table;
    if (command == "evolve") table = evolve(run);
    else if (command == "apply") table = apply_cmd(run);
    else if (command == "deriv") table = deriv_cmd(run);
    else if (command == "mild") table = mild_cmd(run);
    else if (command == "fit-theta") table = fit_theta_cmd(run);
    else if (command == "holder") table = seminorm_cmd(run, false);
    else if (command == "zygmund") table = seminorm_cmd(run, true);
    else if (command == "schauder") table = schauder_cmd(run);
    else if (command == "check") table = check_cmd(run, failed);
    else fail(ErrorKind::Validation, "unknown subcommand '" + command + "'");

    json meta;
    meta["command"] = command;
    meta["seed"] = run.params.seed;
    meta["format"] = to_string(run.format);
    meta["resolved_config"] = run.echo.text();
    meta["summary"] = run.summary;
    meta["versions"] = versions();
    const auto written = write_report(flags.out, command, table, run.format, meta, run.echo.text());
    for (const auto& path : written) out << "wrote " << path.string() << "\n";
    return failed ? 4 : 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Time-dependent Ornstein-Uhlenbeck evolution operators", "nouk"};
    app.require_subcommand(1, 1);
    Flags flags;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string format;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"evolve", "U(t,s), g(t,s), Q(t,s) and Lambda norms"},
        {"apply", "P_{s,t} phi at points"},
        {"deriv", "directional derivatives of P_{s,t} phi"},
        {"mild", "mild solution u(s,.) of the backward Kolmogorov problem"},
        {"fit-theta", "blow-up exponent of ||Lambda(t,s)||"},
        {"holder", "Hoelder seminorm estimate"},
        {"zygmund", "Zygmund seminorm estimate"},
        {"schauder", "Schauder / Zygmund regularity report"},
        {"check", "structural invariant suite"},
    };
    std::map<std::string, CLI::App*> subs;
    std::map<std::string, std::array<CLI::Option*, 3>> optional_opts;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "config file");
        auto* seed_opt = sub->add_option("--seed", seed, "random seed");
        auto* threads_opt = sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out", flags.out, "output directory");
        auto* format_opt = sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        subs[name] = sub;
        optional_opts[name] = {seed_opt, threads_opt, format_opt};
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    std::string command;
    for (const auto& [name, sub] : subs) {
        if (sub->parsed()) command = name;
    }
    const auto& opts = optional_opts[command];
    if (opts[0]->count()) flags.seed = seed;
    if (opts[2]->count()) flags.format = format;
    if (opts[1]->count()) {
        flags.threads = threads;
    } else if (const char* env = std::getenv("NOUK_THREADS")) {
        try {
            flags.threads = std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            err << "error: NOUK_THREADS must be a positive integer\n";
            return 2;
        }
    }
    set_worker_threads(flags.threads.value_or(1));

    try {
        return execute(command, flags, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.is_config_error() ? 2 : 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace nouk
