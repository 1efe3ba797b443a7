#include "nouk/model.hpp"

#include "nouk/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace nouk {

const char* to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::Diagonal: return "diagonal";
    case ModelKind::ScalarIdentity: return "scalar_identity";
    case ModelKind::Dense: return "dense";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// EvolutionModel

EvolutionModel EvolutionModel::diagonal(double horizon, std::vector<TimeFn> a,
                                        std::vector<TimeFn> b, std::vector<TimeFn> f)
{
    EvolutionModel m;
    m.kind_ = ModelKind::Diagonal;
    m.horizon_ = horizon;
    m.dim_ = static_cast<int>(b.size());
    m.a_ = std::move(a);
    m.b_ = std::move(b);
    m.f_ = std::move(f);
    m.validate();
    return m;
}

EvolutionModel EvolutionModel::scalar_identity(double horizon, TimeFn a, std::vector<TimeFn> b,
                                               std::vector<TimeFn> f)
{
    EvolutionModel m;
    m.kind_ = ModelKind::ScalarIdentity;
    m.horizon_ = horizon;
    m.dim_ = static_cast<int>(b.size());
    m.a_ = {std::move(a)};
    m.b_ = std::move(b);
    m.f_ = std::move(f);
    m.validate();
    return m;
}

EvolutionModel EvolutionModel::dense(double horizon, int dim, std::vector<DenseTerm> drift,
                                     std::vector<DenseTerm> diffusion, std::vector<TimeFn> f)
{
    EvolutionModel m;
    m.kind_ = ModelKind::Dense;
    m.horizon_ = horizon;
    m.dim_ = dim;
    m.drift_terms_ = std::move(drift);
    m.diffusion_terms_ = std::move(diffusion);
    m.f_ = std::move(f);
    m.validate();
    return m;
}

void EvolutionModel::validate() const
{
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
        fail(ErrorKind::Validation, "horizon T must be positive");
    }
    if (dim_ < 1) fail(ErrorKind::Validation, "truncation dimension N must be >= 1");
    if (!f_.empty() && static_cast<int>(f_.size()) != dim_) {
        fail(ErrorKind::Validation, "affine term f needs N entries or none");
    }
    switch (kind_) {
    case ModelKind::Diagonal:
        if (b_.empty()) fail(ErrorKind::Validation, "diagonal model needs a non-empty b list");
        if (a_.size() != b_.size()) {
            fail(ErrorKind::Validation, "diagonal model needs as many a_k as b_k");
        }
        break;
    case ModelKind::ScalarIdentity:
        if (b_.empty()) {
            fail(ErrorKind::Validation, "scalar_identity model needs a non-empty b list");
        }
        if (a_.size() != 1) fail(ErrorKind::Validation, "scalar_identity model needs one a(t)");
        break;
    case ModelKind::Dense:
        if (drift_terms_.empty() && diffusion_terms_.empty()) {
            fail(ErrorKind::Validation, "dense model needs drift or diffusion terms");
        }
        for (const auto& term : drift_terms_) {
            if (term.matrix.rows() != dim_ || term.matrix.cols() != dim_) {
                fail(ErrorKind::Validation, "dense drift matrices must be N x N");
            }
        }
        for (const auto& term : diffusion_terms_) {
            if (term.matrix.rows() != dim_ || term.matrix.cols() != dim_) {
                fail(ErrorKind::Validation, "dense diffusion matrices must be N x N");
            }
        }
        break;
    }
}

const TimeFn& EvolutionModel::drift_coefficient(int k) const
{
    if (kind_ == ModelKind::Dense) fail(ErrorKind::Internal, "dense model has no mode drift");
    return kind_ == ModelKind::ScalarIdentity ? a_.front() : a_.at(static_cast<std::size_t>(k));
}

const TimeFn& EvolutionModel::diffusion_coefficient(int k) const
{
    if (kind_ == ModelKind::Dense) {
        fail(ErrorKind::Internal, "dense model has no mode diffusion");
    }
    return b_.at(static_cast<std::size_t>(k));
}

double EvolutionModel::affine(int k, double t) const
{
    return f_.empty() ? 0.0 : f_[static_cast<std::size_t>(k)](t);
}

Matrix EvolutionModel::drift(double t) const
{
    Matrix out = Matrix::Zero(dim_, dim_);
    if (kind_ == ModelKind::Dense) {
        for (const auto& term : drift_terms_) out += term.fn(t) * term.matrix;
    } else {
        for (int k = 0; k < dim_; ++k) out(k, k) = drift_coefficient(k)(t);
    }
    return out;
}

Matrix EvolutionModel::diffusion(double t) const
{
    Matrix out = Matrix::Zero(dim_, dim_);
    if (kind_ == ModelKind::Dense) {
        for (const auto& term : diffusion_terms_) out += term.fn(t) * term.matrix;
    } else {
        for (int k = 0; k < dim_; ++k) out(k, k) = b_[static_cast<std::size_t>(k)](t);
    }
    return out;
}

Vector EvolutionModel::affine(double t) const
{
    Vector out = Vector::Zero(dim_);
    for (std::size_t k = 0; k < f_.size(); ++k) out(static_cast<Eigen::Index>(k)) = f_[k](t);
    return out;
}

double EvolutionModel::diffusion_bound() const
{
    constexpr int samples = 1025;
    double bound = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double t = horizon_ * i / (samples - 1);
        if (kind_ == ModelKind::Dense) {
            Eigen::JacobiSVD<Matrix> svd(diffusion(t));
            bound = std::max(bound, svd.singularValues()(0));
        } else {
            for (const auto& b : b_) bound = std::max(bound, std::abs(b(t)));
        }
    }
    return bound;
}

double EvolutionModel::summability_diagnostic() const
{
    if (kind_ == ModelKind::Dense) return std::numeric_limits<double>::quiet_NaN();
    constexpr int samples = 1025;
    double total = 0.0;
    for (int k = 0; k < dim_; ++k) {
        double lambda = -std::numeric_limits<double>::infinity();
        double b_sup = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double t = horizon_ * i / (samples - 1);
            lambda = std::max(lambda, drift_coefficient(k)(t));
            b_sup = std::max(b_sup, std::abs(b_[static_cast<std::size_t>(k)](t)));
        }
        if (lambda != 0.0) total += b_sup * b_sup / std::abs(lambda);
    }
    return total;
}

namespace {

std::string fn_list(const std::vector<TimeFn>& fns)
{
    std::string out = "[";
    for (std::size_t i = 0; i < fns.size(); ++i) {
        if (i) out += ", ";
        out += fns[i].to_string();
    }
    return out + "]";
}

}  // namespace

std::string EvolutionModel::to_config() const
{
    std::string out = "[model]\n";
    out += "kind = " + std::string(nouk::to_string(kind_)) + "\n";
    out += "T = " + format_double(horizon_) + "\n";
    out += "N = " + std::to_string(dim_) + "\n";
    if (kind_ == ModelKind::Diagonal) {
        out += "a = " + fn_list(a_) + "\n";
        out += "b = " + fn_list(b_) + "\n";
    } else if (kind_ == ModelKind::ScalarIdentity) {
        out += "a = " + a_.front().to_string() + "\n";
        out += "b = " + fn_list(b_) + "\n";
    }
    out += "f = " + (f_.empty() ? std::string("zero") : fn_list(f_)) + "\n";
    for (const auto& term : drift_terms_) {
        out += "\n[drift]\nfn = " + term.fn.to_string() + "\nmatrix = " +
               format_matrix(term.matrix) + "\n";
    }
    for (const auto& term : diffusion_terms_) {
        out += "\n[diffusion]\nfn = " + term.fn.to_string() + "\nmatrix = " +
               format_matrix(term.matrix) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config loading

namespace {

// Expands a per-mode generator (`preset_ak`, `preset_bk(c)`, `preset_heat`,
// `pi_power(p)`), a broadcast TimeFn, or an explicit `[f1, f2, ...]` list.
std::vector<TimeFn> mode_list(const std::string& raw, int dim, int line)
{
    const std::string text = trim(raw);
    std::vector<TimeFn> out;
    try {
        if (text.front() == '[') {
            for (const auto& item : split_list(text, line)) out.push_back(TimeFn::parse(item));
            return out;
        }
        const auto call = parse_call(text, line);
        if (call.name == "preset_ak" || call.name == "preset_heat") {
            if (!call.args.empty()) {
                fail(ErrorKind::Validation, call.name + " takes no arguments", line);
            }
            for (int k = 1; k <= dim; ++k) {
                out.push_back(call.name == "preset_ak" ? TimeFn::preset_ak(k)
                                                       : TimeFn::preset_heat(k));
            }
            return out;
        }
        if (call.name == "preset_bk") {
            if (call.args.size() != 1) fail(ErrorKind::Validation, "preset_bk(c) needs c", line);
            const double c = parse_number(call.args[0], line);
            for (int k = 1; k <= dim; ++k) out.push_back(TimeFn::preset_bk(k, c));
            return out;
        }
        if (call.name == "pi_power") {
            if (call.args.size() != 1) fail(ErrorKind::Validation, "pi_power(p) needs p", line);
            const double p = parse_number(call.args[0], line);
            for (int k = 1; k <= dim; ++k) {
                out.push_back(TimeFn::constant(std::pow(k * std::numbers::pi, p)));
            }
            return out;
        }
        const TimeFn fn = TimeFn::parse(text);
        out.assign(static_cast<std::size_t>(dim), fn);
        return out;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Validation && e.index() == 0) {
            throw Error(ErrorKind::Validation, e.what(), line);
        }
        throw;
    }
}

}  // namespace

EvolutionModel load_model(const ConfigDocument& doc)
{
    const ConfigSection* model = doc.section("model");
    if (!model) fail(ErrorKind::Validation, "missing [model] section");
    if (doc.all("model").size() > 1) fail(ErrorKind::Validation, "duplicate [model] section");
    model->require_known_keys({"kind", "T", "N", "a", "b", "f"});

    const std::string kind = model->get_string("kind", "diagonal");
    const double horizon = model->get_double("T", 1.0);
    const long long n = model->get_int("N");
    if (n < 1) fail(ErrorKind::Validation, "N must be >= 1", model->find("N")->line);
    if (n > 4096) fail(ErrorKind::Validation, "N must be <= 4096", model->find("N")->line);
    const int dim = static_cast<int>(n);

    std::vector<TimeFn> f;
    if (const auto* entry = model->find("f"); entry && entry->value != "zero") {
        f = mode_list(entry->value, dim, entry->line);
    }
    auto mode_key = [&](const std::string& key) {
        const auto* entry = model->find(key);
        if (!entry) fail(ErrorKind::Validation, "missing key '" + key + "' in [model]");
        auto list = mode_list(entry->value, dim, entry->line);
        if (list.empty()) fail(ErrorKind::Validation, "empty '" + key + "' list", entry->line);
        if (static_cast<int>(list.size()) != dim) {
            fail(ErrorKind::Validation, "'" + key + "' needs N entries", entry->line);
        }
        return list;
    };

    if (kind == "diagonal") {
        return EvolutionModel::diagonal(horizon, mode_key("a"), mode_key("b"), std::move(f));
    }
    if (kind == "scalar_identity") {
        const auto* entry = model->find("a");
        if (!entry) fail(ErrorKind::Validation, "missing key 'a' in [model]");
        return EvolutionModel::scalar_identity(horizon, TimeFn::parse(entry->value), mode_key("b"),
                                               std::move(f));
    }
    if (kind == "dense") {
        if (model->has("a") || model->has("b")) {
            fail(ErrorKind::Validation, "dense models take [drift]/[diffusion] sections, not a/b");
        }
        auto terms = [&](const std::string& name) {
            std::vector<DenseTerm> out;
            for (const auto* section : doc.all(name)) {
                section->require_known_keys({"fn", "matrix"});
                const auto* matrix = section->find("matrix");
                if (!matrix) fail(ErrorKind::Validation, "[" + name + "] needs matrix");
                out.push_back({TimeFn::parse(section->get_string("fn", "const(1)")),
                               parse_matrix(matrix->value, matrix->line)});
            }
            return out;
        };
        return EvolutionModel::dense(horizon, dim, terms("drift"), terms("diffusion"),
                                     std::move(f));
    }
    fail(ErrorKind::Validation, "unknown model kind '" + kind + "'", model->find("kind")->line);
}

EvolutionModel load_model(const std::string& config_text)
{
    return load_model(ConfigDocument::parse(config_text));
}

// ---------------------------------------------------------------------------
// DirectionSpace

DirectionSpace::DirectionSpace(Vector weights, std::string label)
    : weights_(std::move(weights)), label_(std::move(label))
{
    if (weights_.size() == 0) fail(ErrorKind::Validation, "direction space needs weights");
    for (Eigen::Index k = 0; k < weights_.size(); ++k) {
        if (!(weights_(k) > 0.0) || !std::isfinite(weights_(k))) {
            fail(ErrorKind::Validation, "direction-space weights must be positive and finite",
                 static_cast<int>(k) + 1);
        }
    }
}

DirectionSpace DirectionSpace::ambient(int dim)
{
    return DirectionSpace(Vector::Ones(dim), "ambient");
}

DirectionSpace DirectionSpace::cm_at(const EvolutionModel& model, double t0)
{
    if (!model.is_diagonal()) {
        fail(ErrorKind::Validation, "cm_at direction space needs a diagonal diffusion");
    }
    Vector w(model.dim());
    for (int k = 0; k < model.dim(); ++k) {
        const double b = model.diffusion_coefficient(k)(t0);
        if (b == 0.0) {
            fail(ErrorKind::DegenerateDiffusion,
                 "b_" + std::to_string(k + 1) + "(" + format_double(t0) + ") = 0", k + 1);
        }
        w(k) = 1.0 / std::abs(b);
    }
    return DirectionSpace(std::move(w), "cm_at(" + format_double(t0) + ")");
}

DirectionSpace DirectionSpace::sobolev(int dim, double gamma)
{
    Vector w(dim);
    for (int k = 0; k < dim; ++k) w(k) = std::pow((k + 1) * std::numbers::pi, gamma);
    return DirectionSpace(std::move(w), "sobolev(" + format_double(gamma) + ")");
}

DirectionSpace DirectionSpace::weighted(Vector weights, std::string label)
{
    return DirectionSpace(std::move(weights), std::move(label));
}

double DirectionSpace::norm(const Vector& h) const
{
    return weights_.cwiseProduct(h).norm();
}

double DirectionSpace::dual_norm(const Vector& l) const
{
    return l.cwiseQuotient(weights_).norm();
}

double DirectionSpace::embedding_constant() const
{
    return 1.0 / weights_.minCoeff();
}

Vector DirectionSpace::normalize(const Vector& h) const
{
    const double n = norm(h);
    if (!(n > 0.0)) fail(ErrorKind::Validation, "cannot normalize a zero direction");
    return h / n;
}

DirectionSpace direction_space(const std::string& preset, const EvolutionModel& model,
                               double param)
{
    if (preset == "ambient") return DirectionSpace::ambient(model.dim());
    if (preset == "cm_at") return DirectionSpace::cm_at(model, param);
    if (preset == "sobolev") return DirectionSpace::sobolev(model.dim(), param);
    fail(ErrorKind::Validation, "unknown direction-space preset '" + preset + "'");
}

// ---------------------------------------------------------------------------
// Test functions

namespace {

// d^n/du^n tanh(u) as a polynomial in T = tanh(u): p_{n+1}(T) = p_n'(T) (1 - T^2).
double tanh_derivative(double u, int order)
{
    std::vector<double> poly{0.0, 1.0};
    for (int n = 0; n < order; ++n) {
        std::vector<double> deriv(poly.size() > 1 ? poly.size() - 1 : 1, 0.0);
        for (std::size_t i = 1; i < poly.size(); ++i) deriv[i - 1] = i * poly[i];
        std::vector<double> next(deriv.size() + 2, 0.0);
        for (std::size_t i = 0; i < deriv.size(); ++i) {
            next[i] += deriv[i];
            next[i + 2] -= deriv[i];
        }
        poly = std::move(next);
    }
    const double t = std::tanh(u);
    double value = 0.0;
    for (auto it = poly.rbegin(); it != poly.rend(); ++it) value = value * t + *it;
    return value;
}

}  // namespace

double Factor1d::eval(double x) const
{
    const double u = freq * x + phase;
    switch (kind) {
    case Kind::One: return 1.0;
    case Kind::Cos: return std::cos(u);
    case Kind::Tanh: return std::tanh(u);
    case Kind::AbsSin: return std::abs(std::sin(u));
    }
    return 0.0;
}

double Factor1d::derivative(double x, int order) const
{
    if (order == 0) return eval(x);
    const double u = freq * x + phase;
    const double scale = std::pow(freq, order);
    switch (kind) {
    case Kind::One: return 0.0;
    case Kind::Cos: return scale * std::cos(u + order * 0.5 * std::numbers::pi);
    case Kind::Tanh: return scale * tanh_derivative(u, order);
    case Kind::AbsSin:
        if (freq == 0.0) return 0.0;
        fail(ErrorKind::UnsupportedOrder, "abs_sin factor has no derivatives");
    }
    return 0.0;
}

double Factor1d::bound() const
{
    return 1.0;
}

TestFunction TestFunction::constant(double c)
{
    TestFunction fn;
    fn.kind_ = Kind::Constant;
    fn.phase_ = c;
    return fn;
}

TestFunction TestFunction::cosine(Vector l, double phase)
{
    TestFunction fn;
    fn.kind_ = Kind::Cosine;
    fn.ell_ = std::move(l);
    fn.phase_ = phase;
    return fn;
}

TestFunction TestFunction::tanh_linear(Vector l)
{
    TestFunction fn;
    fn.kind_ = Kind::TanhLinear;
    fn.ell_ = std::move(l);
    return fn;
}

TestFunction TestFunction::abs_sin(Vector l)
{
    TestFunction fn;
    fn.kind_ = Kind::AbsSin;
    fn.ell_ = std::move(l);
    return fn;
}

TestFunction TestFunction::separable(std::vector<Factor1d> factors)
{
    if (factors.empty()) fail(ErrorKind::Validation, "separable test function needs factors");
    TestFunction fn;
    fn.kind_ = Kind::Separable;
    fn.factors_ = std::move(factors);
    return fn;
}

int TestFunction::dim() const
{
    if (kind_ == Kind::Constant) return 0;
    if (kind_ == Kind::Separable) return static_cast<int>(factors_.size());
    return static_cast<int>(ell_.size());
}

bool TestFunction::is_ridge() const
{
    return kind_ == Kind::Cosine || kind_ == Kind::TanhLinear || kind_ == Kind::AbsSin;
}

double TestFunction::ridge_profile_derivative(double u, int order) const
{
    switch (kind_) {
    case Kind::Cosine: return std::cos(u + order * 0.5 * std::numbers::pi);
    case Kind::TanhLinear: return tanh_derivative(u, order);
    case Kind::AbsSin:
        if (order > 0) fail(ErrorKind::UnsupportedOrder, "abs_sin is not differentiable");
        return std::abs(std::sin(u));
    default: fail(ErrorKind::Internal, "not a ridge function");
    }
}

double TestFunction::operator()(const Vector& x) const
{
    switch (kind_) {
    case Kind::Constant: return phase_;
    case Kind::Cosine: return std::cos(ell_.dot(x) + phase_);
    case Kind::TanhLinear: return std::tanh(ell_.dot(x));
    case Kind::AbsSin: return std::abs(std::sin(ell_.dot(x)));
    case Kind::Separable: {
        double value = 1.0;
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            value *= factors_[k].eval(x(static_cast<Eigen::Index>(k)));
        }
        return value;
    }
    }
    return 0.0;
}

double TestFunction::bound() const
{
    if (kind_ == Kind::Constant) return std::abs(phase_);
    return 1.0;
}

int TestFunction::analytic_order() const
{
    switch (kind_) {
    case Kind::Constant:
    case Kind::Cosine:
    case Kind::TanhLinear: return kInfiniteOrder;
    case Kind::AbsSin: return ell_.isZero(0.0) ? kInfiniteOrder : 0;
    case Kind::Separable:
        for (const auto& f : factors_) {
            if (f.kind == Factor1d::Kind::AbsSin && f.freq != 0.0) return 0;
        }
        return kInfiniteOrder;
    }
    return 0;
}

bool TestFunction::has_closed_form_expectation() const
{
    if (kind_ == Kind::Constant || kind_ == Kind::Cosine) return true;
    if (kind_ == Kind::Separable) {
        return std::all_of(factors_.begin(), factors_.end(), [](const Factor1d& f) {
            return f.kind == Factor1d::Kind::Cos || f.kind == Factor1d::Kind::One;
        });
    }
    return false;
}

double TestFunction::derivative(const Vector& x, std::span<const Vector> dirs) const
{
    const int order = static_cast<int>(dirs.size());
    if (order == 0) return (*this)(x);
    if (order > analytic_order()) {
        fail(ErrorKind::UnsupportedOrder,
             describe() + " has no analytic derivative of order " + std::to_string(order));
    }
    switch (kind_) {
    case Kind::Constant: return 0.0;
    case Kind::Cosine:
    case Kind::TanhLinear:
    case Kind::AbsSin: {
        double value = ridge_profile_derivative(ell_.dot(x) + phase_, order);
        for (const auto& h : dirs) value *= ell_.dot(h);
        return value;
    }
    case Kind::Separable: {
        // Product rule as a product of multilinear polynomials in one formal
        // variable per direction; the answer is the coefficient of the full set.
        const std::size_t subsets = std::size_t{1} << order;
        std::vector<double> acc(subsets, 0.0);
        acc[0] = 1.0;
        std::vector<double> factor(subsets), next(subsets);
        for (std::size_t k = 0; k < factors_.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            std::vector<double> derivs(static_cast<std::size_t>(order) + 1);
            for (int j = 0; j <= order; ++j) {
                const bool needed = j == 0 || factors_[k].kind != Factor1d::Kind::One;
                derivs[static_cast<std::size_t>(j)] =
                    needed ? factors_[k].derivative(x(kk), j) : 0.0;
            }
            for (std::size_t s = 0; s < subsets; ++s) {
                double coeff = derivs[static_cast<std::size_t>(std::popcount(s))];
                for (int i = 0; i < order; ++i) {
                    if (s & (std::size_t{1} << i)) coeff *= dirs[static_cast<std::size_t>(i)](kk);
                }
                factor[s] = coeff;
            }
            std::fill(next.begin(), next.end(), 0.0);
            for (std::size_t s = 0; s < subsets; ++s) {
                // enumerate subsets a of s
                for (std::size_t a = s;; a = (a - 1) & s) {
                    next[s] += acc[s ^ a] * factor[a];
                    if (a == 0) break;
                }
            }
            acc.swap(next);
        }
        return acc[subsets - 1];
    }
    }
    return 0.0;
}

double TestFunction::lipschitz_along(const Vector& h) const
{
    if (kind_ == Kind::Constant) return 0.0;
    if (is_ridge()) return std::abs(ell_.dot(h));
    return std::numeric_limits<double>::quiet_NaN();
}

std::string TestFunction::describe() const
{
    switch (kind_) {
    case Kind::Constant: return "constant(" + format_double(phase_) + ")";
    case Kind::Cosine:
        return "cosine(" + format_vector(ell_) + ", " + format_double(phase_) + ")";
    case Kind::TanhLinear: return "tanh_linear(" + format_vector(ell_) + ")";
    case Kind::AbsSin: return "abs_sin(" + format_vector(ell_) + ")";
    case Kind::Separable: return "separable(" + std::to_string(factors_.size()) + " factors)";
    }
    return "?";
}

bool TestFunction::operator==(const TestFunction& other) const
{
    if (kind_ != other.kind_ || phase_ != other.phase_ || factors_ != other.factors_) return false;
    return ell_.size() == other.ell_.size() && ell_ == other.ell_;
}

namespace {

Vector padded_direction(const ConfigSection& section, int dim)
{
    const auto* entry = section.find("l");
    if (!entry) fail(ErrorKind::Validation, "[" + section.name + "] needs direction l");
    Vector l = parse_vector(entry->value, entry->line);
    if (l.size() > dim) {
        fail(ErrorKind::Validation, "direction l is longer than N", entry->line);
    }
    Vector out = Vector::Zero(dim);
    out.head(l.size()) = l;
    return out;
}

Factor1d parse_factor(const std::string& text, int line)
{
    const auto call = parse_call(text, line);
    Factor1d f;
    std::vector<double> args;
    for (const auto& a : call.args) args.push_back(parse_number(a, line));
    if (call.name == "one") {
        f.kind = Factor1d::Kind::One;
        return f;
    }
    if (call.name == "cos") f.kind = Factor1d::Kind::Cos;
    else if (call.name == "tanh") f.kind = Factor1d::Kind::Tanh;
    else if (call.name == "abs_sin") f.kind = Factor1d::Kind::AbsSin;
    else fail(ErrorKind::Validation, "unknown factor '" + call.name + "'", line);
    if (args.empty() || args.size() > 2) {
        fail(ErrorKind::Validation, call.name + "(freq[, phase]) expected", line);
    }
    f.freq = args[0];
    f.phase = args.size() > 1 ? args[1] : 0.0;
    return f;
}

}  // namespace

TestFunction parse_test_function(const ConfigSection& section, int dim)
{
    const std::string kind = section.get_string("kind");
    if (kind == "constant") return TestFunction::constant(section.get_double("c", 1.0));
    if (kind == "cosine") {
        return TestFunction::cosine(padded_direction(section, dim), section.get_double("phase", 0.0));
    }
    if (kind == "tanh_linear") return TestFunction::tanh_linear(padded_direction(section, dim));
    if (kind == "abs_sin") return TestFunction::abs_sin(padded_direction(section, dim));
    if (kind == "separable") {
        const auto* entry = section.find("factors");
        if (!entry) fail(ErrorKind::Validation, "separable test function needs factors");
        std::vector<Factor1d> factors;
        for (const auto& item : split_list(entry->value, entry->line)) {
            factors.push_back(parse_factor(item, entry->line));
        }
        if (static_cast<int>(factors.size()) > dim) {
            fail(ErrorKind::Validation, "more factors than modes", entry->line);
        }
        factors.resize(static_cast<std::size_t>(dim));
        return TestFunction::separable(std::move(factors));
    }
    fail(ErrorKind::Validation, "unknown test function kind '" + kind + "'");
}

SourceTerm parse_source_term(const ConfigSection& section, int dim)
{
    return SourceTerm{TimeFn::parse(section.get_string("rho", "const(1)")),
                      parse_test_function(section, dim)};
}

}  // namespace nouk
