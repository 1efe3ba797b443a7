#include "nouk/timefn.hpp"

#include "nouk/config.hpp"
#include "nouk/error.hpp"

#include <cmath>
#include <numbers>

namespace nouk {

namespace {

// b^n - a^n = (b - a) * sum_j b^j a^(n-1-j)
double power_difference(double b, double a, int n)
{
    if (n == 0) return 0.0;
    double sum = 0.0;
    double bj = 1.0;
    for (int j = 0; j < n; ++j) {
        sum += bj * std::pow(a, n - 1 - j);
        bj *= b;
    }
    return (b - a) * sum;
}

int as_mode(double value, const std::string& where)
{
    const double rounded = std::round(value);
    if (rounded != value || rounded < 1.0) {
        fail(ErrorKind::Validation, where + ": mode index must be a positive integer");
    }
    return static_cast<int>(rounded);
}

}  // namespace

TimeFn TimeFn::constant(double c)
{
    return TimeFn(Kind::Const, {c});
}

TimeFn TimeFn::poly(std::vector<double> coeffs)
{
    if (coeffs.empty()) fail(ErrorKind::Validation, "poly() needs at least one coefficient");
    return TimeFn(Kind::Poly, std::move(coeffs));
}

TimeFn TimeFn::trig(double amplitude, double frequency, double phase, double offset)
{
    return TimeFn(Kind::Trig, {amplitude, frequency, phase, offset});
}

TimeFn TimeFn::preset_ak(int k)
{
    if (k < 1) fail(ErrorKind::Validation, "preset_ak: mode index must be >= 1");
    return TimeFn(Kind::PresetAk, {static_cast<double>(k)});
}

TimeFn TimeFn::preset_bk(int k, double c)
{
    if (k < 1) fail(ErrorKind::Validation, "preset_bk: mode index must be >= 1");
    return TimeFn(Kind::PresetBk, {static_cast<double>(k), c});
}

TimeFn TimeFn::preset_heat(int k)
{
    if (k < 1) fail(ErrorKind::Validation, "preset_heat: mode index must be >= 1");
    return TimeFn(Kind::PresetHeat, {static_cast<double>(k)});
}

TimeFn TimeFn::parse(const std::string& text)
{
    const auto call = parse_call(text);
    std::vector<double> args;
    for (const auto& a : call.args) args.push_back(parse_number(a));
    auto expect = [&](std::size_t n) {
        if (args.size() != n) {
            fail(ErrorKind::Validation, call.name + "() expects " + std::to_string(n) +
                                            " argument(s), got " + std::to_string(args.size()));
        }
    };
    if (call.name == "const") {
        expect(1);
        return constant(args[0]);
    }
    if (call.name == "poly") return poly(args);
    if (call.name == "trig") {
        expect(4);
        return trig(args[0], args[1], args[2], args[3]);
    }
    if (call.name == "ak") {
        expect(1);
        return preset_ak(as_mode(args[0], "ak"));
    }
    if (call.name == "bk") {
        expect(2);
        return preset_bk(as_mode(args[0], "bk"), args[1]);
    }
    if (call.name == "heat") {
        expect(1);
        return preset_heat(as_mode(args[0], "heat"));
    }
    fail(ErrorKind::Validation, "unknown time function '" + call.name + "'");
}

double TimeFn::operator()(double t) const
{
    switch (kind_) {
    case Kind::Const: return params_[0];
    case Kind::Poly: {
        double value = 0.0;
        for (auto it = params_.rbegin(); it != params_.rend(); ++it) value = value * t + *it;
        return value;
    }
    case Kind::Trig: return params_[0] * std::sin(params_[1] * t + params_[2]) + params_[3];
    case Kind::PresetAk: {
        const double k = params_[0];
        return -k * k * (std::pow(t, static_cast<int>(k)) + 1.0);
    }
    case Kind::PresetBk: return std::sin(params_[0] * t) + params_[1];
    case Kind::PresetHeat: {
        const double k = params_[0];
        return -k * k * std::numbers::pi * std::numbers::pi;
    }
    }
    return 0.0;
}

double TimeFn::integral(double a, double b) const
{
    const double width = b - a;
    switch (kind_) {
    case Kind::Const: return params_[0] * width;
    case Kind::Poly: {
        double total = 0.0;
        for (std::size_t i = 0; i < params_.size(); ++i) {
            const int n = static_cast<int>(i) + 1;
            total += params_[i] * power_difference(b, a, n) / n;
        }
        return total;
    }
    case Kind::Trig: {
        const double amp = params_[0], freq = params_[1], phase = params_[2];
        double oscillating;
        if (freq == 0.0) {
            oscillating = amp * std::sin(phase) * width;
        } else {
            // -(cos(f b + p) - cos(f a + p)) / f
            oscillating = 2.0 * amp * std::sin(0.5 * freq * (a + b) + phase) *
                          std::sin(0.5 * freq * width) / freq;
        }
        return oscillating + params_[3] * width;
    }
    case Kind::PresetAk: {
        const double k = params_[0];
        const int n = static_cast<int>(k) + 1;
        return -k * k * (power_difference(b, a, n) / n + width);
    }
    case Kind::PresetBk: {
        const double k = params_[0];
        return 2.0 * std::sin(0.5 * k * (a + b)) * std::sin(0.5 * k * width) / k +
               params_[1] * width;
    }
    case Kind::PresetHeat: {
        const double k = params_[0];
        return -k * k * std::numbers::pi * std::numbers::pi * width;
    }
    }
    return 0.0;
}

bool TimeFn::is_zero() const noexcept
{
    switch (kind_) {
    case Kind::Const: return params_[0] == 0.0;
    case Kind::Poly:
        for (double c : params_) {
            if (c != 0.0) return false;
        }
        return true;
    case Kind::Trig: return params_[0] == 0.0 && params_[3] == 0.0;
    default: return false;
    }
}

std::string TimeFn::to_string() const
{
    auto join = [&](const char* name, std::size_t count) {
        std::string out = std::string(name) + "(";
        for (std::size_t i = 0; i < count; ++i) {
            if (i) out += ", ";
            out += format_double(params_[i]);
        }
        return out + ")";
    };
    switch (kind_) {
    case Kind::Const: return join("const", 1);
    case Kind::Poly: return join("poly", params_.size());
    case Kind::Trig: return join("trig", 4);
    case Kind::PresetAk: return join("ak", 1);
    case Kind::PresetBk: return join("bk", 2);
    case Kind::PresetHeat: return join("heat", 1);
    }
    return {};
}

}  // namespace nouk
