#pragma once

#include <string>
#include <vector>

namespace nouk {

/// Scalar function of time drawn from a closed catalog. Every catalog entry
/// has an exact antiderivative, so integrals of drift coefficients are exact
/// up to rounding.
class TimeFn {
public:
    enum class Kind { Const, Poly, Trig, PresetAk, PresetBk, PresetHeat };

    static TimeFn constant(double c);
    static TimeFn poly(std::vector<double> coeffs);
    /// amplitude * sin(frequency * t + phase) + offset
    static TimeFn trig(double amplitude, double frequency, double phase, double offset);
    /// -k^2 (t^k + 1)
    static TimeFn preset_ak(int k);
    /// sin(k t) + c
    static TimeFn preset_bk(int k, double c);
    /// -k^2 pi^2
    static TimeFn preset_heat(int k);

    /// Parses `const(c)`, `poly(c0, c1, ...)`, `trig(A, f, phi, o)`, `ak(k)`,
    /// `bk(k, c)` or `heat(k)`.
    static TimeFn parse(const std::string& text);

    TimeFn() : TimeFn(constant(0.0)) {}

    Kind kind() const noexcept { return kind_; }
    const std::vector<double>& params() const noexcept { return params_; }

    double operator()(double t) const;

    bool has_exact_antiderivative() const noexcept { return true; }

    /// Integral over [a, b] from the exact antiderivative, written in a
    /// difference form that avoids cancellation for short intervals.
    double integral(double a, double b) const;

    bool is_zero() const noexcept;

    /// Inverse of parse(); numbers use shortest round-trip formatting.
    std::string to_string() const;

    bool operator==(const TimeFn& other) const = default;

private:
    TimeFn(Kind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}

    Kind kind_;
    std::vector<double> params_;
};

}  // namespace nouk
