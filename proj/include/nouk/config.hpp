#pragma once

#include <Eigen/Dense>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nouk {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// One `key = value` line of a config document.
struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

/// One `[name]` section. Sections may repeat (e.g. several `[drift]` terms).
struct ConfigSection {
    std::string name;
    int line = 0;
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(const std::string& key) const;
    bool has(const std::string& key) const { return find(key) != nullptr; }

    /// Throws ValidationError naming the first key not in `allowed`.
    void require_known_keys(const std::set<std::string>& allowed) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    Eigen::VectorXd get_vector(const std::string& key) const;
};

/// Line-based document: `[section]` headers, `key = value` pairs, `#` comments.
class ConfigDocument {
public:
    static ConfigDocument parse(const std::string& text);

    const std::vector<ConfigSection>& sections() const noexcept { return sections_; }

    /// First section with the given name, if any.
    const ConfigSection* section(const std::string& name) const;
    std::vector<const ConfigSection*> all(const std::string& name) const;

    /// Throws ValidationError for any section name outside `allowed`.
    void require_known_sections(const std::set<std::string>& allowed) const;

private:
    std::vector<ConfigSection> sections_;
};

// Value-level parsers shared by the model and cli modules. `line` is used for
// error reporting only.
double parse_number(const std::string& text, int line = 0);
Eigen::VectorXd parse_vector(const std::string& text, int line = 0);
Eigen::MatrixXd parse_matrix(const std::string& text, int line = 0);

/// Splits `name(a, b(c, d), e)` into name and top-level arguments. A bare
/// `name` yields no arguments.
struct CallExpr {
    std::string name;
    std::vector<std::string> args;
    bool has_parens = false;
};
CallExpr parse_call(const std::string& text, int line = 0);

/// Splits a bracketed list `[x, f(y, z), w]` at top-level commas.
std::vector<std::string> split_list(const std::string& text, int line = 0);

std::string trim(const std::string& text);

std::string format_vector(const Eigen::VectorXd& v);
std::string format_matrix(const Eigen::MatrixXd& m);

}  // namespace nouk
