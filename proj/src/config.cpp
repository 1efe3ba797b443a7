#include "nouk/config.hpp"

#include "nouk/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

namespace nouk {

std::string format_double(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 64> buffer{};
    const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
    return std::string(buffer.data(), result.ptr);
}

std::string trim(const std::string& text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

const ConfigEntry* ConfigSection::find(const std::string& key) const
{
    for (const auto& entry : entries) {
        if (entry.key == key) return &entry;
    }
    return nullptr;
}

void ConfigSection::require_known_keys(const std::set<std::string>& allowed) const
{
    for (const auto& entry : entries) {
        if (!allowed.contains(entry.key)) {
            fail(ErrorKind::Validation,
                 "unknown key '" + entry.key + "' in section [" + name + "] (line " +
                     std::to_string(entry.line) + ")",
                 entry.line);
        }
    }
}

std::string ConfigSection::get_string(const std::string& key) const
{
    const auto* entry = find(key);
    if (!entry) fail(ErrorKind::Validation, "missing key '" + key + "' in [" + name + "]");
    return entry->value;
}

std::string ConfigSection::get_string(const std::string& key, const std::string& fallback) const
{
    const auto* entry = find(key);
    return entry ? entry->value : fallback;
}

double ConfigSection::get_double(const std::string& key) const
{
    const auto* entry = find(key);
    if (!entry) fail(ErrorKind::Validation, "missing key '" + key + "' in [" + name + "]");
    return parse_number(entry->value, entry->line);
}

double ConfigSection::get_double(const std::string& key, double fallback) const
{
    const auto* entry = find(key);
    return entry ? parse_number(entry->value, entry->line) : fallback;
}

long long ConfigSection::get_int(const std::string& key) const
{
    const auto* entry = find(key);
    if (!entry) fail(ErrorKind::Validation, "missing key '" + key + "' in [" + name + "]");
    return get_int(key, 0);
}

long long ConfigSection::get_int(const std::string& key, long long fallback) const
{
    const auto* entry = find(key);
    if (!entry) return fallback;
    const std::string& text = entry->value;
    long long value = 0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
        fail(ErrorKind::Parse, "expected integer for '" + key + "', got '" + text + "'",
             entry->line);
    }
    return value;
}

Eigen::VectorXd ConfigSection::get_vector(const std::string& key) const
{
    const auto* entry = find(key);
    if (!entry) fail(ErrorKind::Validation, "missing key '" + key + "' in [" + name + "]");
    return parse_vector(entry->value, entry->line);
}

ConfigDocument ConfigDocument::parse(const std::string& text)
{
    ConfigDocument doc;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                fail(ErrorKind::Parse, "malformed section header '" + line + "'", line_no);
            }
            ConfigSection section;
            section.name = trim(line.substr(1, line.size() - 2));
            section.line = line_no;
            doc.sections_.push_back(std::move(section));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(ErrorKind::Parse, "expected 'key = value', got '" + line + "'", line_no);
        }
        if (doc.sections_.empty()) {
            fail(ErrorKind::Parse, "key outside of any section", line_no);
        }
        ConfigEntry entry{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
        if (entry.key.empty() || entry.value.empty()) {
            fail(ErrorKind::Parse, "empty key or value", line_no);
        }
        auto& section = doc.sections_.back();
        if (section.has(entry.key)) {
            fail(ErrorKind::Parse, "duplicate key '" + entry.key + "'", line_no);
        }
        section.entries.push_back(std::move(entry));
    }
    return doc;
}

const ConfigSection* ConfigDocument::section(const std::string& name) const
{
    for (const auto& s : sections_) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

std::vector<const ConfigSection*> ConfigDocument::all(const std::string& name) const
{
    std::vector<const ConfigSection*> out;
    for (const auto& s : sections_) {
        if (s.name == name) out.push_back(&s);
    }
    return out;
}

void ConfigDocument::require_known_sections(const std::set<std::string>& allowed) const
{
    for (const auto& s : sections_) {
        if (!allowed.contains(s.name)) {
            fail(ErrorKind::Validation, "unknown section [" + s.name + "]", s.line);
        }
    }
}

double parse_number(const std::string& raw, int line)
{
    const std::string text = trim(raw);
    if (text == "pi") return 3.141592653589793;
    if (text == "-pi") return -3.141592653589793;
    double value = 0.0;
    const char* begin = text.data();
    if (!text.empty() && text.front() == '+') ++begin;
    const auto result = std::from_chars(begin, text.data() + text.size(), value);
    if (text.empty() || result.ec != std::errc() || result.ptr != text.data() + text.size()) {
        fail(ErrorKind::Parse, "expected a number, got '" + text + "'", line);
    }
    return value;
}

std::vector<std::string> split_list(const std::string& raw, int line)
{
    const std::string text = trim(raw);
    if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
        fail(ErrorKind::Parse, "expected a bracketed list, got '" + text + "'", line);
    }
    std::vector<std::string> items;
    const std::string body = text.substr(1, text.size() - 2);
    if (trim(body).empty()) return items;
    int depth = 0;
    std::string current;
    for (char ch : body) {
        if (ch == '(' || ch == '[') ++depth;
        if (ch == ')' || ch == ']') --depth;
        if (depth < 0) fail(ErrorKind::Parse, "unbalanced brackets in '" + text + "'", line);
        if (ch == ',' && depth == 0) {
            items.push_back(trim(current));
            current.clear();
        } else {
            current += ch;
        }
    }
    if (depth != 0) fail(ErrorKind::Parse, "unbalanced brackets in '" + text + "'", line);
    items.push_back(trim(current));
    for (const auto& item : items) {
        if (item.empty()) fail(ErrorKind::Parse, "empty list item in '" + text + "'", line);
    }
    return items;
}

Eigen::VectorXd parse_vector(const std::string& text, int line)
{
    const auto items = split_list(text, line);
    Eigen::VectorXd v(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = parse_number(items[i], line);
    }
    return v;
}

Eigen::MatrixXd parse_matrix(const std::string& text, int line)
{
    const auto rows = split_list(text, line);
    if (rows.empty()) fail(ErrorKind::Parse, "empty matrix", line);
    std::vector<Eigen::VectorXd> parsed;
    for (const auto& row : rows) parsed.push_back(parse_vector(row, line));
    const auto cols = parsed.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t r = 0; r < parsed.size(); ++r) {
        if (parsed[r].size() != cols) fail(ErrorKind::Parse, "ragged matrix rows", line);
        m.row(static_cast<Eigen::Index>(r)) = parsed[r].transpose();
    }
    return m;
}

CallExpr parse_call(const std::string& raw, int line)
{
    const std::string text = trim(raw);
    CallExpr call;
    const auto open = text.find('(');
    if (open == std::string::npos) {
        call.name = text;
        return call;
    }
    if (text.back() != ')') fail(ErrorKind::Parse, "malformed call '" + text + "'", line);
    call.name = trim(text.substr(0, open));
    call.has_parens = true;
    const std::string inner = "[" + text.substr(open + 1, text.size() - open - 2) + "]";
    call.args = split_list(inner, line);
    return call;
}

std::string format_vector(const Eigen::VectorXd& v)
{
    std::string out = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v(i));
    }
    return out + "]";
}

std::string format_matrix(const Eigen::MatrixXd& m)
{
    std::string out = "[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        if (r) out += ", ";
        out += format_vector(m.row(r).transpose());
    }
    return out + "]";
}

}  // namespace nouk
