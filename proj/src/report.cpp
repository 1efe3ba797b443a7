#include "nouk/report.hpp"

#include "nouk/config.hpp"
#include "nouk/error.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>

#include <cmath>
#include <fstream>

namespace nouk {

void Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size()) {
        fail(ErrorKind::Internal, "table row has " + std::to_string(row.size()) +
                                      " cells for " + std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
}

ReportFormat parse_report_format(const std::string& text)
{
    if (text == "csv") return ReportFormat::Csv;
    if (text == "json") return ReportFormat::Json;
    fail(ErrorKind::Validation, "format must be csv or json, got '" + text + "'");
}

const char* to_string(ReportFormat format)
{
    return format == ReportFormat::Csv ? "csv" : "json";
}

namespace {

std::string csv_field(const std::string& text)
{
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string cell_text(const Cell& cell)
{
    if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
    if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
    return std::get<std::string>(cell);
}

nlohmann::json cell_json(const Cell& cell)
{
    if (const auto* d = std::get_if<double>(&cell)) {
        // NaN and infinities are written as strings.
        if (!std::isfinite(*d)) return format_double(*d);
        return *d;
    }
    if (const auto* i = std::get_if<long long>(&cell)) return *i;
    return std::get<std::string>(cell);
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Validation, "cannot write " + path.string());
    out << text;
    if (!out) fail(ErrorKind::Validation, "failed writing " + path.string());
}

}  // namespace

std::string to_csv(const Table& table)
{
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += csv_field(table.columns[c]);
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += csv_field(cell_text(row[c]));
        }
        out += '\n';
    }
    return out;
}

std::string to_json(const Table& table, const std::string& command)
{
    nlohmann::json doc;
    doc["command"] = command;
    doc["columns"] = table.columns;
    doc["rows"] = nlohmann::json::array();
    for (const auto& row : table.rows) {
        nlohmann::json item = nlohmann::json::object();
        for (std::size_t c = 0; c < row.size(); ++c) item[table.columns[c]] = cell_json(row[c]);
        doc["rows"].push_back(std::move(item));
    }
    return doc.dump(2) + "\n";
}

nlohmann::json versions()
{
    return {
        {"nouk", "0.1.0"},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION)},
        {"boost", BOOST_LIB_VERSION},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
    };
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir,
                                                const std::string& command, const Table& table,
                                                ReportFormat format, const nlohmann::json& meta,
                                                const std::string& resolved_config)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Validation, "cannot create output directory " + dir.string());
    std::vector<std::filesystem::path> written;
    const auto table_path = dir / (command + (format == ReportFormat::Csv ? ".csv" : ".json"));
    write_file(table_path, format == ReportFormat::Csv ? to_csv(table) : to_json(table, command));
    written.push_back(table_path);
    const auto meta_path = dir / (command + ".meta.json");
    write_file(meta_path, meta.dump(2) + "\n");
    written.push_back(meta_path);
    const auto cfg_path = dir / (command + ".resolved.cfg");
    write_file(cfg_path, resolved_config);
    written.push_back(cfg_path);
    return written;
}

}  // namespace nouk
