#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace nouk {

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

enum class ReportFormat { Csv, Json };

ReportFormat parse_report_format(const std::string& text);
const char* to_string(ReportFormat format);

/// Header row plus one line per row, "\n" endings, shortest round-trip floats.
std::string to_csv(const Table& table);
/// {"columns": [...], "command": ..., "rows": [{column: value}]}, sorted keys.
std::string to_json(const Table& table, const std::string& command);

/// Library versions embedded in every report.
nlohmann::json versions();

/// Writes <command>.csv or <command>.json, <command>.meta.json (meta, sorted
/// keys) and <command>.resolved.cfg into `dir`. Returns the written paths.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& dir,
                                                const std::string& command, const Table& table,
                                                ReportFormat format, const nlohmann::json& meta,
                                                const std::string& resolved_config);

}  // namespace nouk
