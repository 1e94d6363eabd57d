#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace glamer {

/// Row-major string table as read from a CSV file with a header row.
struct Table
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t n_rows() const { return rows.size(); }
    std::optional<std::size_t> column(std::string_view name) const;

    /// Subset of rows in the given order.
    Table select_rows(const std::vector<std::size_t>& idx) const;
};

/// RFC 4180 style parsing: comma separated, double-quoted fields may
/// contain commas, newlines and doubled quotes. Throws DataError.
Table parse_csv(std::string_view text);

Table read_csv_file(const std::string& path);

std::string quote_csv_field(std::string_view field);

/// Reads a whole file. Throws ConfigError naming the path if it cannot be opened.
std::string read_text_file(const std::string& path);

} // namespace glamer
