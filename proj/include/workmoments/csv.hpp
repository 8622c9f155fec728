// csv.hpp: RFC-4180 style tables with shortest round-trip number formatting

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace workmoments {

/// Shortest representation that round-trips; NaN becomes the empty string.
std::string format_number(double v);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view s);

/// Streams rows to one file. Throws IoError on open/write failure.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    void row(const std::vector<std::string>& fields);
    /// Flushes and checks the stream; the destructor does not report errors.
    void close();

private:
    std::filesystem::path path_;
    std::ofstream os_;
    std::size_t columns_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column_index(std::string_view name) const;
    /// Numeric column; empty cells become NaN. Throws IoError if missing or
    /// unparsable.
    std::vector<double> numbers(std::string_view name) const;
    std::vector<std::string> strings(std::string_view name) const;
};

/// Parses text with quoted fields; rows are checked against the header width.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Strict full-string parse.
std::optional<double> parse_double(std::string_view s);

} // namespace workmoments
