#include "workmoments/csv.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "workmoments/errors.hpp"

namespace workmoments {

std::string format_number(double v) {
    if (std::isnan(v)) return {};
    if (v == 0.0) v = 0.0;  // drop the sign of zero
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), os_(path, std::ios::binary), columns_(header.size()) {
    if (!os_) throw IoError("cannot open " + path.string() + " for writing");
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_) throw ShapeError("CsvWriter: row width differs from header in " + path_.string());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os_ << ',';
        os_ << csv_field(fields[i]);
    }
    os_ << '\n';
    if (!os_) throw IoError("write failed: " + path_.string());
}

void CsvWriter::close() {
    os_.flush();
    if (!os_) throw IoError("write failed: " + path_.string());
    os_.close();
}

std::optional<std::size_t> CsvTable::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

std::vector<std::string> CsvTable::strings(std::string_view name) const {
    const auto idx = column_index(name);
    if (!idx) throw IoError("missing column '" + std::string(name) + "'");
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[*idx]);
    return out;
}

std::vector<double> CsvTable::numbers(std::string_view name) const {
    std::vector<double> out;
    for (const auto& s : strings(name)) {
        if (s.empty()) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const auto v = parse_double(s);
        if (!v) throw IoError("column '" + std::string(name) + "': not a number: " + s);
        out.push_back(*v);
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"': quoted = true; field_started = true; break;
        case ',':
            record.push_back(std::move(field));
            field.clear();
            field_started = true;
            break;
        case '\r': break;
        case '\n':
            record.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(record));
            record.clear();
            field_started = false;
            break;
        default: field += c; field_started = true; break;
        }
    }
    if (quoted) throw IoError("unterminated quoted field");
    if (field_started || !record.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
    }
    if (records.empty()) throw IoError("empty CSV");

    CsvTable t;
    t.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.header.size())
            throw IoError("CSV row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                          " fields, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(records[r]));
    }
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_csv(ss.str());
}

} // namespace workmoments
