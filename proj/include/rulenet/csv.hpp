#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rulenet {

struct IngestOptions {
    std::string missing_token = "?";  // UCI convention
};

// Tabular text data after ingestion. A cell holds std::nullopt when the
// raw value matched the configured missing token.
struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<std::string>>> rows;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const { return columns.size(); }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t c = 0; c < columns.size(); ++c)
            if (columns[c] == name) return c;
        throw std::invalid_argument("column '" + name + "' not found");
    }

    bool has_column(const std::string& name) const {
        for (const auto& c : columns)
            if (c == name) return true;
        return false;
    }
};

namespace detail {

// One RFC-4180 record; quoted fields may contain commas, doubled quotes
// and line breaks. Returns false at end of input.
inline bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    std::string field;
    bool in_quotes = false;
    bool saw_any = false;
    int ch;
    while ((ch = in.get()) != EOF) {
        saw_any = true;
        const char c = static_cast<char>(ch);
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    field.push_back('"');
                    in.get();
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            break;
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!saw_any) return false;
    fields.push_back(std::move(field));
    return true;
}

}  // namespace detail

inline RawTable read_csv(std::istream& in, const IngestOptions& options = {}) {
    RawTable table;
    std::vector<std::string> fields;
    if (!detail::read_record(in, fields) || fields.empty())
        throw std::runtime_error("missing header row");
    table.columns = fields;

    std::size_t line = 1;
    while (detail::read_record(in, fields)) {
        ++line;
        if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
        if (fields.size() != table.columns.size()) {
            std::ostringstream msg;
            msg << "row " << line << " has " << fields.size() << " cells, expected "
                << table.columns.size();
            throw std::runtime_error(msg.str());
        }
        std::vector<std::optional<std::string>> row;
        row.reserve(fields.size());
        for (auto& f : fields) {
            if (f == options.missing_token)
                row.emplace_back(std::nullopt);
            else
                row.emplace_back(std::move(f));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline RawTable read_csv_file(const std::string& path, const IngestOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    return read_csv(in, options);
}

}  // namespace rulenet
