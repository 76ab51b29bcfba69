#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "phaselda/util.hpp"

namespace phaselda {
namespace csv {

// RFC-4180: fields with comma, quote, CR or LF are quoted; quotes doubled.
inline std::string escape(std::string_view field) {
    bool needs_quote = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs_quote) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << escape(fields[i]);
    }
    os << "\r\n";
}

// Streaming reader; accepts CRLF and LF line endings, multi-line quoted
// fields, and a UTF-8 BOM on the first record.
class Reader {
public:
    explicit Reader(std::istream& is) : is_(is) {}

    // Returns false at end of input. Empty trailing line is not a record.
    bool next(std::vector<std::string>& fields) {
        fields.clear();
        int c = is_.get();
        if (c == EOF) return false;
        if (first_record_ && c == '\xef') {  // strip BOM
            if (is_.get() == '\xbb') is_.get();
            c = is_.get();
            if (c == EOF) return false;
        }
        first_record_ = false;

        std::string field;
        bool in_quotes = false;
        while (true) {
            if (c == EOF) {
                fields.push_back(std::move(field));
                return true;
            }
            if (in_quotes) {
                if (c == '"') {
                    int peek = is_.get();
                    if (peek == '"') field += '"';
                    else { in_quotes = false; c = peek; continue; }
                } else {
                    field += static_cast<char>(c);
                }
            } else {
                if (c == '"' && field.empty()) {
                    in_quotes = true;
                } else if (c == ',') {
                    fields.push_back(std::move(field));
                    field.clear();
                } else if (c == '\n') {
                    fields.push_back(std::move(field));
                    return true;
                } else if (c == '\r') {
                    int peek = is_.get();
                    if (peek != '\n' && peek != EOF) is_.unget();
                    fields.push_back(std::move(field));
                    return true;
                } else {
                    field += static_cast<char>(c);
                }
            }
            c = is_.get();
        }
    }

private:
    std::istream& is_;
    bool first_record_ = true;
};

inline std::vector<std::vector<std::string>> read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open CSV file: " + path);
    Reader reader(is);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    while (reader.next(row)) rows.push_back(row);
    return rows;
}

}  // namespace csv
}  // namespace phaselda
