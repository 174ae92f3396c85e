#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "epf/core/error.hpp"

namespace epf::csv {

// Shortest round-trip representation; reading it back recovers the exact double.
inline std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw NumericalError("double formatting failed");
    return std::string(buf, p);
}

inline bool parse_double(std::string_view s, double& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    Table t;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        auto fields = split_line(line);
        if (lineno == 1) {
            t.header = std::move(fields);
        } else {
            if (fields.size() != t.header.size())
                throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                                std::to_string(t.header.size()) + " fields, got " +
                                std::to_string(fields.size()));
            t.rows.push_back(std::move(fields));
        }
    }
    if (t.header.empty()) throw DataError(path + ": empty file");
    return t;
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path), path_(path) {
        if (!out_) throw DataError("cannot write '" + path + "'");
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw DataError("write failure on '" + path_ + "'");
    }

private:
    std::ofstream out_;
    std::string path_;
};

}  // namespace epf::csv
