#pragma once
#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sgboost/error.hpp"

namespace sgb {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        return -1;
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace detail

/// Reads a plain comma-separated file with a mandatory header row.
/// Quoting is not supported; fields must not contain commas.
inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open file: " + path);
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            table.header = detail::split_csv_line(line);
            if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty()))
                throw validation_error(path + ": empty header row");
            continue;
        }
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != table.header.size())
            throw validation_error(path + ":" + std::to_string(line_no) + ": expected " +
                                   std::to_string(table.header.size()) + " fields, got " +
                                   std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) throw validation_error(path + ": file is empty");
    return table;
}

/// Strict locale-independent double parse; the whole field must be consumed.
inline double parse_double(const std::string& s, const std::string& context) {
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw validation_error(context + ": not a number: '" + s + "'");
    return value;
}

/// Fixed significant-digit formatting used for every numeric field the tool
/// writes, so reruns produce identical bytes.
inline std::string format_significant(double v, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return std::string(buf);
}

inline void write_csv_line(std::ofstream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << fields[i];
    }
    out << '\n';
}

} // namespace sgb
