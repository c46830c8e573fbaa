#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dramdse/error.hpp"
#include "dramdse/kvfile.hpp"

namespace dramdse::csv {

/// Shortest text that round-trips the double exactly; locale-independent.
inline std::string num(double v)
{
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

inline std::string join(const std::vector<std::string>& cells)
{
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_column(std::string_view name) const
    {
        int c = column(name);
        if (c < 0) throw Error(ErrorKind::ParseError, "missing column '" + std::string(name) + "'");
        return c;
    }
};

inline std::string to_string(const Table& t)
{
    std::string out = join(t.header) + '\n';
    for (const auto& r : t.rows) out += join(r) + '\n';
    return out;
}

/// Plain comma-separated text: no quoting, first line is the header.
inline Table parse(std::string_view text)
{
    Table t;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_list(line, ',');
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                                   std::to_string(t.header.size()) + " fields, got " +
                                                   std::to_string(cells.size()));
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) throw Error(ErrorKind::ParseError, "empty csv");
    return t;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

/// Writes to a sibling temporary and renames it into place.
inline void write_file_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
        f << content;
        if (!f) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

inline double to_double(const std::string& s, const std::string& what)
{
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::ParseError, what + ": not a number '" + s + "'");
}

} // namespace dramdse::csv
