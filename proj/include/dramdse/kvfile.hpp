#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dramdse/error.hpp"

namespace dramdse {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_list(std::string_view s, char sep = ',')
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t end = s.find(sep, start);
        if (end == std::string_view::npos) end = s.size();
        auto item = trim(s.substr(start, end - start));
        if (!item.empty()) out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

/// Line-oriented `key = value` file. `#` starts a comment, `[name]` opens a
/// section; keys inside a section are stored as "name.key".
class KvFile {
public:
    static KvFile parse(std::string_view text)
    {
        KvFile kv;
        std::string section;
        std::size_t line_no = 0;
        std::istringstream in{std::string(text)};
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string_view line = raw;
            if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": unterminated section");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
            auto key = trim(line.substr(0, eq));
            auto value = trim(line.substr(eq + 1));
            if (key.empty())
                throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": empty key");
            std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
            kv.values_[full] = std::string(value);
            kv.order_.push_back(full);
        }
        return kv;
    }

    static KvFile load(const std::string& path)
    {
        std::ifstream f(path);
        if (!f) throw Error(ErrorKind::IoError, "cannot open " + path);
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    const std::string& get(const std::string& key) const
    {
        auto it = values_.find(key);
        if (it == values_.end()) throw Error(ErrorKind::ConfigError, "missing key " + key);
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const
    {
        if (!has(key)) return fallback;
        return to_double(key, get(key));
    }

    long long get_int(const std::string& key, long long fallback) const
    {
        if (!has(key)) return fallback;
        return to_int(key, get(key));
    }

    bool get_bool(const std::string& key, bool fallback) const
    {
        if (!has(key)) return fallback;
        const auto& v = get(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw Error(ErrorKind::ConfigError, key + ": expected boolean, got '" + v + "'");
    }

    void set(const std::string& key, const std::string& value)
    {
        if (!has(key)) order_.push_back(key);
        values_[key] = value;
    }

    /// Keys in first-seen order.
    const std::vector<std::string>& keys() const { return order_; }

    static double to_double(const std::string& key, const std::string& v)
    {
        try {
            std::size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos == v.size()) return d;
        } catch (const std::exception&) {
        }
        throw Error(ErrorKind::ConfigError, key + ": expected number, got '" + v + "'");
    }

    static long long to_int(const std::string& key, const std::string& v)
    {
        try {
            std::size_t pos = 0;
            long long d = std::stoll(v, &pos, 0);
            if (pos == v.size()) return d;
        } catch (const std::exception&) {
        }
        throw Error(ErrorKind::ConfigError, key + ": expected integer, got '" + v + "'");
    }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
};

} // namespace dramdse
