#pragma once

// Internal delimiter-separated-values helpers: strict numeric parsing,
// deterministic formatting, delimiter sniffing.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sleephrv/types.hpp"

namespace sleephrv::dsv {

inline std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string strip(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::optional<double> parse_double(std::string_view token) {
    const std::string t = strip(token);
    if (t.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

// Full-precision round-trip formatting; used wherever reload fidelity matters.
inline std::string format_full(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Fixed 6-significant-digit formatting for report tables.
inline std::string format_sig(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Sniffs the column delimiter of a header line from {tab, comma, semicolon};
// falls back to comma.
inline char sniff_delimiter(std::string_view header) {
    for (char candidate : {'\t', ',', ';'}) {
        if (header.find(candidate) != std::string_view::npos) return candidate;
    }
    return ',';
}

inline std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace sleephrv::dsv
