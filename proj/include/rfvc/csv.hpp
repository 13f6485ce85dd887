#pragma once

#include "rfvc/error.hpp"

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace rfvc::csv {

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc())
        throw FormatError("cannot format number");
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view field, std::string_view what)
{
    double v{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw FormatError("invalid number in column '" + std::string(what) + "': '" + std::string(field) + "'");
    return v;
}

inline long long parse_int(std::string_view field, std::string_view what)
{
    long long v{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw FormatError("invalid integer in column '" + std::string(what) + "': '" + std::string(field) + "'");
    return v;
}

/// Splits one line on commas. No quoting: none of the formats need it.
inline std::vector<std::string_view> split(std::string_view line)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline std::string join(const std::vector<std::string>& fields)
{
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out += ',';
        out += fields[i];
    }
    return out;
}

inline void expect_header(std::string_view line, std::string_view header, std::string_view file)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    if (line != header)
        throw FormatError(std::string(file) + ": expected header '" + std::string(header) + "', got '" +
                          std::string(line) + "'");
}

} // namespace rfvc::csv
