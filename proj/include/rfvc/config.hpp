#pragma once

#include "rfvc/error.hpp"
#include "rfvc/topology.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

namespace rfvc {

struct SystemConfig {
    Topology topology;
    SystemParams params;
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text, const std::string& key)
{
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw FormatError("invalid value for '" + key + "': " + text);
    return value;
}

} // namespace detail

/// Reads `key = value` lines; '#' starts a comment. Keys not listed below are
/// rejected. Missing keys keep their defaults.
inline SystemConfig parse_system_config(std::istream& in)
{
    SystemConfig cfg;
    double spacing = cfg.topology.longitudinal_spacing_m;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        const std::string stripped = detail::trim(line);
        if (stripped.empty())
            continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw FormatError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(std::string_view(stripped).substr(0, eq));
        const std::string value = detail::trim(std::string_view(stripped).substr(eq + 1));

        if (key == "longitudinal_spacing_m")
            spacing = detail::parse_number<double>(value, key);
        else if (key == "sample_period_ms")
            cfg.params.sample_period_ms = detail::parse_number<int>(value, key);
        else if (key == "filter_size_N")
            cfg.params.filter_size = detail::parse_number<int>(value, key);
        else if (key == "guard_w")
            cfg.params.guard_w = detail::parse_number<int>(value, key);
        else if (key == "start_offset_h")
            cfg.params.start_offset_h = detail::parse_number<int>(value, key);
        else if (key == "theta_start")
            cfg.params.theta_start = detail::parse_number<double>(value, key);
        else if (key == "theta_end")
            cfg.params.theta_end = detail::parse_number<double>(value, key);
        else if (key == "theta_guard")
            cfg.params.theta_guard = detail::parse_number<double>(value, key);
        else
            throw ConfigError("unknown config key '" + key + "' on line " + std::to_string(lineno));
    }
    cfg.topology = Topology::with_spacing(spacing);
    cfg.params.validate();
    return cfg;
}

inline SystemConfig parse_system_config(const std::string& text)
{
    std::istringstream in(text);
    return parse_system_config(in);
}

inline SystemConfig load_system_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open config file: " + path);
    return parse_system_config(in);
}

/// Inverse of parse_system_config.
inline std::string format_system_config(const SystemConfig& cfg)
{
    std::ostringstream out;
    out.precision(17);
    out << "longitudinal_spacing_m = " << cfg.topology.longitudinal_spacing_m << '\n'
        << "sample_period_ms = " << cfg.params.sample_period_ms << '\n'
        << "filter_size_N = " << cfg.params.filter_size << '\n'
        << "guard_w = " << cfg.params.guard_w << '\n'
        << "start_offset_h = " << cfg.params.start_offset_h << '\n'
        << "theta_start = " << cfg.params.theta_start << '\n'
        << "theta_end = " << cfg.params.theta_end << '\n'
        << "theta_guard = " << cfg.params.theta_guard << '\n';
    return out.str();
}

} // namespace rfvc
