#pragma once

#include "rfvc/csv.hpp"
#include "rfvc/error.hpp"
#include "rfvc/topology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace rfvc {

struct RssiSample {
    std::int64_t t_ms;
    LinkId link;
    double rssi_dbm;
};

struct GroundTruth {
    std::string label;
    double speed_mps = 0.0;
    double length_m = 0.0;
    int direction = +1; // +1 forward, -1 reversed
};

/// Number of leading samples averaged to estimate a link's idle level.
inline constexpr std::size_t kIdleWindow = 32;

/// Nine time-synchronised RSSI streams. Sample k of every link is taken at
/// t0_ms + k * sample_period_ms.
struct TraceBundle {
    int sample_period_ms = 8;
    std::int64_t t0_ms = 0;
    std::array<std::vector<double>, kNumLinks> rssi_dbm;
    std::array<double, kNumLinks> idle_level_dbm{};
    std::optional<GroundTruth> truth;

    std::size_t samples_per_link() const noexcept { return rssi_dbm[0].size(); }
    bool empty() const noexcept { return samples_per_link() == 0; }
    std::int64_t time_of(std::size_t k) const noexcept
    {
        return t0_ms + static_cast<std::int64_t>(k) * sample_period_ms;
    }
    const std::vector<double>& stream(LinkId link) const { return rssi_dbm[link.slot()]; }

    void validate() const
    {
        const auto n = samples_per_link();
        for (const auto& s : rssi_dbm)
            if (s.size() != n)
                throw FormatError("trace streams differ in length");
        for (double idle : idle_level_dbm)
            if (n > 0 && !(std::isfinite(idle) && idle < 0.0))
                throw FormatError("idle levels must be finite and negative");
        if (truth && (!(truth->length_m > 0.0) || truth->speed_mps == 0.0))
            throw FormatError("ground truth requires length > 0 and speed != 0");
    }

    friend bool operator==(const TraceBundle& a, const TraceBundle& b)
    {
        auto truth_eq = [](const std::optional<GroundTruth>& x, const std::optional<GroundTruth>& y) {
            if (x.has_value() != y.has_value())
                return false;
            if (!x)
                return true;
            return x->label == y->label && x->speed_mps == y->speed_mps && x->length_m == y->length_m &&
                   x->direction == y->direction;
        };
        return a.sample_period_ms == b.sample_period_ms && a.t0_ms == b.t0_ms && a.rssi_dbm == b.rssi_dbm &&
               a.idle_level_dbm == b.idle_level_dbm && truth_eq(a.truth, b.truth);
    }
};

/// Idle level per link from the leading kIdleWindow samples (traces start idle).
inline std::array<double, kNumLinks> estimate_idle_levels(const TraceBundle& bundle)
{
    std::array<double, kNumLinks> idle{};
    for (std::size_t l = 0; l < kNumLinks; ++l) {
        const auto& s = bundle.rssi_dbm[l];
        const std::size_t n = std::min(kIdleWindow, s.size());
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            sum += s[k];
        idle[l] = n ? sum / static_cast<double>(n) : 0.0;
    }
    return idle;
}

inline constexpr std::string_view kTraceHeader = "t_ms,link,rssi_dbm";

inline void write_trace_csv(std::ostream& out, const TraceBundle& bundle)
{
    out << kTraceHeader << '\n';
    for (std::size_t k = 0; k < bundle.samples_per_link(); ++k) {
        const auto t = bundle.time_of(k);
        for (std::size_t l = 0; l < kNumLinks; ++l)
            out << t << ',' << (l + 1) << ',' << csv::format_double(bundle.rssi_dbm[l][k]) << '\n';
    }
}

/// Parses a trace CSV. Rows must be sorted by t_ms then link and every
/// epoch must carry all nine links. Idle levels are re-estimated.
inline TraceBundle read_trace_csv(std::istream& in, std::string_view name = "trace")
{
    std::string line;
    if (!std::getline(in, line))
        throw FormatError(std::string(name) + ": missing header");
    csv::expect_header(line, kTraceHeader, name);

    TraceBundle bundle;
    std::vector<std::int64_t> epochs;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        const auto f = csv::split(line);
        if (f.size() != 3)
            throw FormatError(std::string(name) + ": expected 3 columns on data row " + std::to_string(row + 1));
        const auto t = static_cast<std::int64_t>(csv::parse_int(f[0], "t_ms"));
        const auto link = csv::parse_int(f[1], "link");
        const double v = csv::parse_double(f[2], "rssi_dbm");
        const auto expected_link = static_cast<long long>(row % kNumLinks) + 1;
        if (link != expected_link)
            throw FormatError(std::string(name) + ": rows must be sorted by t_ms then link (row " +
                              std::to_string(row + 1) + ")");
        if (link == 1)
            epochs.push_back(t);
        else if (t != epochs.back())
            throw FormatError(std::string(name) + ": links of one epoch must share a timestamp");
        bundle.rssi_dbm[static_cast<std::size_t>(link - 1)].push_back(v);
        ++row;
    }
    if (row % kNumLinks != 0)
        throw FormatError(std::string(name) + ": incomplete final epoch");
    if (!epochs.empty())
        bundle.t0_ms = epochs.front();
    if (epochs.size() >= 2) {
        const auto period = epochs[1] - epochs[0];
        if (period <= 0)
            throw FormatError(std::string(name) + ": timestamps must increase");
        for (std::size_t k = 1; k < epochs.size(); ++k)
            if (epochs[k] - epochs[k - 1] != period)
                throw FormatError(std::string(name) + ": samples must be equally spaced");
        bundle.sample_period_ms = static_cast<int>(period);
    }
    bundle.idle_level_dbm = estimate_idle_levels(bundle);
    return bundle;
}

inline void save_trace(const std::string& path, const TraceBundle& bundle)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("cannot write " + path);
    write_trace_csv(out, bundle);
}

inline TraceBundle load_trace(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open " + path);
    return read_trace_csv(in, path);
}

struct LabelRecord {
    std::string trace_file;
    std::string label;
    double speed_mps = 0.0;
    double length_m = 0.0;
    int direction = +1;
};

inline constexpr std::string_view kLabelHeader = "trace_file,label,speed_mps,length_m,direction";

inline void write_labels_csv(std::ostream& out, const std::vector<LabelRecord>& records)
{
    out << kLabelHeader << '\n';
    for (const auto& r : records)
        out << r.trace_file << ',' << r.label << ',' << csv::format_double(r.speed_mps) << ','
            << csv::format_double(r.length_m) << ',' << r.direction << '\n';
}

inline std::vector<LabelRecord> read_labels_csv(std::istream& in, std::string_view name = "labels")
{
    std::string line;
    if (!std::getline(in, line))
        throw FormatError(std::string(name) + ": missing header");
    csv::expect_header(line, kLabelHeader, name);
    std::vector<LabelRecord> out;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        const auto f = csv::split(line);
        if (f.size() != 5)
            throw FormatError(std::string(name) + ": expected 5 columns");
        LabelRecord r;
        r.trace_file = std::string(f[0]);
        r.label = std::string(f[1]);
        r.speed_mps = csv::parse_double(f[2], "speed_mps");
        r.length_m = csv::parse_double(f[3], "length_m");
        const auto dir = csv::parse_int(f[4], "direction");
        if (dir != 1 && dir != -1)
            throw FormatError(std::string(name) + ": direction must be 1 or -1");
        r.direction = static_cast<int>(dir);
        out.push_back(std::move(r));
    }
    return out;
}

/// Feeds all samples to `sink` epoch by epoch, links 1..9 within an epoch
/// (token-ring order).
template <typename Sink>
void replay(const TraceBundle& trace, Sink&& sink)
{
    for (std::size_t k = 0; k < trace.samples_per_link(); ++k) {
        const auto t = trace.time_of(k);
        for (std::size_t l = 0; l < kNumLinks; ++l)
            sink(RssiSample{t, LinkId::from_slot(l), trace.rssi_dbm[l][k]});
    }
}

} // namespace rfvc
