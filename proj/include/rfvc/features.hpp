#pragma once

#include "rfvc/csv.hpp"
#include "rfvc/detector.hpp"
#include "rfvc/error.hpp"
#include "rfvc/topology.hpp"
#include "rfvc/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace rfvc {

inline constexpr std::size_t kGlobalFeatures = 2;
inline constexpr std::size_t kLinkBlock = 10;
inline constexpr std::size_t kHistBins = 6;
inline constexpr std::size_t kFeatureDim = kGlobalFeatures + kNumLinks * kLinkBlock; // 92

/// Histogram bin edges over the normalized level. Values outside the range
/// fall into the first or last bin.
inline constexpr std::array<double, kHistBins + 1> kHistEdges{0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1};

inline std::size_t histogram_bin(double level) noexcept
{
    std::size_t b = 0;
    while (b + 1 < kHistBins && level >= kHistEdges[b + 1])
        ++b;
    return b;
}

/// Offset of the first feature of link `link` in the full vector.
constexpr std::size_t link_block_offset(LinkId link) noexcept { return kGlobalFeatures + link.slot() * kLinkBlock; }

struct FeatureVector {
    std::array<double, kFeatureDim> values{};
    bool speed_missing = false;
    std::array<bool, kNumLinks> link_missing{};

    std::span<const double, kLinkBlock> block(LinkId link) const
    {
        return std::span<const double, kLinkBlock>(values.data() + link_block_offset(link), kLinkBlock);
    }
};

/// Column names in feature order: v_kmh, l_m, phi1_tau .. phi9_hist6.
inline std::vector<std::string> feature_names()
{
    std::vector<std::string> names{"v_kmh", "l_m"};
    for (std::size_t l = 1; l <= kNumLinks; ++l) {
        const std::string p = "phi" + std::to_string(l) + "_";
        for (const char* s : {"tau", "min", "mean", "std"})
            names.push_back(p + s);
        for (std::size_t b = 1; b <= kHistBins; ++b)
            names.push_back(p + "hist" + std::to_string(b));
    }
    return names;
}

/// Per-link block from the attenuation duration and the filtered levels of
/// the attenuation phase.
inline std::array<double, kLinkBlock> link_features(double tau_s, std::span<const double> segment)
{
    std::array<double, kLinkBlock> out{};
    out[0] = tau_s;
    if (segment.empty())
        return out;
    const double n = static_cast<double>(segment.size());
    double mn = segment[0], sum = 0.0;
    for (double v : segment) {
        mn = std::min(mn, v);
        sum += v;
    }
    const double mean = sum / n;
    double ss = 0.0;
    std::array<std::size_t, kHistBins> hist{};
    for (double v : segment) {
        ss += (v - mean) * (v - mean);
        ++hist[histogram_bin(v)];
    }
    out[1] = mn;
    out[2] = mean;
    out[3] = std::sqrt(ss / n);
    for (std::size_t b = 0; b < kHistBins; ++b)
        out[4 + b] = static_cast<double>(hist[b]) / n;
    return out;
}

/// `segments[l]` holds the filtered levels of link l+1 during its event.
inline FeatureVector extract_features(const VehicleObservation& obs,
                                      const std::array<std::span<const double>, kNumLinks>& segments)
{
    FeatureVector fv;
    if (obs.speed.available() && obs.length_m) {
        fv.values[0] = std::abs(obs.speed.mps) * 3.6;
        fv.values[1] = *obs.length_m;
    } else {
        fv.speed_missing = true;
    }
    for (std::size_t l = 0; l < kNumLinks; ++l) {
        const auto link = LinkId::from_slot(l);
        const auto& e = obs.event(link);
        if (!e) {
            fv.link_missing[l] = true;
            continue;
        }
        const auto block = link_features(e->duration_s(), segments[l]);
        std::copy(block.begin(), block.end(), fv.values.begin() + static_cast<std::ptrdiff_t>(link_block_offset(link)));
    }
    return fv;
}

/// Segment views of `obs` into the filtered series of `analysis`
/// (indices start..end inclusive).
inline std::array<std::span<const double>, kNumLinks> event_segments(const VehicleObservation& obs,
                                                                      const TraceAnalysis& analysis)
{
    std::array<std::span<const double>, kNumLinks> seg{};
    for (std::size_t l = 0; l < kNumLinks; ++l) {
        const auto& e = obs.events[l];
        if (!e)
            continue;
        const auto& v = analysis.series[l].values;
        const std::size_t end = std::min(e->end_index + 1, v.size());
        if (e->start_index < end)
            seg[l] = std::span<const double>(v.data() + e->start_index, end - e->start_index);
    }
    return seg;
}

inline FeatureVector extract_features(const VehicleObservation& obs, const TraceAnalysis& analysis)
{
    return extract_features(obs, event_segments(obs, analysis));
}

/// Observation with the most links; earliest on ties.
inline const VehicleObservation* primary_vehicle(const TraceAnalysis& analysis)
{
    const VehicleObservation* best = nullptr;
    for (const auto& v : analysis.vehicles)
        if (!best || v.link_count() > best->link_count())
            best = &v;
    return best;
}

/// Features of the single vehicle recorded in `trace`, if one was detected.
inline std::optional<FeatureVector> trace_features(const TraceBundle& trace, const Topology& topology,
                                                   const SystemParams& params)
{
    const auto analysis = analyze_trace(trace, topology, params);
    const auto* v = primary_vehicle(analysis);
    if (!v)
        return std::nullopt;
    return extract_features(*v, analysis);
}

/// Labelled feature rows. `labels` are dataset labels (usually body styles)
/// that a Taxonomy maps onto class indices.
struct FeatureTable {
    std::vector<FeatureVector> rows;
    std::vector<std::string> labels;

    std::size_t size() const noexcept { return rows.size(); }
};

inline constexpr std::string_view kFeatureLabelColumn = "label";

inline void write_feature_csv(std::ostream& out, const FeatureTable& table)
{
    out << kFeatureLabelColumn;
    for (const auto& n : feature_names())
        out << ',' << n;
    out << '\n';
    for (std::size_t r = 0; r < table.size(); ++r) {
        out << table.labels[r];
        for (double v : table.rows[r].values)
            out << ',' << csv::format_double(v);
        out << '\n';
    }
}

/// Missing-data flags are not stored; they are recovered from zero blocks.
inline FeatureTable read_feature_csv(std::istream& in, std::string_view name = "features")
{
    std::string header = std::string(kFeatureLabelColumn);
    for (const auto& n : feature_names())
        header += "," + n;
    std::string line;
    if (!std::getline(in, line))
        throw FormatError(std::string(name) + ": missing header");
    csv::expect_header(line, header, name);
    FeatureTable table;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        const auto f = csv::split(line);
        if (f.size() != kFeatureDim + 1)
            throw FormatError(std::string(name) + ": expected " + std::to_string(kFeatureDim + 1) + " columns");
        FeatureVector fv;
        for (std::size_t i = 0; i < kFeatureDim; ++i)
            fv.values[i] = csv::parse_double(f[i + 1], "feature");
        fv.speed_missing = fv.values[0] == 0.0 && fv.values[1] == 0.0;
        for (std::size_t l = 0; l < kNumLinks; ++l) {
            const auto b = fv.block(LinkId::from_slot(l));
            fv.link_missing[l] = std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; });
        }
        table.rows.push_back(fv);
        table.labels.emplace_back(f[0]);
    }
    return table;
}

/// Per-dimension min-max map onto [-1, 1], fit on training rows only.
struct ScalingTransform {
    std::vector<double> lo;
    std::vector<double> hi;

    std::size_t dim() const noexcept { return lo.size(); }

    static ScalingTransform fit(std::span<const std::vector<double>> rows)
    {
        if (rows.empty())
            throw ConfigError("fit_scaling: empty training set");
        ScalingTransform t;
        t.lo = rows.front();
        t.hi = rows.front();
        for (const auto& r : rows) {
            if (r.size() != t.dim())
                throw ConfigError("fit_scaling: rows differ in dimension");
            for (std::size_t i = 0; i < r.size(); ++i) {
                t.lo[i] = std::min(t.lo[i], r[i]);
                t.hi[i] = std::max(t.hi[i], r[i]);
            }
        }
        return t;
    }

    double apply(std::size_t i, double x) const
    {
        if (!(hi[i] > lo[i]))
            return 0.0;
        const double v = (x - lo[i]) / (hi[i] - lo[i]) * 2.0 - 1.0;
        return std::clamp(v, -1.0, 1.0);
    }

    std::vector<double> apply(std::span<const double> x) const
    {
        if (x.size() != dim())
            throw ConfigError("apply_scaling: dimension mismatch");
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            out[i] = apply(i, x[i]);
        return out;
    }
};

/// Feature group of every column: 0 is the global group G, 1..9 the link
/// groups Phi_1..Phi_9.
struct GroupIndex {
    std::vector<int> group_of;

    static GroupIndex full()
    {
        GroupIndex g;
        g.group_of.assign(kGlobalFeatures, 0);
        for (std::size_t l = 1; l <= kNumLinks; ++l)
            g.group_of.insert(g.group_of.end(), kLinkBlock, static_cast<int>(l));
        return g;
    }

    /// Layout of a reduced vector: the global pair followed by the blocks of
    /// `links` in ascending order.
    static GroupIndex for_links(std::span<const int> links)
    {
        GroupIndex g;
        g.group_of.assign(kGlobalFeatures, 0);
        for (int l : links)
            g.group_of.insert(g.group_of.end(), kLinkBlock, l);
        return g;
    }

    std::size_t dim() const noexcept { return group_of.size(); }
    static constexpr std::size_t group_count() { return kNumLinks + 1; }
};

inline std::string group_name(int group) { return group == 0 ? "G" : "phi" + std::to_string(group); }

} // namespace rfvc
