#pragma once

#include "rfvc/error.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rfvc {

inline constexpr std::size_t kNumLinks = 9;
inline constexpr std::size_t kNumNodesPerSide = 3;

/// Radio link identifier Phi_1..Phi_9.
class LinkId {
public:
    constexpr explicit LinkId(int index) : index_(index)
    {
        if (index < 1 || index > static_cast<int>(kNumLinks))
            throw ConfigError("link id out of range 1..9: " + std::to_string(index));
    }

    constexpr int value() const noexcept { return index_; }
    /// Zero-based position, for indexing per-link arrays.
    constexpr std::size_t slot() const noexcept { return static_cast<std::size_t>(index_ - 1); }
    constexpr bool is_straight() const noexcept { return index_ == 1 || index_ == 5 || index_ == 9; }

    static constexpr LinkId from_slot(std::size_t slot) { return LinkId(static_cast<int>(slot) + 1); }

    friend constexpr bool operator==(LinkId, LinkId) = default;
    friend constexpr auto operator<=>(LinkId, LinkId) = default;

private:
    int index_;
};

inline constexpr std::array<int, 3> kStraightLinks{1, 5, 9};

struct NodePair {
    std::size_t tx;
    std::size_t rx;
    friend constexpr bool operator==(NodePair, NodePair) = default;
};

/// Deployment geometry. Links are numbered row-major over (tx, rx) node
/// pairs, so Phi_1, Phi_5 and Phi_9 are the straight links and Phi_3 / Phi_7
/// are the two longest diagonals.
struct Topology {
    double longitudinal_spacing_m = 5.0;
    std::array<double, kNumNodesPerSide> tx_positions{0.0, 5.0, 10.0};
    std::array<double, kNumNodesPerSide> rx_positions{0.0, 5.0, 10.0};

    static Topology with_spacing(double spacing_m)
    {
        if (!(spacing_m > 0.0) || !std::isfinite(spacing_m))
            throw ConfigError("longitudinal spacing must be positive");
        Topology t;
        t.longitudinal_spacing_m = spacing_m;
        for (std::size_t i = 0; i < kNumNodesPerSide; ++i) {
            t.tx_positions[i] = spacing_m * static_cast<double>(i);
            t.rx_positions[i] = spacing_m * static_cast<double>(i);
        }
        return t;
    }

    static constexpr NodePair nodes_of(LinkId link) noexcept
    {
        return {link.slot() / kNumNodesPerSide, link.slot() % kNumNodesPerSide};
    }

    static constexpr LinkId link_of(NodePair p)
    {
        return LinkId(static_cast<int>(p.tx * kNumNodesPerSide + p.rx) + 1);
    }

    /// Longitudinal coordinate where the link crosses the lane centre.
    double crossing_position(LinkId link) const noexcept
    {
        const auto p = nodes_of(link);
        return 0.5 * (tx_positions[p.tx] + rx_positions[p.rx]);
    }

    /// Longitudinal extent between a link's two endpoints.
    double longitudinal_span(LinkId link) const noexcept
    {
        const auto p = nodes_of(link);
        return std::abs(tx_positions[p.tx] - rx_positions[p.rx]);
    }

    /// The link a vehicle travelling in the opposite direction sees in place
    /// of `link` (node order reversed on both sides).
    static constexpr LinkId mirrored(LinkId link)
    {
        const auto p = nodes_of(link);
        return link_of({kNumNodesPerSide - 1 - p.tx, kNumNodesPerSide - 1 - p.rx});
    }
};

/// Distance between the transmitter nodes of two straight links.
inline double link_distance(const Topology& topology, LinkId i, LinkId j)
{
    if (!i.is_straight() || !j.is_straight())
        throw ConfigError("link distance is only defined for straight links (1, 5, 9)");
    const auto a = Topology::nodes_of(i).tx;
    const auto b = Topology::nodes_of(j).tx;
    return std::abs(topology.tx_positions[a] - topology.tx_positions[b]);
}

struct SystemParams {
    int sample_period_ms = 8;
    int filter_size = 10;    // N
    int guard_w = 10;        // w
    int start_offset_h = 5;  // h
    double theta_start = 0.92;
    double theta_end = 0.975;
    double theta_guard = 0.95;

    void validate() const
    {
        if (sample_period_ms < 1)
            throw ConfigError("sample_period_ms must be >= 1");
        if (filter_size < 1)
            throw ConfigError("filter_size_N must be >= 1");
        if (guard_w < 1)
            throw ConfigError("guard_w must be >= 1");
        if (start_offset_h < 0)
            throw ConfigError("start_offset_h must be >= 0");
        if (!(0.0 < theta_start && theta_start < theta_guard && theta_guard < theta_end && theta_end < 1.0))
            throw ConfigError("thresholds must satisfy 0 < theta_start < theta_guard < theta_end < 1");
    }

    double sample_period_s() const noexcept { return sample_period_ms * 1e-3; }
};

enum class BodyStyle : int {
    passenger_car = 0,
    passenger_car_with_trailer,
    van,
    truck,
    truck_with_trailer,
    semitruck,
    bus,
};

inline constexpr std::array<std::string_view, 7> kBodyStyleNames{
    "passenger-car", "passenger-car-with-trailer", "van", "truck", "truck-with-trailer", "semitruck", "bus"};

inline std::optional<BodyStyle> parse_body_style(std::string_view name)
{
    for (std::size_t i = 0; i < kBodyStyleNames.size(); ++i)
        if (kBodyStyleNames[i] == name)
            return static_cast<BodyStyle>(i);
    return std::nullopt;
}

inline std::string_view to_string(BodyStyle b) { return kBodyStyleNames[static_cast<std::size_t>(b)]; }

enum class TaxonomyKind { binary, size_based, body_style };

struct Taxonomy {
    TaxonomyKind kind;
    std::string name;
    std::vector<std::string> classes;

    std::size_t size() const noexcept { return classes.size(); }

    static Taxonomy binary() { return {TaxonomyKind::binary, "binary", {"car-like", "truck-like"}}; }
    static Taxonomy size_based() { return {TaxonomyKind::size_based, "size_based", {"small", "mid-size", "large"}}; }
    static Taxonomy body_style()
    {
        return {TaxonomyKind::body_style, "body_style", {kBodyStyleNames.begin(), kBodyStyleNames.end()}};
    }

    static Taxonomy by_name(std::string_view name)
    {
        if (name == "binary")
            return binary();
        if (name == "size_based" || name == "size-based" || name == "size")
            return size_based();
        if (name == "body_style" || name == "body-style")
            return body_style();
        throw ConfigError("unknown taxonomy: " + std::string(name));
    }

    std::optional<std::size_t> find(std::string_view label) const
    {
        for (std::size_t i = 0; i < classes.size(); ++i)
            if (classes[i] == label)
                return i;
        return std::nullopt;
    }

    /// Class index for a dataset label: either a class of this taxonomy or a
    /// body-style label that is coarsened onto it.
    std::size_t index_of(std::string_view label) const;
};

/// Fine-to-coarse class map: {passenger car, car+trailer, van} are car-like,
/// the rest truck-like; passenger car is small, car+trailer and van mid-size,
/// truck-like classes large.
inline std::string coarsen_label(BodyStyle label, const Taxonomy& target)
{
    const bool car_like = label == BodyStyle::passenger_car || label == BodyStyle::passenger_car_with_trailer ||
                          label == BodyStyle::van;
    switch (target.kind) {
    case TaxonomyKind::binary:
        return car_like ? "car-like" : "truck-like";
    case TaxonomyKind::size_based:
        if (label == BodyStyle::passenger_car)
            return "small";
        return car_like ? "mid-size" : "large";
    case TaxonomyKind::body_style:
        return std::string(to_string(label));
    }
    throw ConfigError("unknown taxonomy kind");
}

inline std::string coarsen_label(std::string_view label, const Taxonomy& target)
{
    const auto body = parse_body_style(label);
    if (!body)
        throw ConfigError("unknown body-style label: " + std::string(label));
    return coarsen_label(*body, target);
}

inline std::size_t Taxonomy::index_of(std::string_view label) const
{
    if (auto direct = find(label))
        return *direct;
    if (parse_body_style(label))
        return *find(coarsen_label(label, *this));
    throw ConfigError("label '" + std::string(label) + "' does not belong to taxonomy " + name);
}

} // namespace rfvc
