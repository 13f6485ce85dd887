#pragma once

#include "rfvc/error.hpp"
#include "rfvc/rng.hpp"
#include "rfvc/topology.hpp"
#include "rfvc/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace rfvc {

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

/// Statistical description of one vehicle class' radio fingerprint.
/// Levels are normalized (idle = 1).
struct ClassTemplate {
    std::string label;
    MeanStd speed_kmh;
    MeanStd length_m;
    MeanStd min_level;  // min of the filtered straight-link signal
    MeanStd mean_level; // mean of the filtered straight-link signal over the attenuation phase
    double noise_std = 0.01;
    /// Attenuation depth relative to the straight links, per link.
    std::array<double, kNumLinks> link_depth{1.0, 0.8, 0.8, 0.8, 1.0, 0.8, 0.8, 0.8, 1.0};
    int lobes = 1;

    void validate() const
    {
        if (!(0.0 < min_level.mean && min_level.mean < mean_level.mean && mean_level.mean < 1.0))
            throw ConfigError(label + ": template requires 0 < min_level < mean_level < 1");
        if (!(speed_kmh.mean > 0.0) || !(length_m.mean > 0.0))
            throw ConfigError(label + ": template requires positive speed and length");
        if (speed_kmh.std < 0.0 || length_m.std < 0.0 || min_level.std < 0.0 || mean_level.std < 0.0 || noise_std < 0.0)
            throw ConfigError(label + ": standard deviations must be non-negative");
        if (speed_kmh.std * 3.0 >= speed_kmh.mean)
            throw ConfigError(label + ": speed spread admits non-positive speeds");
        if (lobes != 1 && lobes != 2)
            throw ConfigError(label + ": lobes must be 1 or 2");
        for (double f : link_depth)
            if (!(f > 0.0 && f <= 1.0))
                throw ConfigError(label + ": link depth factors must lie in (0, 1]");
        for (int s : kStraightLinks)
            if (link_depth[static_cast<std::size_t>(s - 1)] != 1.0)
                throw ConfigError(label + ": straight links must have depth factor 1");
    }
};

struct GeneratorOptions {
    double idle_dbm = -60.0;
    double idle_noise_db = 0.5;
    double lead_s = 0.5;
    double tail_s = 0.6;
    /// Raised-cosine edge length as a fraction of the attenuation duration.
    double edge_fraction = 0.1;
    /// Least distance of the plateau below theta_start.
    double plateau_margin = 0.02;
    /// Share of a single-lobe plateau covered by the notch (centred).
    double notch_width_fraction = 0.6;
    /// Level reached between the two lobes of trailer classes.
    double trailer_recovery = 0.94;
    /// Share of the plateau taken by the gap between trailer lobes.
    double trailer_gap_fraction = 0.15;
    double trailer_first_lobe_fraction = 0.55;
    double trailer_second_lobe_depth = 0.8;
};

// Phi_1 statistics of the two binary classes.
inline ClassTemplate car_like_template()
{
    ClassTemplate t;
    t.label = "car-like";
    t.speed_kmh = {40.47, 7.2};
    t.length_m = {5.22, 1.08};
    t.min_level = {0.72, 0.06};
    t.mean_level = {0.86, 0.03};
    t.noise_std = 0.012;
    return t;
}

inline ClassTemplate truck_like_template()
{
    ClassTemplate t;
    t.label = "truck-like";
    t.speed_kmh = {31.42, 5.4};
    t.length_m = {16.53, 3.3};
    t.min_level = {0.62, 0.05};
    t.mean_level = {0.77, 0.03};
    t.noise_std = 0.01;
    return t;
}

inline std::vector<ClassTemplate> binary_templates() { return {car_like_template(), truck_like_template()}; }

/// Seven body-style classes. Taller bodies block the diagonal links more.
inline std::vector<ClassTemplate> body_style_templates()
{
    auto make = [](BodyStyle b, MeanStd v, MeanStd l, MeanStd mn, MeanStd me, double noise, double diag,
                   double longdiag, int lobes) {
        ClassTemplate t;
        t.label = std::string(to_string(b));
        t.speed_kmh = v;
        t.length_m = l;
        t.min_level = mn;
        t.mean_level = me;
        t.noise_std = noise;
        t.link_depth = {1.0, diag, longdiag, diag, 1.0, diag, longdiag, diag, 1.0};
        t.lobes = lobes;
        return t;
    };
    return {
        make(BodyStyle::passenger_car, {42.0, 7.0}, {4.5, 0.35}, {0.74, 0.03}, {0.87, 0.02}, 0.012, 0.78, 0.70, 1),
        make(BodyStyle::passenger_car_with_trailer, {37.0, 6.0}, {9.2, 1.2}, {0.72, 0.035}, {0.86, 0.02}, 0.012, 0.80,
             0.72, 2),
        make(BodyStyle::van, {40.0, 7.0}, {5.5, 0.45}, {0.68, 0.03}, {0.84, 0.02}, 0.012, 0.85, 0.78, 1),
        make(BodyStyle::truck, {33.0, 6.0}, {12.5, 2.5}, {0.62, 0.035}, {0.775, 0.025}, 0.010, 0.91, 0.88, 1),
        make(BodyStyle::truck_with_trailer, {31.0, 5.0}, {16.8, 1.8}, {0.61, 0.035}, {0.77, 0.025}, 0.010, 0.91,
             0.88, 2),
        make(BodyStyle::semitruck, {31.0, 5.0}, {15.5, 1.8}, {0.605, 0.035}, {0.765, 0.025}, 0.010, 0.92, 0.89, 1),
        make(BodyStyle::bus, {32.0, 5.0}, {14.0, 1.5}, {0.60, 0.035}, {0.77, 0.025}, 0.010, 0.93, 0.90, 1),
    };
}

/// Relative class frequencies of the body-style corpus (2605 vehicles in
/// total, buses fewer than ten).
inline constexpr std::array<int, 7> kBodyStyleWeights{1420, 95, 370, 190, 210, 312, 8};

/// Splits `total` proportionally to `weights` (largest remainder), with at
/// least one sample per class.
inline std::vector<int> proportional_counts(std::span<const int> weights, int total)
{
    if (weights.empty())
        throw ConfigError("no class weights");
    if (total < static_cast<int>(weights.size()))
        throw ConfigError("total must allow at least one sample per class");
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<int> counts(weights.size());
    std::vector<std::pair<double, std::size_t>> rema;
    int assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = total * weights[i] / wsum;
        counts[i] = std::max(1, static_cast<int>(std::floor(exact)));
        assigned += counts[i];
        rema.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(rema.begin(), rema.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total; r = (r + 1) % rema.size()) {
        ++counts[rema[r].second];
        ++assigned;
    }
    while (assigned > total) {
        auto it = std::max_element(counts.begin(), counts.end());
        --*it;
        --assigned;
    }
    return counts;
}

namespace detail {

inline double raised_cosine_step(double x) // 0 at x<=0, 1 at x>=1
{
    if (x <= 0.0)
        return 0.0;
    if (x >= 1.0)
        return 1.0;
    return 0.5 * (1.0 - std::cos(std::numbers::pi * x));
}

inline double hann(double t, double a, double b) // bump on [a, b], peak 1
{
    if (b <= a || t <= a || t >= b)
        return 0.0;
    return 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * (t - a) / (b - a)));
}

/// Noise-free normalized attenuation shape relative to the link onset.
struct LobeShape {
    double fall = 0.0;  // start of falling edge
    double rise = 0.0;  // start of rising edge
    double edge = 0.0;  // edge length
    double plateau = 0.9;
    double notch_min = 0.7; // raw level at the deepest notch point
    int lobes = 1;
    double notch_width = 1.0;
    double gap_level = 0.94;
    double gap_fraction = 0.15;
    double first_fraction = 0.55;
    double second_depth = 0.8;

    double plateau_begin() const { return fall + edge; }

    double level(double t) const
    {
        const double trap = raised_cosine_step((t - fall) / edge) - raised_cosine_step((t - rise) / edge);
        double attenuation = (1.0 - plateau) * trap;
        const double a = plateau_begin();
        const double b = rise;
        const double notch = plateau - notch_min;
        if (lobes == 1) {
            const double margin = 0.5 * (1.0 - notch_width) * (b - a);
            attenuation += notch * hann(t, a + margin, b - margin);
        } else {
            const double len = b - a;
            const double gap = gap_fraction * len;
            const double split = a + first_fraction * len;
            attenuation += notch * hann(t, a, split - 0.5 * gap);
            attenuation += second_depth * notch * hann(t, split + 0.5 * gap, b);
            attenuation -= (gap_level - plateau) * hann(t, split - 0.5 * gap, split + 0.5 * gap);
        }
        return 1.0 - attenuation;
    }

    /// Causal moving average of `level` over n taps spaced by period.
    double filtered(double t, int n, double period) const
    {
        double s = 0.0;
        for (int j = 0; j < n; ++j)
            s += level(t - j * period);
        return s / n;
    }

    /// Time of the deepest point of the (last) notch.
    double first_notch_centre() const
    {
        if (lobes == 1)
            return 0.5 * (plateau_begin() + rise);
        const double len = rise - plateau_begin();
        const double split = plateau_begin() + first_fraction * len;
        return 0.5 * (plateau_begin() + split - 0.5 * gap_fraction * len);
    }

    double last_notch_centre() const
    {
        if (lobes == 1)
            return 0.5 * (plateau_begin() + rise);
        const double len = rise - plateau_begin();
        const double split = plateau_begin() + first_fraction * len;
        return 0.5 * (split + 0.5 * gap_fraction * len + rise);
    }
};

/// First time in [lo, hi] where f crosses `threshold`; f(lo) and f(hi) must
/// lie on opposite sides and f must be monotone in between.
template <typename F>
double bisect_crossing(F&& f, double lo, double hi, double threshold)
{
    const bool falling = f(lo) > threshold;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const bool above = f(mid) > threshold;
        if (above == falling)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Places the edges of `shape` so that, after the moving-average filter,
/// the detector's start rule fires at t = 0 and its end rule at t = duration.
inline void calibrate_edges(LobeShape& shape, double duration, const SystemParams& params)
{
    const double T = params.sample_period_s();
    const int N = params.filter_size;
    const double start_target = params.start_offset_h * T;
    const double delay = 0.5 * (N - 1) * T;
    auto filt = [&](double t) { return shape.filtered(t, N, T); };
    shape.fall = start_target - 0.5 * shape.edge;
    shape.rise = duration - 0.5 * shape.edge - delay;
    for (int iter = 0; iter < 3; ++iter) {
        shape.rise = std::max(shape.rise, shape.fall + shape.edge + T);
        const double start_cross =
            bisect_crossing(filt, shape.fall - T, shape.first_notch_centre() + delay, params.theta_start);
        const double end_cross = bisect_crossing(filt, shape.last_notch_centre() + delay,
                                                 shape.rise + shape.edge + (N + 1) * T, params.theta_end);
        shape.fall += start_target - start_cross;
        shape.rise += duration - end_cross;
    }
    shape.rise = std::max(shape.rise, shape.fall + shape.edge + T);
}

/// Fraction of a notch's depth that survives the moving-average filter.
inline double notch_retention(const LobeShape& shape, const SystemParams& params)
{
    LobeShape unit = shape;
    unit.plateau = 1.0;
    unit.notch_min = 0.0;
    unit.gap_level = 1.0;
    const double T = params.sample_period_s();
    const double centre = shape.first_notch_centre() + 0.5 * (params.filter_size - 1) * T;
    return 1.0 - unit.filtered(centre, params.filter_size, T);
}

/// Mean of the filtered shape over the sample grid covering [0, duration].
inline double segment_mean(const LobeShape& shape, double duration, const SystemParams& params)
{
    const double T = params.sample_period_s();
    double s = 0.0;
    int n = 0;
    for (double t = 0.0; t <= duration + 1e-12; t += T, ++n)
        s += shape.filtered(t, params.filter_size, T);
    return n ? s / n : 1.0;
}

/// Builds the straight-link shape for one vehicle: filtered minimum equal to
/// `min_level`, filtered segment mean as close to `mean_level` as the
/// plateau bounds allow.
inline LobeShape design_shape(double duration, double min_level, double mean_level, int lobes,
                              const SystemParams& params, const GeneratorOptions& opt)
{
    LobeShape shape;
    shape.edge = std::max(opt.edge_fraction * duration, params.sample_period_s());
    shape.lobes = lobes;
    shape.notch_width = opt.notch_width_fraction;
    shape.gap_level = opt.trailer_recovery;
    shape.gap_fraction = opt.trailer_gap_fraction;
    shape.first_fraction = opt.trailer_first_lobe_fraction;
    shape.second_depth = opt.trailer_second_lobe_depth;

    auto build = [&](double plateau) {
        shape.plateau = plateau;
        shape.notch_min = min_level;
        calibrate_edges(shape, duration, params);
        const double keep = notch_retention(shape, params);
        shape.notch_min = plateau - (plateau - min_level) / keep;
        calibrate_edges(shape, duration, params);
        return segment_mean(shape, duration, params);
    };

    double lo = min_level + 0.01;
    double hi = params.theta_start - opt.plateau_margin;
    if (lo >= hi)
        lo = hi - 1e-3;
    if (build(hi) <= mean_level)
        return shape;
    if (build(lo) >= mean_level)
        return shape;
    for (int it = 0; it < 12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (build(mid) < mean_level)
            lo = mid;
        else
            hi = mid;
    }
    build(0.5 * (lo + hi));
    return shape;
}

} // namespace detail

/// Idle RSSI of a link: longer diagonals are a little weaker.
inline double nominal_idle_dbm(const Topology& topology, LinkId link, const GeneratorOptions& opt)
{
    return opt.idle_dbm - 0.3 * topology.longitudinal_span(link);
}

/// Synthesises one forward-direction vehicle passage.
///
/// Vehicle speed is drawn through its pace (time per metre) so that the
/// attenuation duration length/speed is unbiased with respect to the
/// template's mean length over mean speed. Every draw is a normal truncated
/// at three standard deviations. On each link the vehicle front reaches the
/// link's lane crossing at lead + position / speed; the straight-link
/// attenuation lasts length / speed as seen by the detector.
inline TraceBundle generate_trace(const ClassTemplate& tmpl, const Topology& topology, const SystemParams& params,
                                  std::uint64_t seed, const GeneratorOptions& opt = {})
{
    tmpl.validate();
    params.validate();
    Rng rng(seed);

    const double mean_pace = 1.0 / tmpl.speed_kmh.mean;
    const double pace_std = tmpl.speed_kmh.std / (tmpl.speed_kmh.mean * tmpl.speed_kmh.mean);
    double speed_kmh = 0.0;
    while (!(speed_kmh > 0.0))
        speed_kmh = 1.0 / rng.truncated_normal(mean_pace, pace_std);
    const double speed = speed_kmh / 3.6;
    const double length = std::max(0.5, rng.truncated_normal(tmpl.length_m.mean, tmpl.length_m.std));
    const double min_level =
        std::clamp(rng.truncated_normal(tmpl.min_level.mean, tmpl.min_level.std), 0.3, params.theta_start - 0.02);
    const double mean_level = rng.truncated_normal(tmpl.mean_level.mean, tmpl.mean_level.std);
    const double T = params.sample_period_s();
    const double lead = opt.lead_s + T * rng.uniform01();

    const double duration = length / speed;
    const auto shape = detail::design_shape(duration, min_level, mean_level, tmpl.lobes, params, opt);

    std::array<double, kNumLinks> onset{};
    double last_onset = 0.0;
    for (std::size_t l = 0; l < kNumLinks; ++l) {
        onset[l] = lead + topology.crossing_position(LinkId::from_slot(l)) / speed;
        last_onset = std::max(last_onset, onset[l]);
    }
    const double span = last_onset + shape.rise + shape.edge + opt.tail_s;
    const auto samples = static_cast<std::size_t>(std::ceil(span / T)) + 1;

    TraceBundle bundle;
    bundle.sample_period_ms = params.sample_period_ms;
    bundle.t0_ms = 0;
    for (std::size_t l = 0; l < kNumLinks; ++l) {
        const double depth = tmpl.link_depth[l];
        const double idle = nominal_idle_dbm(topology, LinkId::from_slot(l), opt);
        auto& stream = bundle.rssi_dbm[l];
        stream.resize(samples);
        for (std::size_t k = 0; k < samples; ++k) {
            const double t = static_cast<double>(k) * T - onset[l];
            const double clean = 1.0 - depth * (1.0 - shape.level(t));
            const double weight = std::clamp((1.0 - clean) / (1.0 - shape.notch_min), 0.0, 1.0);
            const double level = clean + tmpl.noise_std * weight * rng.normal();
            stream[k] = idle * level + opt.idle_noise_db * rng.normal();
        }
    }
    bundle.idle_level_dbm = estimate_idle_levels(bundle);
    bundle.truth = GroundTruth{tmpl.label, speed, length, +1};
    return bundle;
}

struct LabeledTrace {
    TraceBundle trace;
    std::string label;
};

/// counts[i] traces of templates[i], in template order. Trace j (global
/// index) uses a seed derived from (seed, j).
inline std::vector<LabeledTrace> generate_dataset(std::span<const ClassTemplate> templates, std::span<const int> counts,
                                                  std::uint64_t seed, const Topology& topology = {},
                                                  const SystemParams& params = {}, const GeneratorOptions& opt = {})
{
    if (templates.empty())
        throw ConfigError("generate_dataset: empty template list");
    if (counts.size() != templates.size())
        throw ConfigError("generate_dataset: one count per template required");
    for (int c : counts)
        if (c < 1)
            throw ConfigError("generate_dataset: every class needs at least one trace");
    std::vector<LabeledTrace> out;
    out.reserve(static_cast<std::size_t>(std::accumulate(counts.begin(), counts.end(), 0)));
    std::uint64_t index = 0;
    for (std::size_t c = 0; c < templates.size(); ++c)
        for (int i = 0; i < counts[c]; ++i)
            out.push_back({generate_trace(templates[c], topology, params, derive_seed(seed, index++), opt),
                           templates[c].label});
    return out;
}

/// Mirrors the deployment so the vehicle appears to travel the other way:
/// each stream moves to the link obtained by reversing the node order.
inline TraceBundle invert_direction(const TraceBundle& trace)
{
    TraceBundle out = trace;
    for (std::size_t l = 0; l < kNumLinks; ++l) {
        const auto target = Topology::mirrored(LinkId::from_slot(l)).slot();
        out.rssi_dbm[target] = trace.rssi_dbm[l];
        out.idle_level_dbm[target] = trace.idle_level_dbm[l];
    }
    if (out.truth)
        out.truth->direction = -out.truth->direction;
    return out;
}

/// Appends traces back to back into one continuous stream (one vehicle
/// after another). Sample periods must agree.
inline TraceBundle concatenate(std::span<const TraceBundle> traces)
{
    TraceBundle out;
    if (traces.empty())
        return out;
    out.sample_period_ms = traces.front().sample_period_ms;
    out.t0_ms = traces.front().t0_ms;
    for (const auto& t : traces) {
        if (t.sample_period_ms != out.sample_period_ms)
            throw ConfigError("concatenate: sample periods differ");
        for (std::size_t l = 0; l < kNumLinks; ++l)
            out.rssi_dbm[l].insert(out.rssi_dbm[l].end(), t.rssi_dbm[l].begin(), t.rssi_dbm[l].end());
    }
    out.idle_level_dbm = estimate_idle_levels(out);
    return out;
}

} // namespace rfvc
