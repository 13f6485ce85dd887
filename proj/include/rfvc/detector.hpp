#pragma once

#include "rfvc/error.hpp"
#include "rfvc/topology.hpp"
#include "rfvc/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

namespace rfvc {

/// Normalized, moving-average filtered level of one link.
struct FilteredSeries {
    LinkId link{1};
    std::vector<double> values;
    std::int64_t t0_ms = 0;
    int sample_period_ms = 8;

    std::int64_t time_of(std::size_t k) const noexcept
    {
        return t0_ms + static_cast<std::int64_t>(k) * sample_period_ms;
    }
    std::size_t size() const noexcept { return values.size(); }
};

/// Streaming form of the normalization + moving-average filter. Before N
/// samples have arrived the window grows from one sample.
class LevelFilter {
public:
    LevelFilter(double idle_level, int filter_size) : idle_(idle_level), n_(filter_size)
    {
        if (filter_size < 1)
            throw ConfigError("filter size must be >= 1");
        if (idle_level == 0.0 || !std::isfinite(idle_level))
            throw ConfigError("idle level must be finite and non-zero");
    }

    double push(double raw)
    {
        window_.push_back(raw / idle_);
        if (window_.size() > static_cast<std::size_t>(n_))
            window_.pop_front();
        double s = 0.0;
        for (double v : window_)
            s += v;
        return s / static_cast<double>(window_.size());
    }

private:
    double idle_;
    int n_;
    std::deque<double> window_;
};

inline FilteredSeries normalize_and_filter(std::span<const double> stream, double idle_level, int filter_size,
                                           LinkId link = LinkId(1), std::int64_t t0_ms = 0,
                                           int sample_period_ms = 8)
{
    FilteredSeries out{link, {}, t0_ms, sample_period_ms};
    if (stream.empty())
        return out;
    LevelFilter filter(idle_level, filter_size);
    out.values.reserve(stream.size());
    for (double raw : stream)
        out.values.push_back(filter.push(raw));
    return out;
}

struct AttenuationEvent {
    LinkId link{1};
    std::int64_t t_start_ms = 0;
    std::int64_t t_end_ms = 0;
    int vehicle_id = -1;
    double min_level = 1.0;
    std::size_t start_index = 0;
    std::size_t end_index = 0;

    double duration_s() const noexcept { return static_cast<double>(t_end_ms - t_start_ms) / 1000.0; }
};

/// Two-state attenuation detector for one link. Decisions look at the value
/// w samples back, so a transition for index k - w is taken when sample k
/// arrives.
class AttenuationDetector {
public:
    AttenuationDetector(LinkId link, const SystemParams& params, std::int64_t t0_ms = 0)
        : link_(link), params_(params), t0_ms_(t0_ms)
    {
        params_.validate();
    }

    std::optional<AttenuationEvent> push(double level)
    {
        values_.push_back(level);
        const auto w = static_cast<std::size_t>(params_.guard_w);
        const std::size_t k = values_.size() - 1;
        if (k < w)
            return std::nullopt;
        const std::size_t lag = k - w;
        const double v = values_[lag];
        if (!attenuated_) {
            if (v < params_.theta_start) {
                const auto h = static_cast<std::size_t>(params_.start_offset_h);
                // the look-back never reaches into the previous event
                start_ = std::max(lag >= h ? lag - h : 0, next_free_);
                attenuated_ = true;
            }
            return std::nullopt;
        }
        if (v > params_.theta_end) {
            double guard = 0.0;
            for (std::size_t j = k + 1 - w; j <= k; ++j)
                guard += values_[j];
            guard /= static_cast<double>(w);
            if (guard >= params_.theta_guard) {
                attenuated_ = false;
                next_free_ = lag + 1;
                AttenuationEvent e;
                e.link = link_;
                e.start_index = start_;
                e.end_index = lag;
                e.t_start_ms = time_of(start_);
                e.t_end_ms = time_of(lag);
                e.min_level = *std::min_element(values_.begin() + static_cast<std::ptrdiff_t>(start_),
                                                values_.begin() + static_cast<std::ptrdiff_t>(lag) + 1);
                return e;
            }
        }
        return std::nullopt;
    }

    bool attenuated() const noexcept { return attenuated_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::int64_t time_of(std::size_t k) const noexcept
    {
        return t0_ms_ + static_cast<std::int64_t>(k) * params_.sample_period_ms;
    }

    LinkId link_;
    SystemParams params_;
    std::int64_t t0_ms_;
    std::vector<double> values_;
    bool attenuated_ = false;
    std::size_t start_ = 0;
    std::size_t next_free_ = 0;
};

struct LinkDetection {
    std::vector<AttenuationEvent> events;
    bool too_short = false;   // fewer than w + h samples
    bool unterminated = false; // series ended while attenuated
};

inline LinkDetection detect_events(const FilteredSeries& series, const SystemParams& params)
{
    params.validate();
    LinkDetection out;
    if (series.size() < static_cast<std::size_t>(params.guard_w + params.start_offset_h)) {
        out.too_short = true;
        return out;
    }
    SystemParams p = params;
    p.sample_period_ms = series.sample_period_ms;
    AttenuationDetector fsm(series.link, p, series.t0_ms);
    for (double v : series.values)
        if (auto e = fsm.push(v))
            out.events.push_back(*e);
    out.unterminated = fsm.attenuated();
    return out;
}

enum class SpeedStatus { ok, missing_link, undefined };
enum class Direction { unknown, forward, wrong_way };

struct SpeedEstimate {
    SpeedStatus status = SpeedStatus::missing_link;
    double mps = 0.0;
    bool low_confidence = false;

    bool available() const noexcept { return status == SpeedStatus::ok; }
};

struct VehicleObservation {
    int vehicle_id = 0;
    std::array<std::optional<AttenuationEvent>, kNumLinks> events;
    SpeedEstimate speed;
    std::optional<double> length_m;

    const std::optional<AttenuationEvent>& event(LinkId link) const { return events[link.slot()]; }
    std::size_t link_count() const
    {
        return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](auto& e) { return e.has_value(); }));
    }
    Direction direction() const noexcept
    {
        if (!speed.available())
            return Direction::unknown;
        return speed.mps < 0.0 ? Direction::wrong_way : Direction::forward;
    }
};

/// Groups events of all links into vehicles. Events belong together when
/// their intervals widened by `guard_ms` on both sides overlap the group;
/// a link that fires again starts the next vehicle.
inline std::vector<VehicleObservation> associate_vehicles(std::vector<AttenuationEvent> events, std::int64_t guard_ms)
{
    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
        return a.t_start_ms != b.t_start_ms ? a.t_start_ms < b.t_start_ms : a.link < b.link;
    });
    std::vector<VehicleObservation> out;
    std::int64_t group_end = 0;
    for (auto& e : events) {
        const bool joins = !out.empty() && e.t_start_ms - guard_ms <= group_end && !out.back().event(e.link);
        if (!joins) {
            VehicleObservation obs;
            obs.vehicle_id = static_cast<int>(out.size());
            out.push_back(obs);
            group_end = e.t_end_ms + guard_ms;
        }
        e.vehicle_id = out.back().vehicle_id;
        out.back().events[e.link.slot()] = e;
        group_end = std::max(group_end, e.t_end_ms + guard_ms);
    }
    return out;
}

namespace detail {

/// Sum in order of increasing magnitude, so that negating every term
/// negates the result exactly regardless of input order.
template <std::size_t M>
double symmetric_sum(std::array<double, M> terms)
{
    std::sort(terms.begin(), terms.end(), [](double a, double b) {
        return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
    });
    double s = 0.0;
    for (double t : terms)
        s += t;
    return s;
}

} // namespace detail

/// Average of the three pairwise straight-link speeds d(i,j) / (t_start(j) -
/// t_start(i)); negative when the vehicle passes Phi_9 first. Onset gaps
/// shorter than one sample period make the estimate undefined. If the three
/// terms disagree in sign, the majority sign is used and the estimate is
/// flagged low-confidence.
inline SpeedEstimate estimate_speed(const VehicleObservation& obs, const Topology& topology, int sample_period_ms = 8)
{
    SpeedEstimate out;
    const LinkId l1(1), l5(5), l9(9);
    if (!obs.event(l1) || !obs.event(l5) || !obs.event(l9)) {
        out.status = SpeedStatus::missing_link;
        return out;
    }
    const std::array<std::pair<LinkId, LinkId>, 3> pairs{{{l1, l5}, {l1, l9}, {l5, l9}}};
    std::array<double, 3> terms{};
    int positive = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        const auto dt_ms = obs.event(j)->t_start_ms - obs.event(i)->t_start_ms;
        if (std::llabs(dt_ms) < sample_period_ms) {
            out.status = SpeedStatus::undefined;
            return out;
        }
        terms[p] = link_distance(topology, i, j) / (static_cast<double>(dt_ms) / 1000.0);
        positive += terms[p] > 0.0;
    }
    out.status = SpeedStatus::ok;
    if (positive == 0 || positive == 3) {
        out.mps = detail::symmetric_sum(terms) / 3.0;
    } else {
        for (double& t : terms)
            t = std::abs(t);
        out.mps = (positive >= 2 ? 1.0 : -1.0) * detail::symmetric_sum(terms) / 3.0;
        out.low_confidence = true;
    }
    return out;
}

/// |v| / 3 * (tau(1) + tau(5) + tau(9)).
inline std::optional<double> estimate_length(const VehicleObservation& obs, const SpeedEstimate& speed)
{
    if (!speed.available() || speed.mps == 0.0)
        return std::nullopt;
    std::array<double, 3> tau{};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& e = obs.event(LinkId(kStraightLinks[i]));
        if (!e)
            return std::nullopt;
        tau[i] = e->duration_s();
    }
    return std::abs(speed.mps) / 3.0 * detail::symmetric_sum(tau);
}

struct TraceAnalysis {
    std::array<FilteredSeries, kNumLinks> series;
    std::vector<AttenuationEvent> events;
    std::vector<VehicleObservation> vehicles;
    bool unterminated = false;
};

/// Online pipeline over interleaved samples of all links: per-link filter
/// and detector, then association and speed/length estimation on finish().
class StreamingDetector {
public:
    StreamingDetector(const std::array<double, kNumLinks>& idle_levels, const Topology& topology,
                      const SystemParams& params, std::int64_t t0_ms = 0)
        : topology_(topology), params_(params)
    {
        params_.validate();
        for (std::size_t l = 0; l < kNumLinks; ++l) {
            const auto link = LinkId::from_slot(l);
            filters_.emplace_back(idle_levels[l], params_.filter_size);
            detectors_.emplace_back(link, params_, t0_ms);
            result_.series[l] = FilteredSeries{link, {}, t0_ms, params_.sample_period_ms};
        }
    }

    void operator()(const RssiSample& s) { push(s); }

    void push(const RssiSample& s)
    {
        if (s.t_ms < last_t_)
            throw FormatError("samples must arrive in timestamp order");
        last_t_ = s.t_ms;
        const auto slot = s.link.slot();
        const double level = filters_[slot].push(s.rssi_dbm);
        result_.series[slot].values.push_back(level);
        if (auto e = detectors_[slot].push(level))
            result_.events.push_back(*e);
    }

    TraceAnalysis finish() &&
    {
        for (const auto& d : detectors_)
            result_.unterminated = result_.unterminated || d.attenuated();
        result_.vehicles = associate_vehicles(result_.events,
                                              static_cast<std::int64_t>(params_.guard_w) * params_.sample_period_ms);
        for (auto& e : result_.events)
            for (const auto& v : result_.vehicles)
                if (v.event(e.link) && v.event(e.link)->t_start_ms == e.t_start_ms)
                    e.vehicle_id = v.vehicle_id;
        for (auto& v : result_.vehicles) {
            v.speed = estimate_speed(v, topology_, params_.sample_period_ms);
            v.length_m = estimate_length(v, v.speed);
        }
        return std::move(result_);
    }

private:
    Topology topology_;
    SystemParams params_;
    std::vector<LevelFilter> filters_;
    std::vector<AttenuationDetector> detectors_;
    TraceAnalysis result_;
    std::int64_t last_t_ = INT64_MIN;
};

/// Replays a stored trace through the online pipeline.
inline TraceAnalysis analyze_trace(const TraceBundle& trace, const Topology& topology, const SystemParams& params)
{
    SystemParams p = params;
    p.sample_period_ms = trace.sample_period_ms;
    StreamingDetector detector(trace.idle_level_dbm, topology, p, trace.t0_ms);
    replay(trace, detector);
    return std::move(detector).finish();
}

} // namespace rfvc
