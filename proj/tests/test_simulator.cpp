#include <rfvc.hpp>

#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rfvc;

namespace {

const AttenuationEvent* phi(const TraceAnalysis& a, int link)
{
    const auto* v = primary_vehicle(a);
    if (!v || !v->event(LinkId(link)))
        return nullptr;
    return &*v->event(LinkId(link));
}

} // namespace

TEST(Simulator, DeterministicPerSeed)
{
    const auto a = generate_trace(truck_like_template(), {}, {}, 3);
    const auto b = generate_trace(truck_like_template(), {}, {}, 3);
    const auto c = generate_trace(truck_like_template(), {}, {}, 4);
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == c);
}

TEST(Simulator, DatasetDeterministic)
{
    const std::vector<ClassTemplate> one{car_like_template()};
    const std::vector<int> three{3};
    const auto a = generate_dataset(one, three, 99);
    const auto b = generate_dataset(one, three, 99);
    ASSERT_EQ(a.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_EQ(a[i].trace, b[i].trace);
}

TEST(Simulator, DatasetCardinality)
{
    const auto t = binary_templates();
    const std::vector<int> counts{1000, 1000};
    const auto d = generate_dataset(t, counts, 7);
    ASSERT_EQ(d.size(), 2000u);
    EXPECT_EQ(d.front().label, "car-like");
    EXPECT_EQ(d.back().label, "truck-like");
    for (const auto& lt : d) {
        EXPECT_NO_THROW(lt.trace.validate());
        ASSERT_TRUE(lt.trace.truth);
        EXPECT_EQ(lt.trace.truth->label, lt.label);
    }
}

TEST(Simulator, BodyStyleProportions)
{
    const auto counts = proportional_counts(kBodyStyleWeights, 500);
    int total = 0;
    for (int c : counts)
        total += c;
    EXPECT_EQ(total, 500);
    EXPECT_EQ(std::min_element(counts.begin(), counts.end()) - counts.begin(), 6); // bus
    EXPECT_GE(counts[6], 1);
    const auto t = body_style_templates();
    const auto d = generate_dataset(t, counts, 7);
    EXPECT_EQ(d.size(), 500u);
}

TEST(Simulator, TemplatesAreValid)
{
    for (const auto& t : body_style_templates())
        EXPECT_NO_THROW(t.validate()) << t.label;
    for (const auto& t : binary_templates())
        EXPECT_NO_THROW(t.validate()) << t.label;
    auto bad = car_like_template();
    bad.min_level.mean = 0.9;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Simulator, InvertIsInvolutionAndSwapsStreams)
{
    const auto t = generate_trace(car_like_template(), {}, {}, 5);
    const auto inv = invert_direction(t);
    EXPECT_EQ(invert_direction(inv), t);
    EXPECT_EQ(inv.stream(LinkId(9)), t.stream(LinkId(1)));
    EXPECT_EQ(inv.stream(LinkId(1)), t.stream(LinkId(9)));
    EXPECT_EQ(inv.stream(LinkId(5)), t.stream(LinkId(5)));
    EXPECT_EQ(inv.truth->direction, -1);
}

TEST(Simulator, InvertMovesOnsets)
{
    const auto t = generate_trace(car_like_template(), {}, {}, 6);
    const auto fwd = analyze_trace(t, {}, {});
    const auto rev = analyze_trace(invert_direction(t), {}, {});
    ASSERT_TRUE(phi(fwd, 1) && phi(rev, 9));
    EXPECT_EQ(phi(rev, 9)->t_start_ms, phi(fwd, 1)->t_start_ms);
    EXPECT_EQ(phi(rev, 1)->t_start_ms, phi(fwd, 9)->t_start_ms);
    EXPECT_LT(primary_vehicle(rev)->speed.mps, 0.0);
}

TEST(Simulator, NoiseFreeDurationIsLengthOverSpeed)
{
    // 36 km/h and 5 m: 0.5 s
    const auto t = generate_trace(fixture::noise_free(36.0, 5.0), {}, {}, 1, fixture::quiet_idle());
    const auto a = analyze_trace(t, {}, {});
    ASSERT_EQ(a.vehicles.size(), 1u);
    const auto* e = phi(a, 1);
    ASSERT_NE(e, nullptr);
    EXPECT_NEAR(e->duration_s(), 0.5, 0.008);
}

TEST(Simulator, OnsetGapMatchesGeometry)
{
    for (double kmh : {25.0, 40.0, 55.0}) {
        const auto t = generate_trace(fixture::noise_free(kmh, 6.0), {}, {}, 2, fixture::quiet_idle());
        const auto a = analyze_trace(t, {}, {});
        ASSERT_TRUE(phi(a, 1) && phi(a, 5) && phi(a, 9));
        const double gap = (phi(a, 5)->t_start_ms - phi(a, 1)->t_start_ms) / 1000.0;
        EXPECT_NEAR(gap, 5.0 / (kmh / 3.6), 0.008) << kmh;
        const double gap2 = (phi(a, 9)->t_start_ms - phi(a, 5)->t_start_ms) / 1000.0;
        EXPECT_NEAR(gap2, 5.0 / (kmh / 3.6), 0.008) << kmh;
    }
}

TEST(Simulator, TemplateExamples)
{
    // single draws land within three reference column deviations of the means
    const auto car = analyze_trace(generate_trace(car_like_template(), {}, {}, 1), {}, {});
    ASSERT_NE(phi(car, 1), nullptr);
    EXPECT_NEAR(phi(car, 1)->duration_s(), 0.46, 3 * 0.11);
    const auto truck = analyze_trace(generate_trace(truck_like_template(), {}, {}, 1), {}, {});
    ASSERT_NE(phi(truck, 1), nullptr);
    EXPECT_NEAR(phi(truck, 1)->duration_s(), 1.9, 3 * 0.5);
}

TEST(Simulator, CarStatisticsWithinThreeStandardErrors)
{
    const std::vector<ClassTemplate> t{car_like_template()};
    const std::vector<int> n{1000};
    const auto data = generate_dataset(t, n, 2024);
    std::vector<double> tau, mins;
    for (const auto& lt : data) {
        const auto a = analyze_trace(lt.trace, {}, {});
        const auto* e = phi(a, 1);
        ASSERT_NE(e, nullptr);
        tau.push_back(e->duration_s());
        mins.push_back(e->min_level);
    }
    auto check = [](const std::vector<double>& v, double target, const char* what) {
        double s = 0.0, s2 = 0.0;
        for (double x : v) {
            s += x;
            s2 += x * x;
        }
        const double n = static_cast<double>(v.size());
        const double mean = s / n;
        const double sd = std::sqrt((s2 - n * mean * mean) / (n - 1.0));
        const double se = sd / std::sqrt(n);
        EXPECT_LE(std::abs(mean - target), 3.0 * se) << what << " mean " << mean << " se " << se;
    };
    check(tau, 0.46, "phi1 duration");
    check(mins, 0.72, "phi1 min");
}

TEST(Simulator, TrailerStaysOneEvent)
{
    const auto templates = body_style_templates();
    for (std::size_t c : {1u, 4u}) { // the two trailer classes
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto a = analyze_trace(generate_trace(templates[c], {}, {}, seed), {}, {});
            ASSERT_EQ(a.vehicles.size(), 1u) << templates[c].label << " seed " << seed;
            for (int l : kStraightLinks) {
                std::size_t events = 0;
                for (const auto& e : a.events)
                    events += e.link.value() == l;
                EXPECT_EQ(events, 1u);
            }
        }
    }
}

TEST(Simulator, ConcatenateKeepsVehiclesApart)
{
    std::vector<TraceBundle> parts;
    for (std::uint64_t s = 0; s < 4; ++s)
        parts.push_back(generate_trace(car_like_template(), {}, {}, s));
    const auto joined = concatenate(parts);
    std::size_t total = 0;
    for (const auto& p : parts)
        total += p.samples_per_link();
    EXPECT_EQ(joined.samples_per_link(), total);
    EXPECT_EQ(analyze_trace(joined, {}, {}).vehicles.size(), 4u);
}
