#include <rfvc.hpp>

#include "support/c_interp.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace rfvc;

namespace {

Model blob_model(const Taxonomy& tax, const ModelSpec& spec, std::vector<int> links, double spread, unsigned seed)
{
    const std::size_t dim = kGlobalFeatures + kLinkBlock * links.size();
    const auto d = fixture::blobs(static_cast<int>(tax.size()), 40, dim, spread, seed);
    return train_model(d.rows, d.labels, tax, std::move(links), spec, seed);
}

std::size_t count_of(const std::string& hay, const std::string& needle)
{
    std::size_t n = 0;
    for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1))
        ++n;
    return n;
}

void expect_interpreter_agrees(const Model& m, unsigned seed)
{
    const auto src = emit_c_source(m);
    const cinterp::Program prog(src);
    EXPECT_EQ(prog.function_name(), "predict");
    EXPECT_EQ(prog.parameter_size(), 92);
    std::size_t mismatches = 0;
    for (const auto& full : oracle::random_inputs(m, 1000, seed)) {
        const long long c = prog.call(full);
        mismatches += c != m.predict(oracle::model_input(m, full));
    }
    EXPECT_EQ(mismatches, 0u);
}

} // namespace

TEST(Export, BinarySvmMatchesInterpreter)
{
    expect_interpreter_agrees(blob_model(Taxonomy::binary(), ModelSpec::linear_svm(), all_links(), 1.5, 1), 100);
}

TEST(Export, SevenClassSvmMatchesInterpreter)
{
    expect_interpreter_agrees(blob_model(Taxonomy::body_style(), ModelSpec::linear_svm(), all_links(), 1.5, 2), 200);
}

TEST(Export, ForestMatchesInterpreter)
{
    expect_interpreter_agrees(blob_model(Taxonomy::size_based(), ModelSpec::random_forest(20, 8), all_links(), 2.0, 3),
                              300);
}

TEST(Export, ReducedLayoutReadsTheRightColumns)
{
    expect_interpreter_agrees(blob_model(Taxonomy::size_based(), ModelSpec::linear_svm(), {1, 5, 9}, 1.5, 4), 400);
    expect_interpreter_agrees(blob_model(Taxonomy::binary(), ModelSpec::random_forest(10, 6), {3, 7}, 2.0, 5), 500);
}

TEST(Export, SourceShape)
{
    const auto m = blob_model(Taxonomy::body_style(), ModelSpec::linear_svm(), all_links(), 1.0, 6);
    const auto src = emit_c_source(m);
    EXPECT_EQ(count_of(src, "    s = "), 21u);
    EXPECT_EQ(src.find("#include"), std::string::npos);
    EXPECT_EQ(src.find("//"), std::string::npos);
    const cinterp::Program prog(src);
    EXPECT_EQ(prog.external_symbols(), 2u);
    ASSERT_EQ(prog.string_constants().count("model_version"), 1u);
    EXPECT_EQ(prog.string_constants().at("model_version"), model_version_string(m));
}

TEST(Export, StumpHasOneBranch)
{
    // layout of link 1 only; every link column carries the same ramp
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < 20; ++i) {
        std::vector<double> r(12, static_cast<double>(i));
        r[0] = r[1] = 0.5;
        x.push_back(r);
        y.push_back(i < 10 ? 0 : 1);
    }
    const Model m = train_model(x, y, Taxonomy::binary(), {1}, ModelSpec::random_forest(1, 1), 3);
    ASSERT_EQ(m.forest.trees.size(), 1u);
    ASSERT_EQ(m.forest.trees[0].nodes.size(), 3u);
    const auto src = emit_c_source(m);
    EXPECT_EQ(count_of(src, "if (x["), 1u + 2u * 10u); // the split and two clamps per live column
    EXPECT_EQ(count_of(src, "} else {"), 1u);
    const cinterp::Program prog(src);
    std::vector<double> full(92, 0.0);
    for (int i = 0; i < 20; ++i) {
        std::fill(full.begin() + 2, full.begin() + 12, static_cast<double>(i));
        EXPECT_EQ(prog.call(full), i < 10 ? 0 : 1);
    }
}

TEST(Export, Memory)
{
    EXPECT_EQ(estimate_memory(0, 0).code_bytes, 512u);
    EXPECT_EQ(estimate_memory(10, 3).code_bytes, 512u + 40u + 24u);
    const auto svm = blob_model(Taxonomy::body_style(), ModelSpec::linear_svm(), all_links(), 1.0, 7);
    EXPECT_EQ(estimate_memory(svm).code_bytes, 512u + 4u * (2u * 92u + 21u * 93u));
    const auto rf = blob_model(Taxonomy::binary(), ModelSpec::random_forest(5, 4), all_links(), 2.0, 8);
    EXPECT_EQ(estimate_memory(rf).code_bytes, 512u + 4u * 2u * 92u + 8u * rf.forest.node_count());
}

TEST(Export, LargeForestExceedsSmallestPlatform)
{
    const auto d = fixture::blobs(3, 100, 92, 4.0, 9);
    const auto m = train_model(d.rows, d.labels, Taxonomy::size_based(), all_links(), ModelSpec::random_forest(100, 20), 9);
    const auto mem = estimate_memory(m);
    EXPECT_FALSE(mem.fits(platform_by_name("msp")));
    EXPECT_TRUE(mem.fits(platform_by_name("esp")));
    EXPECT_THROW(platform_by_name("z80"), ConfigError);
}

TEST(Export, PlatformsAreOrdered)
{
    const auto p = builtin_platforms();
    ASSERT_EQ(p.size(), 3u);
    EXPECT_EQ(p[0].program_memory_bytes, 16320u);
    EXPECT_EQ(p[1].program_memory_bytes, 32768u);
    EXPECT_EQ(p[2].program_memory_bytes, 4194304u);
}

namespace {

std::vector<GridPoint> small_grid()
{
    static const std::vector<GridPoint> g = [] {
        const auto d = fixture::blobs(3, 60, 12, 2.5, 11);
        const auto plan = FoldPlan::stratified(d.labels, 5, 2);
        return forest_grid(d, Taxonomy::size_based(), {1, 5, 20}, {1, 3, 8}, plan, 4);
    }();
    return g;
}

} // namespace

TEST(SweetSpot, GridMemoryIsMonotone)
{
    const auto g = small_grid();
    ASSERT_EQ(g.size(), 9u);
    for (const auto& a : g)
        for (const auto& b : g)
            if (a.n_trees <= b.n_trees && a.max_depth <= b.max_depth)
                EXPECT_LE(a.memory.code_bytes, b.memory.code_bytes);
}

TEST(SweetSpot, GridMatchesDirectCrossValidation)
{
    const auto d = fixture::blobs(3, 60, 12, 2.5, 11);
    const auto plan = FoldPlan::stratified(d.labels, 5, 2);
    const auto direct = cross_validate(d, Taxonomy::size_based(), ModelSpec::random_forest(20, 8), plan, 4);
    const auto g = small_grid();
    EXPECT_EQ(g.back().n_trees, 20);
    EXPECT_EQ(g.back().max_depth, 8);
    EXPECT_EQ(g.back().acc_mean, direct.acc_mean);
}

TEST(SweetSpot, SelectionRules)
{
    const auto g = small_grid();
    const auto unlimited = select_sweet_spot(g, {"big", std::size_t(1) << 40, 0});
    ASSERT_TRUE(unlimited.best);
    for (const auto& p : g)
        EXPECT_LE(p.acc_mean, unlimited.best->acc_mean);

    const auto none = select_sweet_spot(g, {"none", 0, 0});
    EXPECT_FALSE(none.best);

    // a budget between the smallest and largest grid point
    const std::size_t budget = (g.front().memory.code_bytes + g.back().memory.code_bytes) / 2;
    const auto mid = select_sweet_spot(g, {"mid", budget, 0});
    ASSERT_TRUE(mid.best);
    EXPECT_LE(mid.best->memory.code_bytes, budget);
    for (const auto& p : mid.grid) {
        EXPECT_EQ(p.fits, p.memory.code_bytes <= budget);
        if (p.fits)
            EXPECT_LE(p.acc_mean, mid.best->acc_mean);
    }
    EXPECT_LE(mid.best->acc_mean, unlimited.best->acc_mean);
}
