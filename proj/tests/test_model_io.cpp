#include <rfvc.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace rfvc;

namespace {

Model make(const ModelSpec& spec, const Taxonomy& tax, std::vector<int> links, unsigned seed)
{
    const std::size_t dim = kGlobalFeatures + kLinkBlock * links.size();
    const auto d = fixture::blobs(static_cast<int>(tax.size()), 30, dim, 2.0, seed);
    return train_model(d.rows, d.labels, tax, std::move(links), spec, seed);
}

void expect_same_predictions(const Model& a, const Model& b)
{
    for (const auto& full : oracle::random_inputs(a, 300, 5)) {
        const auto x = oracle::model_input(a, full);
        EXPECT_EQ(a.predict(x), b.predict(x));
    }
}

} // namespace

TEST(ModelIo, SvmRoundTrip)
{
    const auto m = make(ModelSpec::linear_svm(), Taxonomy::size_based(), {1, 5, 9}, 3);
    const auto j = model_to_json(m);
    const auto back = model_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.links, m.links);
    EXPECT_EQ(back.scaling.lo, m.scaling.lo);
    for (std::size_t k = 0; k < m.svm.svms.size(); ++k)
        EXPECT_EQ(back.svm.svms[k].beta, m.svm.svms[k].beta);
    EXPECT_EQ(model_to_json(back), j);
    expect_same_predictions(m, back);
}

TEST(ModelIo, ForestRoundTrip)
{
    const auto m = make(ModelSpec::random_forest(15, 6), Taxonomy::body_style(), all_links(), 4);
    const auto back = model_from_json(nlohmann::json::parse(model_to_json(m).dump()));
    ASSERT_EQ(back.forest.trees.size(), m.forest.trees.size());
    for (std::size_t t = 0; t < m.forest.trees.size(); ++t)
        EXPECT_EQ(back.forest.trees[t], m.forest.trees[t]);
    EXPECT_EQ(model_to_json(back), model_to_json(m));
    expect_same_predictions(m, back);
}

TEST(ModelIo, CostModelTravelsWithTheModel)
{
    const auto m = make(ModelSpec::linear_svm(), Taxonomy::binary(), all_links(), 1);
    CostModel c;
    c.node_bytes = 12;
    EXPECT_EQ(cost_model_from_json(model_to_json(m, c)), c);
    nlohmann::json bare = model_to_json(m);
    bare.erase("cost_model");
    EXPECT_EQ(cost_model_from_json(bare), CostModel{});
}

TEST(ModelIo, RejectsBadInput)
{
    const auto m = make(ModelSpec::linear_svm(), Taxonomy::binary(), all_links(), 2);
    auto j = model_to_json(m);
    j["format_version"] = 2;
    EXPECT_THROW(model_from_json(j), FormatError);

    j = model_to_json(m);
    j["svm"]["pairs"][0]["beta"].erase(0);
    EXPECT_THROW(model_from_json(j), FormatError);

    j = model_to_json(m);
    j["taxonomy"]["classes"] = {"a", "b"};
    EXPECT_THROW(model_from_json(j), FormatError);

    j = model_to_json(m);
    j.erase("scaling");
    EXPECT_THROW(model_from_json(j), FormatError);

    EXPECT_THROW(model_from_json(nlohmann::json::parse("[1, 2, 3]")), FormatError);

    auto f = model_to_json(make(ModelSpec::random_forest(2, 3), Taxonomy::binary(), all_links(), 2));
    f["forest"]["trees"][0][0][2] = 999;
    EXPECT_THROW(model_from_json(f), FormatError);
}

TEST(ModelIo, FileRoundTrip)
{
    fixture::TempDir dir("model_io");
    const auto m = make(ModelSpec::random_forest(5, 4), Taxonomy::size_based(), {3, 7}, 6);
    const auto path = (dir / "m.json").string();
    save_model(path, m);
    const auto back = load_model(path);
    EXPECT_EQ(model_to_json(back), model_to_json(m));

    {
        std::ofstream out(dir / "garbage.json");
        out << "{ not json";
    }
    EXPECT_THROW(load_model((dir / "garbage.json").string()), FormatError);
    EXPECT_THROW(load_model((dir / "missing.json").string()), FormatError);
}
