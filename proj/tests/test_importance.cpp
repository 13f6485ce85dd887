#include <rfvc.hpp>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rfvc;

namespace {

// Two groups of width 3 and 1, laid out as [g0 g0 g0 g1].
GroupIndex tiny_groups()
{
    GroupIndex g;
    g.group_of = {0, 0, 0, 1};
    return g;
}

LinearSvm make_svm(std::vector<double> beta, int neg = 0, int pos = 1)
{
    LinearSvm s;
    s.beta = std::move(beta);
    s.neg_class = neg;
    s.pos_class = pos;
    return s;
}

SvmEnsemble trained(int classes, unsigned seed, std::size_t dim = kFeatureDim)
{
    const auto d = fixture::blobs(classes, 40, dim, 1.5, seed);
    return train_svm_ensemble(d.rows, d.labels, classes, {}, seed);
}

} // namespace

TEST(Importance, BinaryExample)
{
    const auto m = importance_binary(make_svm({2.0, 1.0, -1.0, 0.0, 7.0}), tiny_groups());
    EXPECT_DOUBLE_EQ(m(0, 1), 0.75);
    EXPECT_DOUBLE_EQ(m(0, 0), 0.25);
    EXPECT_FALSE(m.degenerate[0]);
}

TEST(Importance, AllPositiveGoesToPositiveClass)
{
    const auto m = importance_binary(make_svm({0.5, 0.1, 3.0, 1.0, -2.0}), tiny_groups());
    EXPECT_EQ(m(0, 1), 1.0);
    EXPECT_EQ(m(0, 0), 0.0);
    EXPECT_EQ(m(1, 1), 1.0); // bias is ignored
}

TEST(Importance, ZeroGroupIsUniformAndFlagged)
{
    const auto m = importance_binary(make_svm({1.0, 0.0, 0.0, 0.0, 5.0}), tiny_groups());
    EXPECT_TRUE(m.degenerate[1]);
    EXPECT_EQ(m(1, 0), 0.5);
    EXPECT_EQ(m(1, 1), 0.5);
    // groups absent from the layout are degenerate as well
    for (std::size_t g = 2; g < GroupIndex::group_count(); ++g)
        EXPECT_TRUE(m.degenerate[g]);
}

TEST(Importance, MismatchedLayoutThrows)
{
    EXPECT_THROW(importance_binary(make_svm({1.0, 2.0}), tiny_groups()), ConfigError);
}

TEST(Importance, TwoClassEnsembleEqualsBinaryForm)
{
    const auto ens = trained(2, 3);
    const auto g = GroupIndex::full();
    const auto a = importance_multiclass(ens, g);
    const auto b = importance_binary(ens.svms[0], g);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.degenerate, b.degenerate);
}

TEST(Importance, ConcentratesOnWinningClass)
{
    // every pair involving class 3 puts positive weight on group 1 only
    SvmEnsemble ens;
    ens.num_classes = 4;
    for (auto [a, b] : SvmEnsemble::pairs(4)) {
        LinearSvm s = make_svm({0.0, 0.0, 0.0, 0.0, 0.0}, a, b);
        if (b == 3)
            s.beta[3] = 1.5 + a;
        ens.svms.push_back(s);
    }
    const auto m = importance_multiclass(ens, tiny_groups());
    EXPECT_EQ(m(1, 3), 1.0);
    for (int c = 0; c < 3; ++c)
        EXPECT_EQ(m(1, static_cast<std::size_t>(c)), 0.0);
    EXPECT_TRUE(m.degenerate[0]);
}

TEST(Importance, MatchesBruteForceOracle)
{
    for (int classes : {3, 7}) {
        const auto ens = trained(classes, 10 + static_cast<unsigned>(classes));
        const auto g = GroupIndex::full();
        const auto m = importance_multiclass(ens, g);
        const auto o = oracle::importance(ens, g.group_of, static_cast<int>(GroupIndex::group_count()));
        for (std::size_t j = 0; j < o.size(); ++j) {
            double row = 0.0;
            for (std::size_t c = 0; c < o[j].size(); ++c) {
                EXPECT_NEAR(m(j, c), o[j][c], 1e-12);
                EXPECT_GE(m(j, c), 0.0);
                row += m(j, c);
            }
            EXPECT_NEAR(row, 1.0, 1e-9);
        }
    }
}

TEST(Importance, InvariantUnderWeightScaling)
{
    const auto ens = trained(3, 5);
    const auto g = GroupIndex::full();
    const auto base = importance_multiclass(ens, g);
    // powers of two scale exactly, so the ratios are bit-identical
    for (double lambda : {0.25, 2.0, 1024.0}) {
        auto s = ens;
        for (auto& svm : s.svms)
            for (auto& b : svm.beta)
                b *= lambda;
        EXPECT_EQ(importance_multiclass(s, g).value, base.value) << lambda;
    }
    // other factors round every product, leaving last-bit differences
    for (double lambda : {0.37, 3.0, 1e4}) {
        auto s = ens;
        for (auto& svm : s.svms)
            for (auto& b : svm.beta)
                b *= lambda;
        const auto m = importance_multiclass(s, g);
        for (std::size_t j = 0; j < base.value.size(); ++j)
            for (std::size_t c = 0; c < base.value[j].size(); ++c)
                EXPECT_NEAR(m(j, c), base(j, c), 1e-14) << lambda;
    }
}

TEST(Importance, InvariantUnderPermutationWithinGroup)
{
    const auto ens = trained(3, 8);
    const auto g = GroupIndex::full();
    const auto base = importance_multiclass(ens, g);
    auto p = ens;
    // reverse the columns of every link block
    for (auto& svm : p.svms)
        for (std::size_t l = 0; l < kNumLinks; ++l) {
            auto first = svm.beta.begin() + static_cast<std::ptrdiff_t>(kGlobalFeatures + l * kLinkBlock);
            std::reverse(first, first + static_cast<std::ptrdiff_t>(kLinkBlock));
        }
    const auto m = importance_multiclass(p, g);
    for (std::size_t j = 0; j < base.value.size(); ++j)
        for (std::size_t c = 0; c < base.value[j].size(); ++c)
            EXPECT_NEAR(m(j, c), base(j, c), 1e-14);
}

TEST(Importance, ReducedLayoutFlagsMissingGroups)
{
    const std::vector<int> links{1, 5, 9};
    const auto g = GroupIndex::for_links(links);
    const auto ens = trained(2, 4, g.dim());
    const auto m = importance_multiclass(ens, g);
    for (int j = 0; j < 10; ++j) {
        const bool present = j == 0 || j == 1 || j == 5 || j == 9;
        EXPECT_EQ(m.degenerate[static_cast<std::size_t>(j)], !present) << j;
    }
}
