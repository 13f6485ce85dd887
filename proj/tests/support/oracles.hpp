#pragma once

// Reference computations used as test oracles. They only rely on the
// library's public data types, never on its algorithms.

#include <rfvc.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

/// Index of the largest count; the first one wins ties.
inline int argmax_first(const std::vector<int>& counts)
{
    int best = 0;
    for (int c = 1; c < static_cast<int>(counts.size()); ++c)
        if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)])
            best = c;
    return best;
}

/// Recounts one-vs-one votes from the raw weights.
inline int svm_vote(const rfvc::SvmEnsemble& ens, const std::vector<double>& x)
{
    std::vector<int> votes(static_cast<std::size_t>(ens.num_classes), 0);
    for (const auto& s : ens.svms) {
        // left-to-right sum, bias first
        double d = s.beta.back();
        for (std::size_t i = 0; i < x.size(); ++i)
            d += s.beta[i] * x[i];
        ++votes[static_cast<std::size_t>(d > 0.0 ? s.pos_class : s.neg_class)];
    }
    return argmax_first(votes);
}

/// Walks every tree by hand and tallies the leaves.
inline int forest_vote(const rfvc::RandomForest& f, const std::vector<double>& x)
{
    std::vector<int> votes(static_cast<std::size_t>(f.num_classes), 0);
    for (const auto& t : f.trees) {
        std::size_t i = 0;
        while (t.nodes[i].feature >= 0) {
            const auto& n = t.nodes[i];
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
        }
        ++votes[static_cast<std::size_t>(t.nodes[i].label)];
    }
    return argmax_first(votes);
}

/// Brute-force accumulation of I(j, y) over every (feature, svm) pair.
inline std::vector<std::vector<double>> importance(const rfvc::SvmEnsemble& ens, const std::vector<int>& group_of,
                                                   int groups)
{
    std::vector<std::vector<double>> num(static_cast<std::size_t>(groups),
                                         std::vector<double>(static_cast<std::size_t>(ens.num_classes), 0.0));
    std::vector<double> z(static_cast<std::size_t>(groups), 0.0);
    for (std::size_t i = 0; i < group_of.size(); ++i) {
        for (std::size_t k = 0; k < ens.svms.size(); ++k) {
            const double b = ens.svms[k].beta[i];
            const auto g = static_cast<std::size_t>(group_of[i]);
            z[g] += std::fabs(b);
            if (b > 0)
                num[g][static_cast<std::size_t>(ens.svms[k].pos_class)] += std::fabs(b);
            else if (b < 0)
                num[g][static_cast<std::size_t>(ens.svms[k].neg_class)] += std::fabs(b);
        }
    }
    for (std::size_t g = 0; g < num.size(); ++g)
        for (auto& v : num[g])
            v = z[g] > 0 ? v / z[g] : 1.0 / static_cast<double>(ens.num_classes);
    return num;
}

/// 1-nearest-neighbour accuracy per fold on 2-D points, each axis divided
/// by its training standard deviation.
inline std::vector<double> one_nn_fold_accuracy(const std::vector<std::array<double, 2>>& pts,
                                                const std::vector<int>& labels, const std::vector<int>& fold_of,
                                                int k)
{
    std::vector<double> acc;
    for (int f = 0; f < k; ++f) {
        std::array<double, 2> mean{}, sd{};
        std::size_t n = 0;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (fold_of[i] != f) {
                mean[0] += pts[i][0];
                mean[1] += pts[i][1];
                ++n;
            }
        for (auto& m : mean)
            m /= static_cast<double>(n);
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (fold_of[i] != f)
                for (int d = 0; d < 2; ++d)
                    sd[d] += (pts[i][d] - mean[d]) * (pts[i][d] - mean[d]);
        for (auto& s : sd)
            s = std::sqrt(s / static_cast<double>(n));
        std::size_t hits = 0, tested = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (fold_of[i] != f)
                continue;
            double best = std::numeric_limits<double>::infinity();
            int label = -1;
            for (std::size_t j = 0; j < pts.size(); ++j) {
                if (fold_of[j] == f)
                    continue;
                const double a = (pts[i][0] - pts[j][0]) / sd[0];
                const double b = (pts[i][1] - pts[j][1]) / sd[1];
                const double d = a * a + b * b;
                if (d < best) {
                    best = d;
                    label = labels[j];
                }
            }
            hits += label == labels[i];
            ++tested;
        }
        acc.push_back(static_cast<double>(hits) / static_cast<double>(tested));
    }
    return acc;
}

/// Column of the 92-wide vector that feeds column `col` of a model whose
/// layout keeps the global pair and the blocks of `links`.
inline std::size_t full_column(const std::vector<int>& links, std::size_t col)
{
    if (col < 2)
        return col;
    const int link = links[(col - 2) / 10];
    return 2 + static_cast<std::size_t>(link - 1) * 10 + (col - 2) % 10;
}

/// Random inputs around the training range of every column, including
/// values outside it so the clamps are exercised.
inline std::vector<std::vector<double>> random_inputs(const rfvc::Model& m, std::size_t count, unsigned seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    std::vector<std::vector<double>> out;
    for (std::size_t n = 0; n < count; ++n) {
        std::vector<double> x(rfvc::kFeatureDim, 0.0);
        for (std::size_t i = 0; i < m.scaling.dim(); ++i) {
            const double lo = m.scaling.lo[i], hi = m.scaling.hi[i];
            const double v = lo + (hi > lo ? hi - lo : 1.0) * u(gen);
            x[full_column(m.links, i)] = v;
        }
        out.push_back(std::move(x));
    }
    return out;
}

/// The model's own input layout picked out of a 92-wide vector.
inline std::vector<double> model_input(const rfvc::Model& m, const std::vector<double>& full)
{
    std::vector<double> x(m.scaling.dim());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = full[full_column(m.links, i)];
    return x;
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace oracle
