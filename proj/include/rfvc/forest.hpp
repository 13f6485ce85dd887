#pragma once

#include "rfvc/error.hpp"
#include "rfvc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace rfvc {

struct ForestOptions {
    int n_trees = 100;
    int max_depth = 10;
    int feature_subset = 0; // 0: ceil(sqrt(dim))
};

/// Array-backed CART tree. Node 0 is the root. A node with feature < 0 is a
/// leaf carrying `label`; otherwise x[feature] <= threshold goes left.
struct CartTree {
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = 0;

        bool leaf() const noexcept { return feature < 0; }
        friend bool operator==(const Node&, const Node&) = default;
    };
    std::vector<Node> nodes;

    int predict(std::span<const double> x) const
    {
        std::size_t i = 0;
        while (!nodes[i].leaf())
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                             ? nodes[i].left
                                             : nodes[i].right);
        return nodes[i].label;
    }

    /// Prediction of the tree cut at `max_depth` (inner nodes carry the
    /// majority label of their training samples).
    int predict(std::span<const double> x, int max_depth) const
    {
        std::size_t i = 0;
        for (int d = 0; d < max_depth && !nodes[i].leaf(); ++d)
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                             ? nodes[i].left
                                             : nodes[i].right);
        return nodes[i].label;
    }

    /// The tree cut at `max_depth`, renumbered in preorder like a freshly
    /// grown tree.
    CartTree truncated(int max_depth) const
    {
        CartTree out;
        auto copy = [&](auto&& self, int i, int d) -> int {
            const int index = static_cast<int>(out.nodes.size());
            out.nodes.push_back(nodes[static_cast<std::size_t>(i)]);
            auto& n = out.nodes.back();
            if (n.leaf())
                return index;
            if (d >= max_depth) {
                n.feature = -1;
                n.threshold = 0.0;
                n.left = n.right = -1;
                return index;
            }
            const int l = self(self, n.left, d + 1);
            const int r = self(self, nodes[static_cast<std::size_t>(i)].right, d + 1);
            out.nodes[static_cast<std::size_t>(index)].left = l;
            out.nodes[static_cast<std::size_t>(index)].right = r;
            return index;
        };
        if (!nodes.empty())
            copy(copy, 0, 0);
        return out;
    }

    int depth() const
    {
        int best = 0;
        std::vector<std::pair<int, int>> stack{{0, 0}};
        while (!stack.empty()) {
            auto [i, d] = stack.back();
            stack.pop_back();
            best = std::max(best, d);
            const auto& n = nodes[static_cast<std::size_t>(i)];
            if (!n.leaf()) {
                stack.push_back({n.left, d + 1});
                stack.push_back({n.right, d + 1});
            }
        }
        return best;
    }

    friend bool operator==(const CartTree&, const CartTree&) = default;
};

struct RandomForest {
    int num_classes = 0;
    int max_depth = 0;
    int feature_subset = 0;
    std::uint64_t seed = 0;
    std::vector<CartTree> trees;

    std::vector<int> votes(std::span<const double> x) const
    {
        std::vector<int> v(static_cast<std::size_t>(num_classes), 0);
        for (const auto& t : trees)
            ++v[static_cast<std::size_t>(t.predict(x))];
        return v;
    }

    /// Majority over trees; ties go to the lowest class index.
    int predict(std::span<const double> x) const
    {
        const auto v = votes(x);
        return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    }

    std::size_t node_count() const
    {
        std::size_t n = 0;
        for (const auto& t : trees)
            n += t.nodes.size();
        return n;
    }
};

namespace detail {

inline int majority(std::span<const int> counts)
{
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

inline double gini(std::span<const int> counts, int total)
{
    if (total == 0)
        return 0.0;
    double s = 0.0;
    for (int c : counts) {
        const double p = static_cast<double>(c) / total;
        s += p * p;
    }
    return 1.0 - s;
}

class TreeBuilder {
public:
    TreeBuilder(std::span<const std::vector<double>> x, std::span<const int> y, int num_classes, int max_depth,
                int mtry, std::uint64_t tree_seed)
        : x_(x), y_(y), k_(num_classes), max_depth_(max_depth), mtry_(mtry), seed_(tree_seed)
    {
    }

    CartTree build(std::vector<std::size_t> samples)
    {
        tree_.nodes.clear();
        grow(samples, 0, 1);
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double impurity = 0.0;
    };

    // heap_id numbers nodes as in a complete binary tree (root 1), so the
    // random choices at a node do not depend on how deep the tree may grow.
    int grow(std::vector<std::size_t>& samples, int depth, std::uint64_t heap_id)
    {
        const int index = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::vector<int> counts(static_cast<std::size_t>(k_), 0);
        for (auto s : samples)
            ++counts[static_cast<std::size_t>(y_[s])];
        tree_.nodes[static_cast<std::size_t>(index)].label = majority(counts);

        const int total = static_cast<int>(samples.size());
        const double parent = gini(counts, total);
        if (depth >= max_depth_ || total < 2 || parent == 0.0)
            return index;

        const Split split = best_split(samples, counts, parent, heap_id);
        if (split.feature < 0)
            return index;

        std::vector<std::size_t> left, right;
        for (auto s : samples)
            (x_[s][static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(s);
        samples.clear();
        samples.shrink_to_fit();

        const int l = grow(left, depth + 1, 2 * heap_id);
        const int r = grow(right, depth + 1, 2 * heap_id + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(index)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return index;
    }

    // Features are drawn in random order; the first mtry that vary within
    // the node are evaluated.
    Split best_split(const std::vector<std::size_t>& samples, const std::vector<int>& counts, double parent,
                     std::uint64_t heap_id)
    {
        const std::size_t dim = x_.front().size();
        std::vector<std::size_t> features(dim);
        std::iota(features.begin(), features.end(), std::size_t{0});
        Rng rng(derive_seed(seed_, heap_id));
        rng.shuffle(features);

        Split best;
        best.impurity = parent;
        const int total = static_cast<int>(samples.size());
        std::vector<std::pair<double, int>> column(samples.size());
        std::vector<int> left(static_cast<std::size_t>(k_));
        std::vector<int> right(static_cast<std::size_t>(k_));
        int evaluated = 0;
        for (std::size_t f : features) {
            if (evaluated >= mtry_)
                break;
            for (std::size_t i = 0; i < samples.size(); ++i)
                column[i] = {x_[samples[i]][f], y_[samples[i]]};
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first)
                continue;
            ++evaluated;
            std::fill(left.begin(), left.end(), 0);
            right = counts;
            for (int i = 0; i + 1 < total; ++i) {
                const auto c = static_cast<std::size_t>(column[static_cast<std::size_t>(i)].second);
                ++left[c];
                --right[c];
                const double a = column[static_cast<std::size_t>(i)].first;
                const double b = column[static_cast<std::size_t>(i) + 1].first;
                if (a == b)
                    continue;
                const int nl = i + 1;
                const int nr = total - nl;
                const double imp = (nl * gini(left, nl) + nr * gini(right, nr)) / total;
                if (imp < best.impurity) {
                    double thr = 0.5 * (a + b);
                    if (!(thr < b))
                        thr = a;
                    best = {static_cast<int>(f), thr, imp};
                }
            }
        }
        return best;
    }

    std::span<const std::vector<double>> x_;
    std::span<const int> y_;
    int k_;
    int max_depth_;
    int mtry_;
    std::uint64_t seed_;
    CartTree tree_;
};

} // namespace detail

/// Seed of tree `t` of a forest, independent of the forest size.
inline std::uint64_t tree_seed(std::uint64_t forest_seed, std::size_t t)
{
    return derive_seed(forest_seed, static_cast<std::uint64_t>(t));
}

/// Bootstrap sample (n draws with replacement) of tree seed `seed`.
inline std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed)
{
    Rng rng(derive_seed(seed, std::uint64_t{0}));
    std::vector<std::size_t> out(n);
    for (auto& s : out)
        s = rng.uniform_index(n);
    std::sort(out.begin(), out.end());
    return out;
}

inline CartTree train_tree(std::span<const std::vector<double>> x, std::span<const int> y, int num_classes,
                           int max_depth, int mtry, std::uint64_t seed)
{
    detail::TreeBuilder builder(x, y, num_classes, max_depth, mtry, seed);
    return builder.build(bootstrap_sample(x.size(), seed));
}

/// Trees are independent given their seeds, so the first m trees of a forest
/// equal an m-tree forest trained with the same seed.
inline RandomForest train_random_forest(std::span<const std::vector<double>> x, std::span<const int> y,
                                        int num_classes, const ForestOptions& opt, std::uint64_t seed)
{
    if (x.empty() || x.size() != y.size())
        throw ConfigError("train_random_forest: need equally many rows and labels");
    if (opt.n_trees < 1 || opt.max_depth < 0 || num_classes < 1)
        throw ConfigError("train_random_forest: need n_trees >= 1, max_depth >= 0, num_classes >= 1");
    for (int c : y)
        if (c < 0 || c >= num_classes)
            throw ConfigError("train_random_forest: label out of range");
    RandomForest f;
    f.num_classes = num_classes;
    f.max_depth = opt.max_depth;
    f.feature_subset = opt.feature_subset > 0
                           ? opt.feature_subset
                           : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.front().size()))));
    f.seed = seed;
    for (int t = 0; t < opt.n_trees; ++t)
        f.trees.push_back(train_tree(x, y, num_classes, f.max_depth, f.feature_subset,
                                     tree_seed(seed, static_cast<std::size_t>(t))));
    return f;
}

} // namespace rfvc
