#pragma once

#include "rfvc/csv.hpp"
#include "rfvc/error.hpp"
#include "rfvc/eval.hpp"
#include "rfvc/features.hpp"
#include "rfvc/forest.hpp"
#include "rfvc/model.hpp"
#include "rfvc/parallel.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rfvc {

struct PlatformProfile {
    std::string name;
    std::size_t program_memory_bytes = 0;
    std::size_t ram_bytes = 0;
};

inline std::vector<PlatformProfile> builtin_platforms()
{
    return {
        {"msp", 16320, 512},
        {"atmega", 32768, 2048},
        {"esp", 4194304, 544768},
    };
}

inline PlatformProfile platform_by_name(std::string_view name)
{
    for (auto& p : builtin_platforms())
        if (p.name == name)
            return p;
    throw ConfigError("unknown platform: " + std::string(name));
}

struct MemoryEstimate {
    std::size_t code_bytes = 0;
    std::size_t weights = 0; // stored constants: scaling bounds, svm weights and biases
    std::size_t tree_nodes = 0;

    bool fits(const PlatformProfile& p) const noexcept { return code_bytes <= p.program_memory_bytes; }
};

inline MemoryEstimate estimate_memory(std::size_t weights, std::size_t tree_nodes, const CostModel& cost = {})
{
    return {cost.overhead_bytes + cost.weight_bytes * weights + cost.node_bytes * tree_nodes, weights, tree_nodes};
}

inline MemoryEstimate estimate_memory(const Model& m, const CostModel& cost = {})
{
    std::size_t weights = 2 * m.scaling.dim();
    std::size_t nodes = 0;
    if (m.kind == ModelKind::svm)
        for (const auto& s : m.svm.svms)
            weights += s.beta.size();
    else
        nodes = m.forest.node_count();
    return estimate_memory(weights, nodes, cost);
}

/// Work per prediction: multiply-adds of the scaling and the dot products,
/// plus node comparisons (worst case, per tree the depth).
struct OperationCount {
    std::size_t multiply_adds = 0;
    std::size_t comparisons = 0;
    std::size_t pairwise_evaluations = 0;
};

inline OperationCount operation_count(const Model& m)
{
    OperationCount ops;
    ops.multiply_adds = m.scaling.dim();
    if (m.kind == ModelKind::svm) {
        ops.pairwise_evaluations = m.svm.svms.size();
        for (const auto& s : m.svm.svms)
            ops.multiply_adds += s.dim();
    } else {
        for (const auto& t : m.forest.trees)
            ops.comparisons += static_cast<std::size_t>(t.depth());
    }
    return ops;
}

namespace detail {

inline std::string c_literal(double v)
{
    if (!std::isfinite(v))
        throw ConfigError("cannot export a non-finite constant");
    std::string s = csv::format_double(v);
    if (s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return v < 0.0 || (v == 0.0 && std::signbit(v)) ? "(" + s + ")" : s;
}

/// Index into the 92-wide input of column `col` of the model layout.
inline std::size_t source_feature(const std::vector<int>& links, std::size_t col)
{
    if (col < kGlobalFeatures)
        return col;
    const std::size_t b = (col - kGlobalFeatures) / kLinkBlock;
    return link_block_offset(LinkId(links.at(b))) + (col - kGlobalFeatures) % kLinkBlock;
}

inline void emit_tree(std::ostringstream& out, const CartTree& tree, int node, int indent)
{
    const std::string pad(static_cast<std::size_t>(indent) * 4, ' ');
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.leaf()) {
        out << pad << "votes[" << n.label << "] = votes[" << n.label << "] + 1;\n";
        return;
    }
    out << pad << "if (x[" << n.feature << "] <= " << c_literal(n.threshold) << ") {\n";
    emit_tree(out, tree, n.left, indent + 1);
    out << pad << "} else {\n";
    emit_tree(out, tree, n.right, indent + 1);
    out << pad << "}\n";
}

} // namespace detail

inline std::string model_version_string(const Model& m)
{
    std::string s = "rfvc-model-1 " + to_string(m.kind) + " " + m.taxonomy.name + " links";
    for (int l : m.links)
        s += " " + std::to_string(l);
    return s;
}

/// Freestanding C89 translation unit with two external symbols:
/// `int predict(const double features[92])` and `model_version`. Scaling,
/// dot products, trees, vote tally and argmax are fully unrolled.
inline std::string emit_c_source(const Model& m)
{
    const std::size_t dim = m.scaling.dim();
    const int classes = static_cast<int>(m.taxonomy.size());
    std::ostringstream out;
    out << "/* generated by rfvc; " << to_string(m.kind) << " model, taxonomy " << m.taxonomy.name;
    out << ", classes:";
    for (int c = 0; c < classes; ++c)
        out << " " << c << "=" << m.taxonomy.classes[static_cast<std::size_t>(c)];
    out << " */\n\n";
    out << "const char model_version[] = \"" << model_version_string(m) << "\";\n\n";
    out << "int predict(const double features[" << kFeatureDim << "])\n{\n";
    out << "    double x[" << std::max<std::size_t>(dim, 1) << "];\n";
    if (m.kind == ModelKind::svm)
        out << "    double s;\n";
    out << "    int votes[" << classes << "];\n";
    out << "    int best;\n\n";

    for (std::size_t i = 0; i < dim; ++i) {
        const double lo = m.scaling.lo[i], hi = m.scaling.hi[i];
        if (!(hi > lo)) {
            out << "    x[" << i << "] = 0.0;\n";
            continue;
        }
        out << "    x[" << i << "] = (features[" << detail::source_feature(m.links, i) << "] - "
            << detail::c_literal(lo) << ") / " << detail::c_literal(hi - lo) << " * 2.0 - 1.0;\n";
        out << "    if (x[" << i << "] < -1.0) x[" << i << "] = -1.0;\n";
        out << "    if (x[" << i << "] > 1.0) x[" << i << "] = 1.0;\n";
    }
    out << '\n';
    for (int c = 0; c < classes; ++c)
        out << "    votes[" << c << "] = 0;\n";

    if (m.kind == ModelKind::svm) {
        for (const auto& svm : m.svm.svms) {
            out << "\n    s = " << detail::c_literal(svm.beta.back()) << ";\n";
            for (std::size_t i = 0; i + 1 < svm.beta.size(); ++i)
                out << "    s += " << detail::c_literal(svm.beta[i]) << " * x[" << i << "];\n";
            out << "    if (s > 0.0) votes[" << svm.pos_class << "] = votes[" << svm.pos_class << "] + 1;\n";
            out << "    else votes[" << svm.neg_class << "] = votes[" << svm.neg_class << "] + 1;\n";
        }
    } else {
        for (const auto& tree : m.forest.trees) {
            out << '\n';
            detail::emit_tree(out, tree, 0, 1);
        }
    }

    out << "\n    best = 0;\n";
    for (int c = 1; c < classes; ++c)
        out << "    if (votes[" << c << "] > votes[best]) best = " << c << ";\n";
    out << "    return best;\n}\n";
    return out.str();
}

struct GridPoint {
    int n_trees = 0;
    int max_depth = 0;
    double acc_mean = 0.0;
    double acc_std = 0.0;
    MemoryEstimate memory;
    bool fits = false;
};

struct SweetSpotResult {
    PlatformProfile platform;
    std::vector<GridPoint> grid; // depth-major, then tree count, both ascending
    std::optional<GridPoint> best; // empty: no configuration fits
};

/// Cross-validated accuracy and memory of every (n_trees, max_depth) grid
/// point. One forest of max(n_trees) trees grown to max(depth) per fold
/// serves all points: smaller forests are its prefixes, shallower ones its
/// truncations. Memory is taken from the forest fit on the whole dataset.
inline std::vector<GridPoint> forest_grid(const Dataset& data, const Taxonomy& taxonomy, std::vector<int> tree_counts,
                                          std::vector<int> depths, const FoldPlan& plan, std::uint64_t seed,
                                          const CostModel& cost = {}, int threads = 1)
{
    if (tree_counts.empty() || depths.empty())
        throw ConfigError("sweet spot search needs nonempty grids");
    std::sort(tree_counts.begin(), tree_counts.end());
    std::sort(depths.begin(), depths.end());
    tree_counts.erase(std::unique(tree_counts.begin(), tree_counts.end()), tree_counts.end());
    depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
    if (tree_counts.front() < 1 || depths.front() < 0)
        throw ConfigError("grid values must be positive tree counts and non-negative depths");
    if (plan.size() != data.size())
        throw ConfigError("fold plan does not match the dataset");

    const auto spec = ModelSpec::random_forest(tree_counts.back(), depths.back());
    const std::size_t T = tree_counts.size(), D = depths.size();
    const auto K = static_cast<std::size_t>(plan.k);
    // hits[fold][d][t]
    std::vector<std::vector<std::vector<std::size_t>>> hits(K, std::vector<std::vector<std::size_t>>(D, std::vector<std::size_t>(T, 0)));
    std::vector<std::size_t> tested(K, 0);

    parallel_for(K, threads, [&](std::size_t f) {
        const int fold = static_cast<int>(f);
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        for (auto i : plan.train_indices(fold)) {
            rows.push_back(data.rows[i]);
            labels.push_back(data.labels[i]);
        }
        const Model model = train_model(rows, labels, taxonomy, data.subset.links, spec, derive_seed(seed, f));
        const auto test = plan.test_indices(fold);
        tested[f] = test.size();
        std::vector<int> votes(taxonomy.size());
        for (auto i : test) {
            const auto x = model.scaling.apply(data.rows[i]);
            for (std::size_t d = 0; d < D; ++d) {
                std::fill(votes.begin(), votes.end(), 0);
                std::size_t next = 0;
                for (std::size_t t = 0; t < model.forest.trees.size() && next < T; ++t) {
                    ++votes[static_cast<std::size_t>(model.forest.trees[t].predict(x, depths[d]))];
                    if (static_cast<int>(t + 1) == tree_counts[next]) {
                        const int p = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
                        hits[f][d][next] += p == data.labels[i];
                        ++next;
                    }
                }
            }
        }
    });

    const Model full = train_model(data.rows, data.labels, taxonomy, data.subset.links, spec, seed);
    std::vector<GridPoint> grid;
    for (std::size_t d = 0; d < D; ++d) {
        std::vector<std::size_t> node_prefix{0};
        for (const auto& tree : full.forest.trees)
            node_prefix.push_back(node_prefix.back() + tree.truncated(depths[d]).nodes.size());
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<double> acc(K);
            for (std::size_t f = 0; f < K; ++f)
                acc[f] = tested[f] ? static_cast<double>(hits[f][d][t]) / static_cast<double>(tested[f]) : 0.0;
            const auto s = summarize_accuracies(acc);
            GridPoint g;
            g.n_trees = tree_counts[t];
            g.max_depth = depths[d];
            g.acc_mean = s.mean;
            g.acc_std = s.std;
            g.memory = estimate_memory(2 * full.scaling.dim(), node_prefix[static_cast<std::size_t>(tree_counts[t])], cost);
            grid.push_back(g);
        }
    }
    return grid;
}

/// Most accurate fitting grid point; ties by smaller memory, then lower
/// depth, then fewer trees.
inline SweetSpotResult select_sweet_spot(const std::vector<GridPoint>& grid, const PlatformProfile& platform)
{
    SweetSpotResult r;
    r.platform = platform;
    r.grid = grid;
    for (auto& g : r.grid) {
        g.fits = g.memory.fits(platform);
        if (!g.fits)
            continue;
        const bool better = !r.best || g.acc_mean > r.best->acc_mean ||
                            (g.acc_mean == r.best->acc_mean &&
                             (g.memory.code_bytes < r.best->memory.code_bytes ||
                              (g.memory.code_bytes == r.best->memory.code_bytes &&
                               (g.max_depth < r.best->max_depth ||
                                (g.max_depth == r.best->max_depth && g.n_trees < r.best->n_trees)))));
        if (better)
            r.best = g;
    }
    return r;
}

inline SweetSpotResult sweet_spot_search(const Dataset& data, const Taxonomy& taxonomy, const PlatformProfile& platform,
                                         std::vector<int> tree_counts, std::vector<int> depths, const FoldPlan& plan,
                                         std::uint64_t seed, const CostModel& cost = {}, int threads = 1)
{
    return select_sweet_spot(forest_grid(data, taxonomy, std::move(tree_counts), std::move(depths), plan, seed, cost, threads),
                             platform);
}

} // namespace rfvc
