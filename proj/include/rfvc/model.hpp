#pragma once

#include "rfvc/error.hpp"
#include "rfvc/features.hpp"
#include "rfvc/forest.hpp"
#include "rfvc/svm.hpp"
#include "rfvc/topology.hpp"

#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace rfvc {

enum class ModelKind { svm, forest };

inline std::string to_string(ModelKind k) { return k == ModelKind::svm ? "svm" : "rf"; }

inline ModelKind parse_model_kind(std::string_view s)
{
    if (s == "svm")
        return ModelKind::svm;
    if (s == "rf" || s == "forest")
        return ModelKind::forest;
    throw ConfigError("unknown model kind: " + std::string(s));
}

struct ModelSpec {
    ModelKind kind = ModelKind::svm;
    SvmOptions svm;
    ForestOptions forest;

    static ModelSpec linear_svm(double C = 1.0, int epochs = 50)
    {
        ModelSpec s;
        s.svm.C = C;
        s.svm.epochs = epochs;
        return s;
    }
    static ModelSpec random_forest(int n_trees = 100, int max_depth = 10)
    {
        ModelSpec s;
        s.kind = ModelKind::forest;
        s.forest.n_trees = n_trees;
        s.forest.max_depth = max_depth;
        return s;
    }
    std::string name() const { return to_string(kind); }
};

inline std::vector<int> all_links()
{
    std::vector<int> v(kNumLinks);
    std::iota(v.begin(), v.end(), 1);
    return v;
}

/// Program-memory cost constants of the emitted inference code.
struct CostModel {
    std::size_t overhead_bytes = 512;
    std::size_t weight_bytes = 4; // per stored constant, scaling bounds included
    std::size_t node_bytes = 8;   // per tree node

    friend bool operator==(const CostModel&, const CostModel&) = default;
};

/// A trained classifier together with everything needed to apply it to
/// raw feature rows: taxonomy, feature layout (the links whose blocks are
/// present) and the scaling fit on its training data.
struct Model {
    Taxonomy taxonomy = Taxonomy::binary();
    std::vector<int> links = all_links();
    ScalingTransform scaling;
    ModelKind kind = ModelKind::svm;
    SvmEnsemble svm;
    RandomForest forest;

    std::size_t input_dim() const noexcept { return scaling.dim(); }

    int predict_scaled(std::span<const double> x) const
    {
        return kind == ModelKind::svm ? svm.predict(x) : forest.predict(x);
    }

    int predict(std::span<const double> raw) const { return predict_scaled(scaling.apply(raw)); }
};

/// Fits scaling on `rows` and trains the classifier on the scaled rows.
inline Model train_model(std::span<const std::vector<double>> rows, std::span<const int> labels,
                         const Taxonomy& taxonomy, std::vector<int> links, const ModelSpec& spec, std::uint64_t seed)
{
    Model m;
    m.taxonomy = taxonomy;
    m.links = std::move(links);
    m.kind = spec.kind;
    m.scaling = ScalingTransform::fit(rows);
    std::vector<std::vector<double>> scaled;
    scaled.reserve(rows.size());
    for (const auto& r : rows)
        scaled.push_back(m.scaling.apply(r));
    const int k = static_cast<int>(taxonomy.size());
    if (spec.kind == ModelKind::svm)
        m.svm = train_svm_ensemble(scaled, labels, k, spec.svm, seed);
    else
        m.forest = train_random_forest(scaled, labels, k, spec.forest, seed);
    return m;
}

} // namespace rfvc
