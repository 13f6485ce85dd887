#pragma once

#include "rfvc/error.hpp"
#include "rfvc/features.hpp"
#include "rfvc/model.hpp"
#include "rfvc/parallel.hpp"
#include "rfvc/rng.hpp"
#include "rfvc/topology.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace rfvc {

/// Fraction of exact matches.
template <typename T>
double accuracy(std::span<const T> predictions, std::span<const T> labels)
{
    if (predictions.empty() || predictions.size() != labels.size())
        throw ConfigError("accuracy: need equally long, nonempty lists");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        hits += predictions[i] == labels[i];
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

template <typename T>
double accuracy(const std::vector<T>& predictions, const std::vector<T>& labels)
{
    return accuracy(std::span<const T>(predictions), std::span<const T>(labels));
}

struct AccuracySummary {
    double mean = 0.0;
    double std = 0.0;
};

/// Mean of the fold accuracies and sqrt(mean of squares - squared mean).
inline AccuracySummary summarize_accuracies(std::span<const double> acc)
{
    if (acc.empty())
        throw ConfigError("summarize_accuracies: no folds");
    double s = 0.0, s2 = 0.0;
    for (double a : acc) {
        s += a;
        s2 += a * a;
    }
    const double k = static_cast<double>(acc.size());
    const double mean = s / k;
    return {mean, std::sqrt(std::max(0.0, s2 / k - mean * mean))};
}

/// Stratified fold assignment: each class is shuffled with its own derived
/// seed, then all samples are dealt round-robin (class by class, one
/// running counter) onto the folds.
struct FoldPlan {
    int k = 10;
    std::uint64_t seed = 0;
    std::vector<int> fold_of;

    static FoldPlan stratified(std::span<const int> labels, int k, std::uint64_t seed)
    {
        if (k < 2 || static_cast<std::size_t>(k) > labels.size())
            throw ConfigError("fold count must satisfy 2 <= k <= number of samples");
        FoldPlan plan;
        plan.k = k;
        plan.seed = seed;
        plan.fold_of.assign(labels.size(), -1);
        const int classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
        std::size_t counter = 0;
        for (int c = 0; c < classes; ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == c)
                    members.push_back(i);
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
            rng.shuffle(members);
            for (auto i : members)
                plan.fold_of[i] = static_cast<int>(counter++ % static_cast<std::size_t>(k));
        }
        return plan;
    }

    std::size_t size() const noexcept { return fold_of.size(); }

    std::vector<std::size_t> test_indices(int fold) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] == fold)
                out.push_back(i);
        return out;
    }

    std::vector<std::size_t> train_indices(int fold) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < fold_of.size(); ++i)
            if (fold_of[i] != fold)
                out.push_back(i);
        return out;
    }
};

/// counts[r][c]: samples of true class r predicted as c.
struct ConfusionMatrix {
    std::vector<std::vector<std::size_t>> counts;

    explicit ConfusionMatrix(std::size_t classes = 0) : counts(classes, std::vector<std::size_t>(classes, 0)) {}

    std::size_t classes() const noexcept { return counts.size(); }
    void add(int truth, int predicted) { ++counts.at(static_cast<std::size_t>(truth)).at(static_cast<std::size_t>(predicted)); }

    /// Row-normalized; rows of absent classes stay zero.
    std::vector<std::vector<double>> normalized() const
    {
        std::vector<std::vector<double>> out(classes(), std::vector<double>(classes(), 0.0));
        for (std::size_t r = 0; r < classes(); ++r) {
            std::size_t total = 0;
            for (auto c : counts[r])
                total += c;
            if (total)
                for (std::size_t c = 0; c < classes(); ++c)
                    out[r][c] = static_cast<double>(counts[r][c]) / static_cast<double>(total);
        }
        return out;
    }
};

inline ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels,
                                        const Taxonomy& taxonomy)
{
    if (predictions.size() != labels.size())
        throw ConfigError("confusion_matrix: length mismatch");
    ConfusionMatrix m(taxonomy.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        m.add(labels[i], predictions[i]);
    return m;
}

/// A link subset: an id letter and the links whose blocks are kept.
struct SubsetSpec {
    char id = 'A';
    std::vector<int> links;

    std::string name() const { return std::string(1, id); }
    std::size_t straight_count() const
    {
        return static_cast<std::size_t>(std::count_if(links.begin(), links.end(), [](int l) {
            return LinkId(l).is_straight();
        }));
    }
    /// Speed and length need onsets on at least two straight links.
    bool keeps_global() const { return straight_count() >= 2; }
    std::size_t dim() const { return kGlobalFeatures + kLinkBlock * links.size(); }

    void validate() const
    {
        if (links.empty())
            throw ConfigError("subset " + name() + " is empty");
        for (std::size_t i = 0; i < links.size(); ++i) {
            (void)LinkId(links[i]);
            if (i && links[i] <= links[i - 1])
                throw ConfigError("subset " + name() + ": links must be strictly ascending");
        }
    }
};

inline std::vector<SubsetSpec> standard_subsets()
{
    return {
        {'A', {1, 2, 3, 4, 5, 6, 7, 8, 9}}, {'B', {1}}, {'C', {5}}, {'D', {9}}, {'E', {1, 5}},
        {'F', {1, 9}}, {'G', {5, 9}}, {'H', {1, 5, 9}}, {'I', {2}}, {'J', {4}},
        {'K', {6}}, {'L', {8}}, {'M', {1, 2, 4, 5}}, {'N', {5, 6, 8, 9}}, {'O', {2, 4, 6, 8}},
        {'P', {1, 2, 4, 6, 8, 9}}, {'Q', {3}}, {'R', {7}}, {'S', {3, 7}}, {'T', {1, 3, 7, 9}},
    };
}

inline SubsetSpec subset_by_id(char id)
{
    for (auto& s : standard_subsets())
        if (s.id == id)
            return s;
    throw ConfigError(std::string("unknown subset id: ") + id);
}

/// Global pair (zeroed unless the subset keeps it) followed by the blocks
/// of the subset's links.
inline std::vector<double> reduce_features(const FeatureVector& fv, const SubsetSpec& subset)
{
    std::vector<double> out;
    out.reserve(subset.dim());
    if (subset.keeps_global())
        out.insert(out.end(), fv.values.begin(), fv.values.begin() + kGlobalFeatures);
    else
        out.insert(out.end(), kGlobalFeatures, 0.0);
    for (int l : subset.links) {
        const auto b = fv.block(LinkId(l));
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

/// Feature rows and class indices of a table under a taxonomy and subset.
struct Dataset {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    SubsetSpec subset;

    std::size_t size() const noexcept { return rows.size(); }
};

inline Dataset make_dataset(const FeatureTable& table, const Taxonomy& taxonomy,
                            const SubsetSpec& subset = standard_subsets().front())
{
    subset.validate();
    Dataset d;
    d.subset = subset;
    d.rows.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        d.rows.push_back(reduce_features(table.rows[i], subset));
        d.labels.push_back(static_cast<int>(taxonomy.index_of(table.labels[i])));
    }
    return d;
}

struct EvaluationReport {
    std::string taxonomy;
    std::string model;
    std::string subset = "A";
    std::vector<double> fold_accuracy;
    double acc_mean = 0.0;
    double acc_std = 0.0;
    ConfusionMatrix confusion;
    std::vector<int> predictions; // per sample, pooled over the test folds
};

/// k-fold cross validation over a shared plan: per fold, scaling and model
/// are fit on the training part only. The model seed of fold i is
/// derive_seed(seed, i).
inline EvaluationReport cross_validate(const Dataset& data, const Taxonomy& taxonomy, const ModelSpec& spec,
                                       const FoldPlan& plan, std::uint64_t seed, int threads = 1)
{
    if (plan.size() != data.size())
        throw ConfigError("cross_validate: fold plan does not match the dataset");
    if (plan.k < 2 || static_cast<std::size_t>(plan.k) > data.size())
        throw ConfigError("fold count must satisfy 2 <= k <= number of samples");
    EvaluationReport rep;
    rep.taxonomy = taxonomy.name;
    rep.model = spec.name();
    rep.subset = data.subset.name();
    rep.fold_accuracy.assign(static_cast<std::size_t>(plan.k), 0.0);
    rep.predictions.assign(data.size(), -1);

    parallel_for(static_cast<std::size_t>(plan.k), threads, [&](std::size_t f) {
        const int fold = static_cast<int>(f);
        const auto train = plan.train_indices(fold);
        const auto test = plan.test_indices(fold);
        std::vector<std::vector<double>> rows;
        std::vector<int> labels;
        rows.reserve(train.size());
        for (auto i : train) {
            rows.push_back(data.rows[i]);
            labels.push_back(data.labels[i]);
        }
        const Model model = train_model(rows, labels, taxonomy, data.subset.links, spec, derive_seed(seed, f));
        std::size_t hits = 0;
        for (auto i : test) {
            const int p = model.predict(data.rows[i]);
            rep.predictions[i] = p;
            hits += p == data.labels[i];
        }
        rep.fold_accuracy[f] = test.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(test.size());
    });

    const auto s = summarize_accuracies(rep.fold_accuracy);
    rep.acc_mean = s.mean;
    rep.acc_std = s.std;
    rep.confusion = confusion_matrix(rep.predictions, data.labels, taxonomy);
    return rep;
}

/// Cross validation of every subset over one shared fold plan.
inline std::vector<EvaluationReport> subset_evaluation(const FeatureTable& table, const Taxonomy& taxonomy,
                                                       const ModelSpec& spec, std::span<const SubsetSpec> subsets,
                                                       const FoldPlan& plan, std::uint64_t seed, int threads = 1)
{
    std::vector<EvaluationReport> out;
    for (const auto& s : subsets)
        out.push_back(cross_validate(make_dataset(table, taxonomy, s), taxonomy, spec, plan, seed, threads));
    return out;
}

} // namespace rfvc
