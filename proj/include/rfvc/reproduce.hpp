#pragma once

#include "rfvc/config.hpp"
#include "rfvc/detector.hpp"
#include "rfvc/eval.hpp"
#include "rfvc/export.hpp"
#include "rfvc/features.hpp"
#include "rfvc/importance.hpp"
#include "rfvc/parallel.hpp"
#include "rfvc/report.hpp"
#include "rfvc/simulator.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace rfvc {

struct ReproduceOptions {
    std::uint64_t seed = 7;
    int binary_count = 2000;  // traces of the two-class corpus, split evenly
    int body_count = 2605;    // traces of the seven-class corpus, split by kBodyStyleWeights
    int wrong_way_count = 500;
    int k = 10;
    ModelSpec svm = ModelSpec::linear_svm();
    ModelSpec forest = ModelSpec::random_forest();
    std::vector<int> grid_trees{1, 2, 5, 10, 25, 50, 100};
    std::vector<int> grid_depths{1, 2, 3, 4, 6, 8, 10, 15, 20};
    SystemConfig system;
    int threads = 1;
};

struct Corpus {
    std::vector<LabeledTrace> traces;
    std::vector<std::optional<TraceAnalysis>> analyses;
    FeatureTable features;
    std::size_t detected_vehicles = 0;
};

/// Runs detection and feature extraction on every trace. Traces without a
/// detected vehicle contribute no feature row.
inline Corpus analyze_corpus(std::vector<LabeledTrace> traces, const SystemConfig& sys, int threads = 1)
{
    Corpus c;
    c.traces = std::move(traces);
    c.analyses.resize(c.traces.size());
    parallel_for(c.traces.size(), threads, [&](std::size_t i) {
        c.analyses[i] = analyze_trace(c.traces[i].trace, sys.topology, sys.params);
    });
    for (std::size_t i = 0; i < c.traces.size(); ++i) {
        const auto& a = *c.analyses[i];
        c.detected_vehicles += a.vehicles.size();
        if (const auto* v = primary_vehicle(a)) {
            c.features.rows.push_back(extract_features(*v, a));
            c.features.labels.push_back(c.traces[i].label);
        }
    }
    return c;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& p)
{
    std::ofstream out(p, std::ios::binary);
    if (!out)
        throw FormatError("cannot write " + p.string());
    return out;
}

struct Moments {
    double n = 0, s = 0, s2 = 0;
    void add(double v)
    {
        ++n;
        s += v;
        s2 += v * v;
    }
    double mean() const { return n ? s / n : 0.0; }
    double std() const { return n ? std::sqrt(std::max(0.0, s2 / n - mean() * mean())) : 0.0; }
};

inline void write_detection_summary(std::ostream& out, const std::string& corpus, const Corpus& c, bool header)
{
    if (header)
        out << "corpus,label,traces,detected_vehicles,nine_link_vehicles,speed_rel_err_mean,length_rel_err_mean\n";
    std::vector<std::string> labels;
    for (const auto& t : c.traces)
        if (std::find(labels.begin(), labels.end(), t.label) == labels.end())
            labels.push_back(t.label);
    for (const auto& label : labels) {
        std::size_t traces = 0, detected = 0, nine = 0;
        Moments ev, el;
        for (std::size_t i = 0; i < c.traces.size(); ++i) {
            if (c.traces[i].label != label)
                continue;
            ++traces;
            const auto& a = *c.analyses[i];
            detected += a.vehicles.size();
            const auto* v = primary_vehicle(a);
            if (!v)
                continue;
            nine += v->link_count() == kNumLinks;
            const auto& truth = *c.traces[i].trace.truth;
            if (v->speed.available())
                ev.add(std::abs(std::abs(v->speed.mps) - std::abs(truth.speed_mps)) / std::abs(truth.speed_mps));
            if (v->length_m)
                el.add(std::abs(*v->length_m - truth.length_m) / truth.length_m);
        }
        out << corpus << ',' << label << ',' << traces << ',' << detected << ',' << nine << ','
            << csv::format_double(ev.mean()) << ',' << csv::format_double(el.mean()) << '\n';
    }
}

/// Per-class mean and std of the global features and the Phi_1 block.
inline void write_fingerprints(std::ostream& out, const std::string& corpus, const FeatureTable& t, bool header)
{
    static constexpr std::array<std::pair<const char*, std::size_t>, 6> cols{{
        {"v_kmh", 0}, {"l_m", 1}, {"phi1_tau", 2}, {"phi1_min", 3}, {"phi1_mean", 4}, {"phi1_std", 5}}};
    if (header) {
        out << "corpus,label,n";
        for (auto [name, idx] : cols)
            out << ',' << name << "_mean," << name << "_std";
        out << '\n';
    }
    std::vector<std::string> labels;
    for (const auto& l : t.labels)
        if (std::find(labels.begin(), labels.end(), l) == labels.end())
            labels.push_back(l);
    for (const auto& label : labels) {
        std::array<Moments, cols.size()> m{};
        for (std::size_t r = 0; r < t.size(); ++r)
            if (t.labels[r] == label)
                for (std::size_t c = 0; c < cols.size(); ++c)
                    m[c].add(t.rows[r].values[cols[c].second]);
        out << corpus << ',' << label << ',' << static_cast<std::size_t>(m[0].n);
        for (const auto& mm : m)
            out << ',' << csv::format_double(mm.mean()) << ',' << csv::format_double(mm.std());
        out << '\n';
    }
}

} // namespace detail

/// Regenerates every desk-scale table and figure analogue under `dir`.
/// Output depends only on the options. Progress goes to `log` if given.
inline void reproduce(const std::filesystem::path& dir, const ReproduceOptions& o, std::ostream* log = nullptr)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    auto note = [&](const std::string& s) {
        if (log)
            *log << s << std::endl;
    };
    const auto& sys = o.system;
    {
        auto out = detail::open_output(dir / "system.conf");
        out << format_system_config(sys);
    }

    // Corpora.
    note("simulating corpora");
    const auto bin_templates = binary_templates();
    const std::vector<int> bin_counts{o.binary_count / 2, o.binary_count - o.binary_count / 2};
    const auto body_templates = body_style_templates();
    const auto body_counts = proportional_counts(kBodyStyleWeights, o.body_count);
    const Corpus bin = analyze_corpus(generate_dataset(bin_templates, bin_counts, derive_seed(o.seed, "binary-corpus"),
                                                       sys.topology, sys.params),
                                      sys, o.threads);
    const Corpus body = analyze_corpus(generate_dataset(body_templates, body_counts,
                                                        derive_seed(o.seed, "body-corpus"), sys.topology, sys.params),
                                       sys, o.threads);
    {
        auto out = detail::open_output(dir / "features_binary_corpus.csv");
        write_feature_csv(out, bin.features);
    }
    {
        auto out = detail::open_output(dir / "features_body_corpus.csv");
        write_feature_csv(out, body.features);
    }
    {
        auto out = detail::open_output(dir / "detection.csv");
        detail::write_detection_summary(out, "binary", bin, true);
        detail::write_detection_summary(out, "body_style", body, false);
    }
    {
        auto out = detail::open_output(dir / "fingerprints.csv");
        detail::write_fingerprints(out, "binary", bin.features, true);
        detail::write_fingerprints(out, "body_style", body.features, false);
    }

    // Wrong-way drivers: the same passages mirrored.
    note("wrong-way study");
    {
        const auto n = static_cast<std::size_t>(o.wrong_way_count);
        const auto forward = generate_dataset(body_templates, proportional_counts(kBodyStyleWeights, o.wrong_way_count),
                                              derive_seed(o.seed, "wrong-way"), sys.topology, sys.params);
        std::array<std::array<std::size_t, 3>, 2> tally{}; // [inverted][direction]
        std::vector<std::array<int, 2>> dirs(n);
        parallel_for(n, o.threads, [&](std::size_t i) {
            for (int inv = 0; inv < 2; ++inv) {
                const auto trace = inv ? invert_direction(forward[i].trace) : forward[i].trace;
                const auto a = analyze_trace(trace, sys.topology, sys.params);
                const auto* v = primary_vehicle(a);
                dirs[i][static_cast<std::size_t>(inv)] = static_cast<int>(v ? v->direction() : Direction::unknown);
            }
        });
        for (const auto& d : dirs)
            for (std::size_t inv = 0; inv < 2; ++inv)
                ++tally[inv][static_cast<std::size_t>(d[inv])];
        auto out = detail::open_output(dir / "wrong_way.csv");
        out << "driving,traces,forward,wrong_way,unknown\n";
        for (std::size_t inv = 0; inv < 2; ++inv)
            out << (inv ? "wrong_way" : "forward") << ',' << n << ','
                << tally[inv][static_cast<std::size_t>(Direction::forward)] << ','
                << tally[inv][static_cast<std::size_t>(Direction::wrong_way)] << ','
                << tally[inv][static_cast<std::size_t>(Direction::unknown)] << '\n';
    }

    // Classification accuracy per taxonomy and model.
    note("cross validation");
    const std::vector<ModelSpec> specs{o.svm, o.forest};
    const auto fold_seed = derive_seed(o.seed, "folds");
    const auto model_seed = derive_seed(o.seed, "models");
    std::vector<EvaluationReport> bin_reports;
    {
        const auto tax = Taxonomy::binary();
        const auto data = make_dataset(bin.features, tax);
        const auto plan = FoldPlan::stratified(data.labels, o.k, fold_seed);
        for (const auto& s : specs)
            bin_reports.push_back(cross_validate(data, tax, s, plan, model_seed, o.threads));
        auto out = detail::open_output(dir / "binary_corpus_cv_summary.csv");
        write_cv_summary(out, bin_reports);
    }

    std::vector<EvaluationReport> reports;
    std::vector<EvaluationReport> subset_reports;
    const auto subsets = standard_subsets();
    {
        auto ops = detail::open_output(dir / "operations.csv");
        ops << "taxonomy,model,pairwise_evaluations,multiply_adds,comparisons,code_bytes\n";
        for (const auto& tax : {Taxonomy::binary(), Taxonomy::size_based(), Taxonomy::body_style()}) {
            note("taxonomy " + tax.name);
            const auto data = make_dataset(body.features, tax);
            const auto plan = FoldPlan::stratified(data.labels, o.k, fold_seed);
            for (const auto& s : specs) {
                reports.push_back(cross_validate(data, tax, s, plan, model_seed, o.threads));
                auto out = detail::open_output(dir / ("confusion_" + tax.name + "_" + s.name() + ".csv"));
                write_confusion_csv(out, reports.back().confusion, tax);

                const Model full = train_model(data.rows, data.labels, tax, all_links(), s, model_seed);
                const auto oc = operation_count(full);
                ops << tax.name << ',' << s.name() << ',' << oc.pairwise_evaluations << ',' << oc.multiply_adds << ','
                    << oc.comparisons << ',' << estimate_memory(full).code_bytes << '\n';
                if (s.kind == ModelKind::svm) {
                    auto imp = detail::open_output(dir / ("importance_" + tax.name + ".csv"));
                    write_importance_csv(imp, importance_multiclass(full.svm, GroupIndex::full()), tax);
                }
            }
            auto sub = subset_evaluation(body.features, tax, o.svm, subsets, plan, model_seed, o.threads);
            subset_reports.insert(subset_reports.end(), sub.begin(), sub.end());
        }
    }
    {
        auto out = detail::open_output(dir / "cv_results.csv");
        write_cv_results(out, reports);
    }
    {
        auto out = detail::open_output(dir / "cv_summary.csv");
        write_cv_summary(out, reports);
    }
    {
        auto out = detail::open_output(dir / "subsets.csv");
        write_subsets_csv(out, subset_reports, subsets);
    }

    // Random-forest sweet spots on the body-style task.
    note("sweet-spot grid");
    {
        const auto tax = Taxonomy::body_style();
        const auto data = make_dataset(body.features, tax);
        const auto plan = FoldPlan::stratified(data.labels, o.k, fold_seed);
        const auto grid = forest_grid(data, tax, o.grid_trees, o.grid_depths, plan, model_seed, {}, o.threads);
        const auto platforms = builtin_platforms();
        auto out = detail::open_output(dir / "sweetspot_grid.csv");
        write_grid_csv(out, grid, platforms);
        std::vector<SweetSpotResult> best;
        for (const auto& p : platforms)
            best.push_back(select_sweet_spot(grid, p));
        auto sout = detail::open_output(dir / "sweetspot.csv");
        write_sweet_spots_csv(sout, best);
    }
    note("done");
}

} // namespace rfvc
