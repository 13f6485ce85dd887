// rfvc command-line front end: simulate -> detect -> extract -> train ->
// evaluate / confusion / importance / subsets -> export / sweetspot, plus
// `reproduce` for the whole study in one go.

#include "rfvc.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace rfvc;

namespace {

struct Globals {
    std::uint64_t seed = 7;
    int threads = default_threads();
    std::string config; // system config file; empty = defaults
};

SystemConfig system_config(const Globals& g)
{
    if (g.config.empty() || g.config == "default")
        return {};
    return load_system_config(g.config);
}

std::ofstream open_out(const std::string& path)
{
    if (auto parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("cannot write " + path);
    return out;
}

FeatureTable load_features(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open " + path);
    return read_feature_csv(in, path);
}

std::vector<Taxonomy> taxonomies_from(const std::vector<std::string>& names)
{
    std::vector<Taxonomy> out;
    for (const auto& n : names) {
        if (n == "all") {
            out = {Taxonomy::binary(), Taxonomy::size_based(), Taxonomy::body_style()};
            continue;
        }
        out.push_back(Taxonomy::by_name(n));
    }
    return out;
}

struct ModelFlags {
    std::string kind = "svm";
    double C = 1.0;
    int epochs = 50;
    int trees = 100;
    int depth = 10;

    void add(CLI::App* app, bool allow_all = false)
    {
        app->add_option("--model", kind, allow_all ? "svm, rf or all" : "svm or rf")->capture_default_str();
        app->add_option("--C", C, "SVM trade-off constant")->capture_default_str();
        app->add_option("--epochs", epochs, "SVM training epochs")->capture_default_str();
        app->add_option("--trees", trees, "random forest size")->capture_default_str();
        app->add_option("--depth", depth, "random forest maximum depth")->capture_default_str();
    }

    ModelSpec spec(ModelKind k) const
    {
        return k == ModelKind::svm ? ModelSpec::linear_svm(C, epochs) : ModelSpec::random_forest(trees, depth);
    }

    std::vector<ModelSpec> specs() const
    {
        if (kind == "all")
            return {spec(ModelKind::svm), spec(ModelKind::forest)};
        return {spec(parse_model_kind(kind))};
    }
};

std::vector<SubsetSpec> subsets_from(const std::string& ids)
{
    if (ids.empty() || ids == "all")
        return standard_subsets();
    std::vector<SubsetSpec> out;
    for (char c : ids)
        if (c != ',' && c != ' ')
            out.push_back(subset_by_id(c));
    return out;
}

std::vector<int> parse_int_list(const std::string& s)
{
    std::vector<int> out;
    for (auto f : csv::split(s))
        out.push_back(static_cast<int>(csv::parse_int(f, "list")));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rfvc: radio-fingerprint vehicle detection and classification"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "master seed; every stage derives its own")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (results do not depend on it)");
    app.add_option("--config,--params", g.config, "system configuration file or 'default'");

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate synthetic traces and a label sidecar");
    std::string sim_classes = "binary", sim_out;
    int sim_count = 100;
    bool sim_wrong_way = false;
    sim->add_option("--classes", sim_classes, "binary or body_style")->capture_default_str();
    sim->add_option("--count", sim_count, "number of traces")->capture_default_str();
    sim->add_option("--out", sim_out, "output directory")->required();
    sim->add_flag("--wrong-way", sim_wrong_way, "mirror every passage (wrong-way drivers)");

    // detect
    auto* det = app.add_subcommand("detect", "detect vehicles in one trace");
    std::string det_in, det_out, det_vehicles;
    det->add_option("--in", det_in, "trace CSV")->required();
    det->add_option("--out", det_out, "events CSV (default: stdout)");
    det->add_option("--vehicles", det_vehicles, "per-vehicle CSV with speed, direction and length");

    // extract
    auto* ext = app.add_subcommand("extract", "build the feature matrix of a labelled trace set");
    std::string ext_labels, ext_out;
    ext->add_option("--labels", ext_labels, "label sidecar CSV; trace paths are relative to it")->required();
    ext->add_option("--out", ext_out, "feature CSV")->required();

    // train
    auto* trn = app.add_subcommand("train", "train a model on a feature matrix");
    std::string trn_features, trn_taxonomy = "binary", trn_subset = "A", trn_out;
    ModelFlags trn_model;
    trn->add_option("--features", trn_features)->required();
    trn->add_option("--taxonomy", trn_taxonomy)->capture_default_str();
    trn->add_option("--subset", trn_subset, "link subset id A..T")->capture_default_str();
    trn->add_option("--out", trn_out, "model JSON")->required();
    trn_model.add(trn);

    // evaluate
    auto* evl = app.add_subcommand("evaluate", "k-fold cross validation");
    std::string evl_features, evl_results, evl_summary, evl_subsets = "A";
    std::vector<std::string> evl_taxonomies{"all"};
    int evl_k = 10;
    ModelFlags evl_model;
    evl_model.kind = "all";
    evl->add_option("--features", evl_features)->required();
    evl->add_option("--taxonomy", evl_taxonomies, "binary, size_based, body_style or all");
    evl->add_option("--subsets", evl_subsets, "subset ids, e.g. AHM")->capture_default_str();
    evl->add_option("--k", evl_k)->capture_default_str();
    evl->add_option("--results", evl_results, "per-fold CSV")->required();
    evl->add_option("--summary", evl_summary, "summary CSV")->required();
    evl_model.add(evl, true);

    // confusion
    auto* cnf = app.add_subcommand("confusion", "row-normalized confusion matrix from cross validation");
    std::string cnf_features, cnf_taxonomy = "body_style", cnf_out;
    int cnf_k = 10;
    ModelFlags cnf_model;
    cnf->add_option("--features", cnf_features)->required();
    cnf->add_option("--taxonomy", cnf_taxonomy)->capture_default_str();
    cnf->add_option("--k", cnf_k)->capture_default_str();
    cnf->add_option("--out", cnf_out)->required();
    cnf_model.add(cnf);

    // importance
    auto* imp = app.add_subcommand("importance", "feature-group importance of a trained SVM model");
    std::string imp_model, imp_out;
    imp->add_option("--model", imp_model, "model JSON")->required();
    imp->add_option("--out", imp_out)->required();

    // subsets
    auto* sub = app.add_subcommand("subsets", "cross validation over link subsets");
    std::string sub_features, sub_taxonomy = "binary", sub_ids = "all", sub_out;
    int sub_k = 10;
    ModelFlags sub_model;
    sub->add_option("--features", sub_features)->required();
    sub->add_option("--taxonomy", sub_taxonomy)->capture_default_str();
    sub->add_option("--subsets", sub_ids)->capture_default_str();
    sub->add_option("--k", sub_k)->capture_default_str();
    sub->add_option("--out", sub_out)->required();
    sub_model.add(sub);

    // export
    auto* exp = app.add_subcommand("export", "emit standalone C inference code");
    std::string exp_model, exp_out, exp_platform;
    exp->add_option("--model", exp_model, "model JSON")->required();
    exp->add_option("--out", exp_out, "C source")->required();
    exp->add_option("--platform", exp_platform, "msp, atmega or esp; refuse models that do not fit");

    // sweetspot
    auto* swt = app.add_subcommand("sweetspot", "random-forest grid search under platform budgets");
    std::string swt_features, swt_taxonomy = "body_style", swt_platform = "all", swt_trees = "1,2,5,10,25,50,100",
                                swt_depths = "1,2,3,4,6,8,10,15,20", swt_grid, swt_out;
    int swt_k = 10;
    swt->add_option("--features", swt_features)->required();
    swt->add_option("--taxonomy", swt_taxonomy)->capture_default_str();
    swt->add_option("--platform", swt_platform, "msp, atmega, esp or all")->capture_default_str();
    swt->add_option("--trees", swt_trees, "comma-separated tree counts")->capture_default_str();
    swt->add_option("--depths", swt_depths, "comma-separated depths")->capture_default_str();
    swt->add_option("--k", swt_k)->capture_default_str();
    swt->add_option("--grid", swt_grid, "grid CSV");
    swt->add_option("--out", swt_out, "sweet-spot CSV")->required();

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "run the whole study and write all result CSVs");
    std::string rep_out;
    ReproduceOptions rep_opt;
    rep->add_option("--out", rep_out, "output directory")->required();
    rep->add_option("--binary-count", rep_opt.binary_count)->capture_default_str();
    rep->add_option("--body-count", rep_opt.body_count)->capture_default_str();
    rep->add_option("--wrong-way-count", rep_opt.wrong_way_count)->capture_default_str();
    rep->add_option("--k", rep_opt.k)->capture_default_str();
    rep->add_option("--trees", rep_opt.forest.forest.n_trees)->capture_default_str();
    rep->add_option("--depth", rep_opt.forest.forest.max_depth)->capture_default_str();
    bool rep_quiet = false;
    rep->add_flag("--quiet", rep_quiet, "no progress output");

    for (auto* s : app.get_subcommands({}))
        s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const SystemConfig cfg = system_config(g);

        if (*sim) {
            const bool binary = sim_classes == "binary";
            if (!binary && sim_classes != "body_style" && sim_classes != "body-style")
                throw ConfigError("--classes must be binary or body_style");
            const auto templates = binary ? binary_templates() : body_style_templates();
            const auto counts = binary ? std::vector<int>{sim_count / 2, sim_count - sim_count / 2}
                                       : proportional_counts(kBodyStyleWeights, sim_count);
            auto data = generate_dataset(templates, counts, derive_seed(g.seed, "simulate"), cfg.topology, cfg.params);
            fs::create_directories(sim_out);
            std::vector<LabelRecord> records;
            for (std::size_t i = 0; i < data.size(); ++i) {
                auto& t = data[i].trace;
                if (sim_wrong_way)
                    t = invert_direction(t);
                char name[32];
                std::snprintf(name, sizeof name, "trace_%05zu.csv", i);
                save_trace((fs::path(sim_out) / name).string(), t);
                records.push_back({name, data[i].label, t.truth->speed_mps * t.truth->direction, t.truth->length_m,
                                   t.truth->direction});
            }
            auto out = open_out((fs::path(sim_out) / "labels.csv").string());
            write_labels_csv(out, records);
        } else if (*det) {
            const auto trace = load_trace(det_in);
            const auto a = analyze_trace(trace, cfg.topology, cfg.params);
            if (det_out.empty()) {
                write_events_csv(std::cout, a.events);
            } else {
                auto out = open_out(det_out);
                write_events_csv(out, a.events);
            }
            if (!det_vehicles.empty()) {
                auto out = open_out(det_vehicles);
                write_vehicles_csv(out, a.vehicles);
            }
        } else if (*ext) {
            std::ifstream in(ext_labels, std::ios::binary);
            if (!in)
                throw FormatError("cannot open " + ext_labels);
            const auto records = read_labels_csv(in, ext_labels);
            const auto base = fs::path(ext_labels).parent_path();
            std::vector<std::optional<FeatureVector>> rows(records.size());
            parallel_for(records.size(), g.threads, [&](std::size_t i) {
                rows[i] = trace_features(load_trace((base / records[i].trace_file).string()), cfg.topology, cfg.params);
            });
            FeatureTable table;
            for (std::size_t i = 0; i < records.size(); ++i) {
                if (!rows[i]) {
                    std::cerr << "warning: no vehicle detected in " << records[i].trace_file << '\n';
                    continue;
                }
                table.rows.push_back(*rows[i]);
                table.labels.push_back(records[i].label);
            }
            auto out = open_out(ext_out);
            write_feature_csv(out, table);
        } else if (*trn) {
            const auto table = load_features(trn_features);
            const auto tax = Taxonomy::by_name(trn_taxonomy);
            if (trn_subset.size() != 1)
                throw ConfigError("--subset takes a single id");
            const auto data = make_dataset(table, tax, subset_by_id(trn_subset[0]));
            const auto model = train_model(data.rows, data.labels, tax, data.subset.links,
                                           trn_model.spec(parse_model_kind(trn_model.kind)), derive_seed(g.seed, "train"));
            save_model(trn_out, model);
        } else if (*evl) {
            const auto table = load_features(evl_features);
            std::vector<EvaluationReport> reports;
            for (const auto& tax : taxonomies_from(evl_taxonomies)) {
                const auto base = make_dataset(table, tax);
                const auto plan = FoldPlan::stratified(base.labels, evl_k, derive_seed(g.seed, "folds"));
                for (const auto& spec : evl_model.specs())
                    for (const auto& s : subsets_from(evl_subsets))
                        reports.push_back(cross_validate(make_dataset(table, tax, s), tax, spec, plan,
                                                         derive_seed(g.seed, "models"), g.threads));
            }
            auto r = open_out(evl_results);
            write_cv_results(r, reports);
            auto s = open_out(evl_summary);
            write_cv_summary(s, reports);
        } else if (*cnf) {
            const auto table = load_features(cnf_features);
            const auto tax = Taxonomy::by_name(cnf_taxonomy);
            const auto data = make_dataset(table, tax);
            const auto plan = FoldPlan::stratified(data.labels, cnf_k, derive_seed(g.seed, "folds"));
            const auto r = cross_validate(data, tax, cnf_model.spec(parse_model_kind(cnf_model.kind)), plan,
                                          derive_seed(g.seed, "models"), g.threads);
            auto out = open_out(cnf_out);
            write_confusion_csv(out, r.confusion, tax);
        } else if (*imp) {
            const auto model = load_model(imp_model);
            if (model.kind != ModelKind::svm)
                throw ConfigError("importance is defined for SVM models only");
            auto out = open_out(imp_out);
            write_importance_csv(out, importance_multiclass(model.svm, GroupIndex::for_links(model.links)),
                                 model.taxonomy);
        } else if (*sub) {
            const auto table = load_features(sub_features);
            const auto tax = Taxonomy::by_name(sub_taxonomy);
            const auto specs = subsets_from(sub_ids);
            const auto base = make_dataset(table, tax);
            const auto plan = FoldPlan::stratified(base.labels, sub_k, derive_seed(g.seed, "folds"));
            const auto reports = subset_evaluation(table, tax, sub_model.spec(parse_model_kind(sub_model.kind)), specs,
                                                   plan, derive_seed(g.seed, "models"), g.threads);
            auto out = open_out(sub_out);
            write_subsets_csv(out, reports, specs);
        } else if (*exp) {
            const auto j = load_json(exp_model);
            const auto model = model_from_json(j);
            const auto mem = estimate_memory(model, cost_model_from_json(j));
            const auto ops = operation_count(model);
            std::cout << "code_bytes=" << mem.code_bytes << " weights=" << mem.weights << " tree_nodes=" << mem.tree_nodes
                      << " multiply_adds=" << ops.multiply_adds << " comparisons=" << ops.comparisons
                      << " pairwise_evaluations=" << ops.pairwise_evaluations << '\n';
            if (!exp_platform.empty()) {
                const auto p = platform_by_name(exp_platform);
                if (!mem.fits(p))
                    throw NoFitError("model needs " + std::to_string(mem.code_bytes) + " bytes; " + p.name +
                                     " provides " + std::to_string(p.program_memory_bytes));
            }
            auto out = open_out(exp_out);
            out << emit_c_source(model);
        } else if (*swt) {
            const auto table = load_features(swt_features);
            const auto tax = Taxonomy::by_name(swt_taxonomy);
            const auto data = make_dataset(table, tax);
            const auto plan = FoldPlan::stratified(data.labels, swt_k, derive_seed(g.seed, "folds"));
            const auto grid = forest_grid(data, tax, parse_int_list(swt_trees), parse_int_list(swt_depths), plan,
                                          derive_seed(g.seed, "models"), {}, g.threads);
            std::vector<PlatformProfile> platforms =
                swt_platform == "all" ? builtin_platforms() : std::vector<PlatformProfile>{platform_by_name(swt_platform)};
            if (!swt_grid.empty()) {
                auto out = open_out(swt_grid);
                write_grid_csv(out, grid, platforms);
            }
            std::vector<SweetSpotResult> best;
            bool any_missing = false;
            for (const auto& p : platforms) {
                best.push_back(select_sweet_spot(grid, p));
                any_missing = any_missing || !best.back().best;
            }
            auto out = open_out(swt_out);
            write_sweet_spots_csv(out, best);
            if (any_missing)
                throw NoFitError("no grid configuration fits at least one platform");
        } else if (*rep) {
            rep_opt.seed = g.seed;
            rep_opt.threads = g.threads;
            rep_opt.system = cfg;
            reproduce(rep_out, rep_opt, rep_quiet ? nullptr : &std::cerr);
        }
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 3;
    } catch (const NoFitError& e) {
        std::cerr << "no fit: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
