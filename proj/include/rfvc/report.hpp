#pragma once

#include "rfvc/csv.hpp"
#include "rfvc/detector.hpp"
#include "rfvc/eval.hpp"
#include "rfvc/export.hpp"
#include "rfvc/importance.hpp"

#include <ostream>
#include <span>
#include <string>

namespace rfvc {

inline void write_events_csv(std::ostream& out, std::span<const AttenuationEvent> events)
{
    out << "vehicle_id,link,t_start_ms,t_end_ms,min_level\n";
    for (const auto& e : events)
        out << e.vehicle_id << ',' << e.link.value() << ',' << e.t_start_ms << ',' << e.t_end_ms << ','
            << csv::format_double(e.min_level) << '\n';
}

inline std::string to_string(SpeedStatus s)
{
    switch (s) {
    case SpeedStatus::ok:
        return "ok";
    case SpeedStatus::missing_link:
        return "missing_link";
    case SpeedStatus::undefined:
        return "undefined";
    }
    return "unknown";
}

inline std::string to_string(Direction d)
{
    switch (d) {
    case Direction::forward:
        return "forward";
    case Direction::wrong_way:
        return "wrong_way";
    case Direction::unknown:
        break;
    }
    return "unknown";
}

/// Speed and length columns stay empty when unavailable.
inline void write_vehicles_csv(std::ostream& out, std::span<const VehicleObservation> vehicles)
{
    out << "vehicle_id,v_mps,l_m,direction\n";
    for (const auto& v : vehicles) {
        out << v.vehicle_id << ',';
        if (v.speed.available())
            out << csv::format_double(v.speed.mps);
        out << ',';
        if (v.length_m)
            out << csv::format_double(*v.length_m);
        out << ',' << to_string(v.direction()) << '\n';
    }
}

inline constexpr std::string_view kCvResultsHeader = "taxonomy,model,subset,fold,accuracy";
inline constexpr std::string_view kCvSummaryHeader = "taxonomy,model,subset,acc_mean,acc_std";

inline void write_cv_results(std::ostream& out, std::span<const EvaluationReport> reports, bool header = true)
{
    if (header)
        out << kCvResultsHeader << '\n';
    for (const auto& r : reports)
        for (std::size_t f = 0; f < r.fold_accuracy.size(); ++f)
            out << r.taxonomy << ',' << r.model << ',' << r.subset << ',' << f << ','
                << csv::format_double(r.fold_accuracy[f]) << '\n';
}

inline void write_cv_summary(std::ostream& out, std::span<const EvaluationReport> reports, bool header = true)
{
    if (header)
        out << kCvSummaryHeader << '\n';
    for (const auto& r : reports)
        out << r.taxonomy << ',' << r.model << ',' << r.subset << ',' << csv::format_double(r.acc_mean) << ','
            << csv::format_double(r.acc_std) << '\n';
}

/// Row-normalized matrix; rows are true classes, columns predictions.
inline void write_confusion_csv(std::ostream& out, const ConfusionMatrix& m, const Taxonomy& taxonomy)
{
    out << "true_class";
    for (const auto& c : taxonomy.classes)
        out << ',' << c;
    out << '\n';
    const auto n = m.normalized();
    for (std::size_t r = 0; r < n.size(); ++r) {
        out << taxonomy.classes[r];
        for (double v : n[r])
            out << ',' << csv::format_double(v);
        out << '\n';
    }
}

inline void write_importance_csv(std::ostream& out, const ImportanceMatrix& imp, const Taxonomy& taxonomy)
{
    out << "group,class,importance\n";
    for (std::size_t g = 0; g < imp.value.size(); ++g)
        for (std::size_t c = 0; c < imp.value[g].size(); ++c)
            out << group_name(static_cast<int>(g)) << ',' << taxonomy.classes[c] << ','
                << csv::format_double(imp.value[g][c]) << '\n';
}

inline std::string links_string(std::span<const int> links)
{
    std::string s;
    for (int l : links)
        s += (s.empty() ? "" : " ") + std::to_string(l);
    return s;
}

inline void write_subsets_csv(std::ostream& out, std::span<const EvaluationReport> reports,
                              std::span<const SubsetSpec> specs, bool header = true)
{
    if (header)
        out << "taxonomy,model,subset,links,dim,acc_mean,acc_std\n";
    for (const auto& r : reports)
        for (const auto& s : specs)
            if (s.name() == r.subset)
                out << r.taxonomy << ',' << r.model << ',' << r.subset << ',' << links_string(s.links) << ','
                    << s.dim() << ',' << csv::format_double(r.acc_mean) << ',' << csv::format_double(r.acc_std)
                    << '\n';
}

inline void write_grid_csv(std::ostream& out, std::span<const GridPoint> grid,
                           std::span<const PlatformProfile> platforms)
{
    out << "n_trees,max_depth,acc_mean,acc_std,code_bytes,tree_nodes";
    for (const auto& p : platforms)
        out << ",fits_" << p.name;
    out << '\n';
    for (const auto& g : grid) {
        out << g.n_trees << ',' << g.max_depth << ',' << csv::format_double(g.acc_mean) << ','
            << csv::format_double(g.acc_std) << ',' << g.memory.code_bytes << ',' << g.memory.tree_nodes;
        for (const auto& p : platforms)
            out << ',' << (g.memory.fits(p) ? 1 : 0);
        out << '\n';
    }
}

inline void write_sweet_spots_csv(std::ostream& out, std::span<const SweetSpotResult> results)
{
    out << "platform,program_memory_bytes,fits,n_trees,max_depth,acc_mean,acc_std,code_bytes\n";
    for (const auto& r : results) {
        out << r.platform.name << ',' << r.platform.program_memory_bytes << ',';
        if (r.best)
            out << "1," << r.best->n_trees << ',' << r.best->max_depth << ',' << csv::format_double(r.best->acc_mean)
                << ',' << csv::format_double(r.best->acc_std) << ',' << r.best->memory.code_bytes << '\n';
        else
            out << "0,,,,,\n";
    }
}

} // namespace rfvc
