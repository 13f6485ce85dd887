#pragma once

#include <rfvc.hpp>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixture {

/// Template with every spread and noise term removed.
inline rfvc::ClassTemplate noise_free(double speed_kmh, double length_m, double min_level = 0.72,
                                      double mean_level = 0.86, int lobes = 1)
{
    rfvc::ClassTemplate t;
    t.label = "probe";
    t.speed_kmh = {speed_kmh, 0.0};
    t.length_m = {length_m, 0.0};
    t.min_level = {min_level, 0.0};
    t.mean_level = {mean_level, 0.0};
    t.noise_std = 0.0;
    t.lobes = lobes;
    return t;
}

inline rfvc::GeneratorOptions quiet_idle()
{
    rfvc::GeneratorOptions o;
    o.idle_noise_db = 0.0;
    return o;
}

/// Features of freshly simulated traces; traces without a vehicle are
/// skipped.
inline rfvc::FeatureTable simulate_features(const std::vector<rfvc::ClassTemplate>& templates,
                                            const std::vector<int>& counts, std::uint64_t seed)
{
    const auto traces = rfvc::generate_dataset(templates, counts, seed);
    rfvc::FeatureTable t;
    for (const auto& lt : traces) {
        if (auto fv = rfvc::trace_features(lt.trace, {}, {})) {
            t.rows.push_back(*fv);
            t.labels.push_back(lt.label);
        }
    }
    return t;
}

/// Gaussian blobs, one per class, centred at +/- 1 along successive axes.
inline rfvc::Dataset blobs(int classes, int per_class, std::size_t dim, double spread, unsigned seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, spread);
    rfvc::Dataset d;
    d.subset = rfvc::subset_by_id('A');
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            std::vector<double> x(dim);
            for (auto& v : x)
                v = n(gen);
            x[static_cast<std::size_t>(c) % dim] += c % 2 ? -3.0 : 3.0;
            x[(static_cast<std::size_t>(c) + 1) % dim] += 1.5 * c;
            d.rows.push_back(std::move(x));
            d.labels.push_back(c);
        }
    return d;
}

/// Temporary directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("rfvc_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace fixture
