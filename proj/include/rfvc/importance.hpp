#pragma once

#include "rfvc/error.hpp"
#include "rfvc/features.hpp"
#include "rfvc/svm.hpp"

#include <cmath>
#include <vector>

namespace rfvc {

/// I(j, y) over groups j (rows, G then Phi_1..Phi_9) and classes y. Rows of
/// groups whose weights are all zero, or that are absent from the model's
/// layout, are uniform and flagged.
struct ImportanceMatrix {
    std::vector<std::vector<double>> value;
    std::vector<bool> degenerate;

    double operator()(std::size_t group, std::size_t cls) const { return value[group][cls]; }
};

namespace detail {

// Accumulates |beta| per (group, class) and normalizes per group. `cls_of`
// maps (svm index, sign) to the class receiving the weight.
template <typename ClassOf>
ImportanceMatrix importance_impl(std::span<const LinearSvm> svms, const GroupIndex& groups, std::size_t classes,
                                 ClassOf&& cls_of)
{
    const std::size_t G = GroupIndex::group_count();
    std::vector<std::vector<double>> acc(G, std::vector<double>(classes, 0.0));
    std::vector<double> z(G, 0.0);
    for (std::size_t k = 0; k < svms.size(); ++k) {
        const auto& beta = svms[k].beta;
        if (beta.size() != groups.dim() + 1)
            throw ConfigError("importance: weight count does not match the group index");
        for (std::size_t i = 0; i < groups.dim(); ++i) { // bias excluded
            const double b = beta[i];
            if (b == 0.0)
                continue;
            const auto g = static_cast<std::size_t>(groups.group_of[i]);
            acc[g][static_cast<std::size_t>(cls_of(k, b > 0.0 ? 1 : -1))] += std::abs(b);
            z[g] += std::abs(b);
        }
    }
    ImportanceMatrix out;
    out.value.assign(G, std::vector<double>(classes, 0.0));
    out.degenerate.assign(G, false);
    for (std::size_t g = 0; g < G; ++g) {
        if (z[g] == 0.0) {
            out.degenerate[g] = true;
            for (auto& v : out.value[g])
                v = 1.0 / static_cast<double>(classes);
            continue;
        }
        for (std::size_t c = 0; c < classes; ++c)
            out.value[g][c] = acc[g][c] / z[g];
    }
    return out;
}

} // namespace detail

/// Binary form: columns are (class of sign -1, class of sign +1), i.e.
/// (neg_class, pos_class) of the SVM.
inline ImportanceMatrix importance_binary(const LinearSvm& svm, const GroupIndex& groups)
{
    return detail::importance_impl(std::span<const LinearSvm>(&svm, 1), groups, 2,
                                   [](std::size_t, int sign) { return sign > 0 ? 1 : 0; });
}

/// Multi-class form: the weight beta_{i,k} counts toward gamma(k, sign(beta_{i,k})).
inline ImportanceMatrix importance_multiclass(const SvmEnsemble& ens, const GroupIndex& groups)
{
    return detail::importance_impl(std::span<const LinearSvm>(ens.svms), groups,
                                   static_cast<std::size_t>(ens.num_classes),
                                   [&](std::size_t k, int sign) { return ens.gamma(k, sign); });
}

} // namespace rfvc
