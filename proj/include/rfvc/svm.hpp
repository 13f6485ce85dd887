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

struct SvmOptions {
    double C = 1.0;
    int epochs = 50;
    bool project = true; // Pegasos projection onto the ball of radius 1/sqrt(lambda)
};

/// Linear SVM on inputs augmented by a constant 1. beta.back() is the bias.
struct LinearSvm {
    std::vector<double> beta;
    double C = 1.0;
    int neg_class = 0;
    int pos_class = 1;
    std::vector<double> objective; // objective of the averaged iterate after each epoch

    std::size_t dim() const noexcept { return beta.empty() ? 0 : beta.size() - 1; }

    double decision(std::span<const double> x) const
    {
        double s = beta.back();
        for (std::size_t i = 0; i < x.size(); ++i)
            s += beta[i] * x[i];
        return s;
    }

    /// Positive decision selects pos_class; zero falls to neg_class.
    int predict(std::span<const double> x) const { return decision(x) > 0.0 ? pos_class : neg_class; }
};

/// 1/2 |beta|^2 + C * sum of hinge losses over (x, y), y in {-1, +1}.
inline double svm_objective(std::span<const double> beta, std::span<const std::vector<double>> x,
                            std::span<const int> y, double C)
{
    double reg = 0.0;
    for (double b : beta)
        reg += b * b;
    double hinge = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        double s = beta.back();
        for (std::size_t i = 0; i < x[n].size(); ++i)
            s += beta[i] * x[n][i];
        hinge += std::max(0.0, 1.0 - y[n] * s);
    }
    return 0.5 * reg + C * hinge;
}

/// Stochastic subgradient descent on the primal (Pegasos schedule). Each
/// epoch visits the samples in a fresh seeded permutation. The returned
/// weights are a running average of all iterates with weight proportional
/// to t^2, so late iterates dominate while subgradient noise is smoothed.
inline LinearSvm train_svm_binary(std::span<const std::vector<double>> x, std::span<const int> y,
                                  const SvmOptions& opt, std::uint64_t seed)
{
    if (x.empty() || x.size() != y.size())
        throw ConfigError("train_svm_binary: need equally many rows and labels");
    if (!(opt.C > 0.0) || opt.epochs < 1)
        throw ConfigError("train_svm_binary: C must be positive and epochs >= 1");
    bool has_pos = false, has_neg = false;
    for (int v : y) {
        if (v != 1 && v != -1)
            throw ConfigError("train_svm_binary: labels must be -1 or +1");
        (v > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg)
        throw ConfigError("train_svm_binary: both labels must be present");

    const std::size_t d = x.front().size() + 1;
    const std::size_t n = x.size();
    const double lambda = 1.0 / (opt.C * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);

    std::vector<double> w(d, 0.0), avg(d, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);

    LinearSvm svm;
    svm.C = opt.C;
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t idx : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const auto& xi = x[idx];
            double s = w[d - 1];
            for (std::size_t i = 0; i + 1 < d; ++i)
                s += w[i] * xi[i];
            const double shrink = 1.0 - eta * lambda;
            for (double& wi : w)
                wi *= shrink;
            if (y[idx] * s < 1.0) {
                const double step = eta * y[idx];
                for (std::size_t i = 0; i + 1 < d; ++i)
                    w[i] += step * xi[i];
                w[d - 1] += step;
            }
            if (opt.project) {
                double norm2 = 0.0;
                for (double wi : w)
                    norm2 += wi * wi;
                if (norm2 > radius * radius) {
                    const double f = radius / std::sqrt(norm2);
                    for (double& wi : w)
                        wi *= f;
                }
            }
            const double r = 3.0 / (static_cast<double>(t) + 2.0);
            for (std::size_t i = 0; i < d; ++i)
                avg[i] += (w[i] - avg[i]) * r;
        }
        svm.objective.push_back(svm_objective(avg, x, y, opt.C));
    }
    svm.beta = avg;
    return svm;
}

/// One-vs-one composition: pair k = (a, b), a < b, in lexicographic order.
/// gamma(k, -1) = a and gamma(k, +1) = b.
struct SvmEnsemble {
    int num_classes = 0;
    std::vector<LinearSvm> svms;

    static std::vector<std::pair<int, int>> pairs(int num_classes)
    {
        std::vector<std::pair<int, int>> out;
        for (int a = 0; a < num_classes; ++a)
            for (int b = a + 1; b < num_classes; ++b)
                out.emplace_back(a, b);
        return out;
    }

    int gamma(std::size_t k, int sign) const { return sign > 0 ? svms[k].pos_class : svms[k].neg_class; }

    std::vector<int> votes(std::span<const double> x) const
    {
        std::vector<int> v(static_cast<std::size_t>(num_classes), 0);
        for (const auto& s : svms)
            ++v[static_cast<std::size_t>(s.predict(x))];
        return v;
    }

    /// Majority vote; ties go to the lowest class index.
    int predict(std::span<const double> x) const
    {
        const auto v = votes(x);
        return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    }
};

/// Trains Y(Y-1)/2 pairwise SVMs. A pair with one class absent from the
/// training data gets zero weights and a bias voting for the present class
/// (for the lower class if both are absent).
inline SvmEnsemble train_svm_ensemble(std::span<const std::vector<double>> x, std::span<const int> labels,
                                      int num_classes, const SvmOptions& opt, std::uint64_t seed)
{
    if (num_classes < 2)
        throw ConfigError("train_svm_ensemble: need at least two classes");
    if (x.empty() || x.size() != labels.size())
        throw ConfigError("train_svm_ensemble: need equally many rows and labels");
    for (int c : labels)
        if (c < 0 || c >= num_classes)
            throw ConfigError("train_svm_ensemble: label out of range");

    SvmEnsemble ens;
    ens.num_classes = num_classes;
    const auto pairs = SvmEnsemble::pairs(num_classes);
    const std::size_t d = x.front().size();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [a, b] = pairs[k];
        std::vector<std::vector<double>> px;
        std::vector<int> py;
        bool has_a = false, has_b = false;
        for (std::size_t n = 0; n < x.size(); ++n) {
            if (labels[n] == a || labels[n] == b) {
                px.push_back(x[n]);
                py.push_back(labels[n] == b ? 1 : -1);
                (labels[n] == b ? has_b : has_a) = true;
            }
        }
        LinearSvm svm;
        if (has_a && has_b) {
            svm = train_svm_binary(px, py, opt, derive_seed(seed, static_cast<std::uint64_t>(k)));
        } else {
            svm.C = opt.C;
            svm.beta.assign(d + 1, 0.0);
            svm.beta.back() = has_b ? 1.0 : -1.0;
        }
        svm.neg_class = a;
        svm.pos_class = b;
        ens.svms.push_back(std::move(svm));
    }
    return ens;
}

} // namespace rfvc
