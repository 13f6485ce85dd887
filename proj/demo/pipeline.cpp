// End-to-end walk through the library: simulate a small binary corpus,
// detect and measure the vehicles, cross-validate an SVM, inspect feature
// importance and emit C inference code for a microcontroller.

#include "rfvc.hpp"

#include <iostream>

using namespace rfvc;

int main()
{
    const SystemConfig sys;
    const auto templates = binary_templates();
    const std::vector<int> counts{100, 100};
    const Corpus corpus = analyze_corpus(generate_dataset(templates, counts, 42, sys.topology, sys.params), sys);

    const auto& first = *corpus.analyses.front();
    const auto& v = first.vehicles.front();
    std::cout << "first trace: " << first.vehicles.size() << " vehicle, " << v.link_count() << " links, "
              << std::abs(v.speed.mps) * 3.6 << " km/h, " << v.length_m.value_or(0.0) << " m\n";

    const auto tax = Taxonomy::binary();
    const auto data = make_dataset(corpus.features, tax);
    const auto plan = FoldPlan::stratified(data.labels, 10, 1);
    const auto report = cross_validate(data, tax, ModelSpec::linear_svm(), plan, 2);
    std::cout << "10-fold SVM accuracy: " << report.acc_mean << " +/- " << report.acc_std << '\n';

    const auto model = train_model(data.rows, data.labels, tax, all_links(), ModelSpec::linear_svm(), 3);
    const auto imp = importance_binary(model.svm.svms.front(), GroupIndex::full());
    std::cout << "importance of the global group for truck-like: " << imp(0, 1) << '\n';

    const auto mem = estimate_memory(model);
    for (const auto& p : builtin_platforms())
        std::cout << p.name << ": " << mem.code_bytes << " of " << p.program_memory_bytes << " bytes"
                  << (mem.fits(p) ? "" : " (does not fit)") << '\n';
    std::cout << emit_c_source(model).substr(0, 200) << "...\n";
}
