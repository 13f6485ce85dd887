#pragma once

#include "rfvc/error.hpp"
#include "rfvc/model.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace rfvc {

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const Model& m, const CostModel& cost = {})
{
    using nlohmann::json;
    json j;
    j["format_version"] = kModelFormatVersion;
    j["taxonomy"] = {{"name", m.taxonomy.name}, {"classes", m.taxonomy.classes}};
    j["links"] = m.links;
    j["scaling"] = {{"min", m.scaling.lo}, {"max", m.scaling.hi}};
    j["model_kind"] = to_string(m.kind);
    j["cost_model"] = {{"overhead_bytes", cost.overhead_bytes},
                       {"weight_bytes", cost.weight_bytes},
                       {"node_bytes", cost.node_bytes}};
    if (m.kind == ModelKind::svm) {
        json svms = json::array();
        for (const auto& s : m.svm.svms)
            svms.push_back({{"neg_class", s.neg_class}, {"pos_class", s.pos_class}, {"C", s.C}, {"beta", s.beta}});
        j["svm"] = {{"num_classes", m.svm.num_classes}, {"pairs", svms}};
    } else {
        json trees = json::array();
        for (const auto& t : m.forest.trees) {
            json nodes = json::array();
            for (const auto& n : t.nodes)
                nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.label}));
            trees.push_back(nodes);
        }
        j["forest"] = {{"num_classes", m.forest.num_classes},
                       {"max_depth", m.forest.max_depth},
                       {"feature_subset", m.forest.feature_subset},
                       {"seed", m.forest.seed},
                       {"trees", trees}};
    }
    return j;
}

inline Model model_from_json(const nlohmann::json& j)
{
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion)
            throw FormatError("unsupported model format_version");
        Model m;
        m.taxonomy = Taxonomy::by_name(j.at("taxonomy").at("name").get<std::string>());
        if (j.at("taxonomy").at("classes").get<std::vector<std::string>>() != m.taxonomy.classes)
            throw FormatError("model class list does not match its taxonomy");
        m.links = j.at("links").get<std::vector<int>>();
        m.scaling.lo = j.at("scaling").at("min").get<std::vector<double>>();
        m.scaling.hi = j.at("scaling").at("max").get<std::vector<double>>();
        if (m.scaling.lo.size() != m.scaling.hi.size() ||
            m.scaling.dim() != kGlobalFeatures + kLinkBlock * m.links.size())
            throw FormatError("model scaling does not match its feature layout");
        for (int l : m.links)
            if (l < 1 || l > static_cast<int>(kNumLinks))
                throw FormatError("model link out of range");
        m.kind = parse_model_kind(j.at("model_kind").get<std::string>());
        const int k = static_cast<int>(m.taxonomy.size());
        if (m.kind == ModelKind::svm) {
            const auto& s = j.at("svm");
            m.svm.num_classes = s.at("num_classes").get<int>();
            for (const auto& p : s.at("pairs")) {
                LinearSvm svm;
                svm.neg_class = p.at("neg_class").get<int>();
                svm.pos_class = p.at("pos_class").get<int>();
                svm.C = p.at("C").get<double>();
                svm.beta = p.at("beta").get<std::vector<double>>();
                if (svm.beta.size() != m.scaling.dim() + 1)
                    throw FormatError("svm weight count does not match the feature layout");
                if (svm.neg_class < 0 || svm.pos_class >= k || svm.neg_class >= svm.pos_class)
                    throw FormatError("svm class pair out of range");
                m.svm.svms.push_back(std::move(svm));
            }
            if (m.svm.num_classes != k || m.svm.svms.size() != static_cast<std::size_t>(k * (k - 1) / 2))
                throw FormatError("svm ensemble size does not match the taxonomy");
        } else {
            const auto& f = j.at("forest");
            m.forest.num_classes = f.at("num_classes").get<int>();
            m.forest.max_depth = f.at("max_depth").get<int>();
            m.forest.feature_subset = f.at("feature_subset").get<int>();
            m.forest.seed = f.at("seed").get<std::uint64_t>();
            if (m.forest.num_classes != k)
                throw FormatError("forest class count does not match the taxonomy");
            for (const auto& t : f.at("trees")) {
                CartTree tree;
                for (const auto& n : t) {
                    CartTree::Node node;
                    node.feature = n.at(0).get<int>();
                    node.threshold = n.at(1).get<double>();
                    node.left = n.at(2).get<int>();
                    node.right = n.at(3).get<int>();
                    node.label = n.at(4).get<int>();
                    tree.nodes.push_back(node);
                }
                const int count = static_cast<int>(tree.nodes.size());
                if (count == 0)
                    throw FormatError("empty tree");
                for (const auto& n : tree.nodes) {
                    if (n.label < 0 || n.label >= k)
                        throw FormatError("tree leaf label out of range");
                    if (!n.leaf() && (n.feature >= static_cast<int>(m.scaling.dim()) || n.left <= 0 ||
                                      n.right <= 0 || n.left >= count || n.right >= count))
                        throw FormatError("tree node out of range");
                }
                m.forest.trees.push_back(std::move(tree));
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model file: ") + e.what());
    }
}

inline CostModel cost_model_from_json(const nlohmann::json& j)
{
    CostModel c;
    if (j.contains("cost_model")) {
        const auto& cm = j.at("cost_model");
        c.overhead_bytes = cm.at("overhead_bytes").get<std::size_t>();
        c.weight_bytes = cm.at("weight_bytes").get<std::size_t>();
        c.node_bytes = cm.at("node_bytes").get<std::size_t>();
    }
    return c;
}

inline void save_model(const std::string& path, const Model& m, const CostModel& cost = {})
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("cannot write " + path);
    out << model_to_json(m, cost).dump(1) << '\n';
}

inline nlohmann::json load_json(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

inline Model load_model(const std::string& path) { return model_from_json(load_json(path)); }

} // namespace rfvc
