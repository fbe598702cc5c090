#include "fairtree/model_io.hpp"

#include <fstream>
#include <sstream>

#include "fairtree/dataset_io.hpp"
#include "fairtree/error.hpp"

namespace fairtree {

namespace {

constexpr const char* kFormatTag = "fairtree-model";
constexpr const char* kVoting = "fractional-majority";

nlohmann::json node_to_json(const DecisionTree& tree, std::size_t i)
{
    const auto& n = tree.node(i);
    if (n.is_leaf())
        return {{"leaf", {{"counts", n.counts}, {"distribution", n.distribution}}}};
    return {
        {"split", {{"feature", n.feature}, {"threshold", n.threshold}}},
        {"left", node_to_json(tree, n.if_false)},
        {"right", node_to_json(tree, n.if_true)},
    };
}

void node_from_json(const nlohmann::json& j, std::vector<TreeNode>& out, std::size_t depth)
{
    if (depth > 10000)
        throw ModelError("model document: tree is too deep");
    if (j.contains("leaf")) {
        TreeNode leaf;
        leaf.counts = j.at("leaf").at("counts").get<std::vector<double>>();
        leaf.distribution = j.at("leaf").at("distribution").get<std::vector<double>>();
        out.push_back(std::move(leaf));
        return;
    }
    const auto& split = j.at("split");
    const std::size_t self = out.size();
    TreeNode n;
    n.feature = split.at("feature").get<std::int32_t>();
    n.threshold = split.at("threshold").get<double>();
    out.push_back(std::move(n));
    out[self].if_false = static_cast<std::uint32_t>(out.size());
    node_from_json(j.at("left"), out, depth + 1);
    out[self].if_true = static_cast<std::uint32_t>(out.size());
    node_from_json(j.at("right"), out, depth + 1);
}

} // namespace

nlohmann::json serialize(const ModelDocument& doc)
{
    const Forest forest = as_forest(doc.model);
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : forest.trees())
        trees.push_back(node_to_json(t, 0));
    return {
        {"format", kFormatTag},
        {"version", kModelFormatVersion},
        {"schema_fingerprint", doc.schema_fingerprint},
        {"kind", std::holds_alternative<DecisionTree>(doc.model) ? "tree" : "forest"},
        {"num_features", forest.num_features()},
        {"num_labels", forest.num_labels()},
        {"voting", kVoting},
        {"trees", trees},
    };
}

ModelDocument deserialize(const nlohmann::json& doc)
{
    try {
        if (!doc.is_object() || doc.value("format", "") != kFormatTag)
            throw ModelError("model document: missing or wrong format tag");
        const int version = doc.at("version").get<int>();
        if (version != kModelFormatVersion)
            throw ModelError("model document: unsupported version " + std::to_string(version));
        if (doc.at("voting").get<std::string>() != kVoting)
            throw ModelError("model document: unknown voting policy");
        const auto d = doc.at("num_features").get<std::size_t>();
        const auto labels = doc.at("num_labels").get<std::size_t>();
        std::vector<DecisionTree> trees;
        for (const auto& t : doc.at("trees")) {
            std::vector<TreeNode> nodes;
            node_from_json(t, nodes, 0);
            trees.emplace_back(d, labels, std::move(nodes));
        }
        const auto kind = doc.at("kind").get<std::string>();
        ModelDocument out;
        out.schema_fingerprint = doc.at("schema_fingerprint").get<std::string>();
        if (kind == "tree") {
            if (trees.size() != 1)
                throw ModelError("model document: kind 'tree' needs exactly one tree");
            out.model = std::move(trees.front());
        } else if (kind == "forest") {
            out.model = Forest(std::move(trees));
        } else {
            throw ModelError("model document: unknown kind '" + kind + "'");
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("model document: ") + e.what());
    }
}

std::string serialize_text(const ModelDocument& doc)
{
    return serialize(doc).dump() + "\n";
}

ModelDocument deserialize_text(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelError(std::string("model document: ") + e.what());
    }
    return deserialize(j);
}

void save_model(const std::filesystem::path& path, const ModelDocument& doc)
{
    write_text_file(path, serialize_text(doc));
}

ModelDocument load_model(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ModelError("cannot open model " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_text(buf.str());
}

} // namespace fairtree
