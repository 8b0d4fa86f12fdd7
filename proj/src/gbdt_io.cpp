#include "trendlab/gbdt.h"

#include "trendlab/csv.h"
#include "trendlab/error.h"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace trendlab::gbdt {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "trendlab-gbdt";
constexpr int kVersion = 1;

json node_to_json(const Tree& tree, int id) {
    const auto& node = tree.nodes[static_cast<std::size_t>(id)];
    json j;
    if (node.is_leaf()) {
        j["leaf"] = node.value;
        j["cover"] = node.cover;
        return j;
    }
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["default_left"] = node.default_left;
    j["gain"] = node.gain;
    j["cover"] = node.cover;
    j["left"] = node_to_json(tree, node.left);
    j["right"] = node_to_json(tree, node.right);
    return j;
}

int node_from_json(const json& j, Tree& tree, std::size_t n_features) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode node;
    node.cover = j.value("cover", 0.0);
    if (j.contains("leaf")) {
        node.value = j.at("leaf").get<double>();
    } else {
        node.feature = j.at("feature").get<int>();
        if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= n_features) {
            throw ParseError("model node references feature " + std::to_string(node.feature));
        }
        node.threshold = j.at("threshold").get<double>();
        node.default_left = j.value("default_left", true);
        node.gain = j.value("gain", 0.0);
        node.left = node_from_json(j.at("left"), tree, n_features);
        node.right = node_from_json(j.at("right"), tree, n_features);
    }
    tree.nodes[static_cast<std::size_t>(id)] = node;
    return id;
}

json params_to_json(const GbdtParams& p) {
    // threads is deliberately absent: it never changes a fitted model.
    return json{{"n_estimators", p.n_estimators},   {"max_depth", p.max_depth},
                {"learning_rate", p.learning_rate}, {"reg_lambda", p.reg_lambda},
                {"reg_alpha", p.reg_alpha},         {"subsample", p.subsample},
                {"scale_pos_weight", p.scale_pos_weight},
                {"min_child_weight", p.min_child_weight},
                {"gamma", p.gamma},                 {"seed", p.seed}};
}

GbdtParams params_from_json(const json& j) {
    GbdtParams p;
    p.n_estimators = j.at("n_estimators").get<int>();
    p.max_depth = j.at("max_depth").get<int>();
    p.learning_rate = j.at("learning_rate").get<double>();
    p.reg_lambda = j.at("reg_lambda").get<double>();
    p.reg_alpha = j.at("reg_alpha").get<double>();
    p.subsample = j.at("subsample").get<double>();
    p.scale_pos_weight = j.at("scale_pos_weight").get<double>();
    p.min_child_weight = j.at("min_child_weight").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

}  // namespace

std::string to_json(const GbdtModel& model) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["objective"] = "binary:logistic";
    j["n_features"] = model.n_features;
    j["base_logit"] = model.base_logit;
    j["params"] = params_to_json(model.params);
    j["trees"] = json::array();
    for (const auto& t : model.trees) j["trees"].push_back(node_to_json(t, 0));
    return j.dump(1) + "\n";
}

GbdtModel from_json(std::string_view text) {
    try {
        const auto j = json::parse(text.begin(), text.end());
        if (j.at("format").get<std::string>() != kFormat) throw ParseError("not a trendlab-gbdt model");
        if (j.at("version").get<int>() != kVersion) throw ParseError("unsupported model version");
        GbdtModel model;
        model.n_features = j.at("n_features").get<std::size_t>();
        model.base_logit = j.at("base_logit").get<double>();
        model.params = params_from_json(j.at("params"));
        for (const auto& t : j.at("trees")) {
            Tree tree;
            node_from_json(t, tree, model.n_features);
            model.trees.push_back(std::move(tree));
        }
        return model;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model JSON: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const GbdtModel& model) {
    csv::write_text(path, to_json(model));
}

GbdtModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return from_json(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace trendlab::gbdt
