#include <json.hpp>

#include "genesel/boosting.hpp"
#include "genesel/error.hpp"

namespace genesel::boosting {

using nlohmann::json;

namespace {

json node_to_json(const TreeNode& n) {
  if (n.is_leaf()) return json{{"leaf", n.weight}};
  return json{{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left},
              {"right", n.right},     {"gain", n.gain}};
}

TreeNode node_from_json(const json& j) {
  TreeNode n;
  if (j.contains("leaf")) {
    n.weight = j.at("leaf").get<double>();
    return n;
  }
  n.feature = j.at("feature").get<int>();
  n.threshold = j.at("threshold").get<double>();
  n.left = j.at("left").get<int>();
  n.right = j.at("right").get<int>();
  n.gain = j.at("gain").get<double>();
  return n;
}

}  // namespace

std::string to_json(const BoostedEnsemble& model) {
  const auto& p = model.params;
  json doc;
  doc["params"] = {{"n_estimators", p.n_estimators}, {"max_depth", p.max_depth},
                   {"subsample", p.subsample},       {"learning_rate", p.learning_rate},
                   {"lambda", p.lambda},             {"gamma", p.gamma},
                   {"loss", to_string(p.loss)},      {"seed", p.seed}};
  doc["n_genes"] = model.n_genes;
  doc["n_outputs"] = model.n_outputs;
  doc["base_score"] = model.base_score;
  json rounds = json::array();
  for (const auto& round : model.trees) {
    json outputs = json::array();
    for (const auto& tree : round) {
      json nodes = json::array();
      for (const auto& node : tree.nodes) nodes.push_back(node_to_json(node));
      outputs.push_back(std::move(nodes));
    }
    rounds.push_back(std::move(outputs));
  }
  doc["trees"] = std::move(rounds);
  return doc.dump(1);
}

BoostedEnsemble ensemble_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    BoostedEnsemble model;
    const auto& p = doc.at("params");
    model.params.n_estimators = p.at("n_estimators").get<std::size_t>();
    model.params.max_depth = p.at("max_depth").get<std::size_t>();
    model.params.subsample = p.at("subsample").get<double>();
    model.params.learning_rate = p.at("learning_rate").get<double>();
    model.params.lambda = p.at("lambda").get<double>();
    model.params.gamma = p.at("gamma").get<double>();
    model.params.loss = loss_from_string(p.at("loss").get<std::string>());
    model.params.seed = p.at("seed").get<std::uint64_t>();
    model.n_genes = doc.at("n_genes").get<std::size_t>();
    model.n_outputs = doc.at("n_outputs").get<std::size_t>();
    model.base_score = doc.at("base_score").get<std::vector<double>>();
    for (const auto& outputs : doc.at("trees")) {
      auto& round = model.trees.emplace_back();
      for (const auto& nodes : outputs) {
        auto& tree = round.emplace_back();
        for (const auto& node : nodes) tree.nodes.push_back(node_from_json(node));
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace genesel::boosting
