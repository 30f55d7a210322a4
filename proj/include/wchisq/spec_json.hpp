#ifndef WCHISQ_SPEC_JSON_HPP
#define WCHISQ_SPEC_JSON_HPP

// JSON form of a weighted sum: { "terms": [ { "weight": 2.0, "dof": 4 }, ... ] }

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wchisq/model.hpp"

namespace wchisq {

inline WeightedSumSpec spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("terms") || !doc["terms"].is_array()) {
    throw invalid_spec("spec JSON must be an object with a \"terms\" array");
  }
  std::vector<Term> terms;
  for (const auto& item : doc["terms"]) {
    if (!item.is_object() || !item.contains("weight") || !item.contains("dof")) {
      throw invalid_spec("each term needs \"weight\" and \"dof\"");
    }
    const auto& w = item["weight"];
    const auto& n = item["dof"];
    if (!w.is_number()) throw invalid_spec("\"weight\" must be a number");
    if (!n.is_number_integer()) throw invalid_spec("\"dof\" must be an integer");
    terms.push_back(Term{w.get<double>(), n.get<int>()});
  }
  return WeightedSumSpec(std::move(terms));
}

inline nlohmann::json spec_to_json(const WeightedSumSpec& spec) {
  nlohmann::json terms = nlohmann::json::array();
  for (const Term& t : spec.terms()) terms.push_back({{"weight", t.weight}, {"dof", t.dof}});
  return {{"terms", std::move(terms)}};
}

inline WeightedSumSpec parse_spec_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw invalid_spec(std::string("malformed spec JSON: ") + e.what());
  }
  return spec_from_json(doc);
}

inline WeightedSumSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_spec("cannot open spec file " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_spec_json(text);
}

}  // namespace wchisq

#endif  // WCHISQ_SPEC_JSON_HPP
