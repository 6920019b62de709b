#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgeo/cdl_parser.hpp"
#include "fgeo/knowledge_base.hpp"
#include "fgeo/term.hpp"

namespace fgeo {

struct Goal {
  enum class Kind { Value, Relation };
  Kind kind = Kind::Value;
  Term target;  // the expression to evaluate, or the relation to prove (unwrapped)
  Term source;  // goal as written

  bool is_value() const { return kind == Kind::Value; }
};

using TheoremSequence = std::vector<int>;

struct ProblemInstance {
  int id = 0;
  std::string description;
  std::vector<Term> construction_cdl;
  std::vector<Term> condition_cdl;
  Goal goal;
  std::vector<std::vector<std::string>> annotated_names;
  std::vector<TheoremSequence> annotated_sequences;  // filled only when a KB resolved the names
  std::optional<Term> answer;                        // problem_answer, when the record carries one

  std::vector<Term> all_conditions() const {
    std::vector<Term> out = construction_cdl;
    out.insert(out.end(), condition_cdl.begin(), condition_cdl.end());
    return out;
  }
  bool annotated() const { return !annotated_names.empty() && !annotated_names.front().empty(); }
};

inline Goal make_goal(const Term& t) {
  Goal g;
  g.source = t;
  if (t.is_predicate("Value") && t.args.size() == 1) {
    g.kind = Goal::Kind::Value;
    g.target = t.args[0];
  } else if (t.is_predicate("Relation") && t.args.size() == 1) {
    g.kind = Goal::Kind::Relation;
    g.target = t.args[0];
  } else if (t.is_predicate()) {
    g.kind = Goal::Kind::Relation;
    g.target = t;
  } else {
    g.kind = Goal::Kind::Value;
    g.target = t;
  }
  return g;
}

// Annotations may carry a branch and binding, as in "triangle_property_angle_sum(1,ABC)";
// only the name is kept.
inline std::string theorem_name_of(const std::string& entry) {
  const auto paren = entry.find('(');
  std::string name = paren == std::string::npos ? entry : entry.substr(0, paren);
  while (!name.empty() && name.back() == ' ') name.pop_back();
  return name;
}

namespace detail {

inline std::vector<Term> parse_term_list(const nlohmann::json& doc, const char* key) {
  std::vector<Term> out;
  if (!doc.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  const auto& list = doc.at(key);
  if (!list.is_array()) throw SchemaError(std::string("field '") + key + "' must be a list");
  for (const auto& s : list) {
    if (!s.is_string()) throw SchemaError(std::string("entries of '") + key + "' must be strings");
    out.push_back(parse_term(s.get<std::string>()));
  }
  return out;
}

}  // namespace detail

// Parses one problem record. With a KB, annotated theorem names are resolved
// to codes (UnknownTheorem if one is missing from the KB).
inline ProblemInstance parse_problem_record(const nlohmann::json& doc, const KnowledgeBase* kb) {
  if (!doc.is_object()) throw SchemaError("problem record must be an object");
  ProblemInstance p;
  if (!doc.contains("problem_id") || !doc.at("problem_id").is_number_integer()) {
    throw SchemaError("missing integer field 'problem_id'");
  }
  p.id = doc.at("problem_id").get<int>();
  if (doc.contains("description")) {
    p.description = doc.at("description").get<std::string>();
  } else if (doc.contains("problem_text_en")) {
    p.description = doc.at("problem_text_en").get<std::string>();
  } else {
    throw SchemaError("missing field 'description'");
  }
  p.construction_cdl = detail::parse_term_list(doc, "construction_cdl");
  p.condition_cdl = detail::parse_term_list(doc, "text_cdl");
  if (!doc.contains("goal_cdl") || !doc.at("goal_cdl").is_string()) throw SchemaError("missing field 'goal_cdl'");
  p.goal = make_goal(parse_term(doc.at("goal_cdl").get<std::string>()));
  if (!doc.contains("theorem_seqs")) throw SchemaError("missing field 'theorem_seqs'");
  for (const auto& seq : doc.at("theorem_seqs")) {
    if (!seq.is_array()) throw SchemaError("'theorem_seqs' must be a list of lists");
    std::vector<std::string> names;
    for (const auto& n : seq) names.push_back(theorem_name_of(n.get<std::string>()));
    p.annotated_names.push_back(std::move(names));
  }
  if (doc.contains("problem_answer") && !doc.at("problem_answer").is_null()) {
    const auto& a = doc.at("problem_answer");
    p.answer = parse_term(a.is_string() ? a.get<std::string>() : a.dump());
  }
  if (kb) {
    for (const auto& names : p.annotated_names) {
      TheoremSequence codes;
      for (const auto& n : names) codes.push_back(kb->code_of(n));
      p.annotated_sequences.push_back(std::move(codes));
    }
  }
  return p;
}

inline ProblemInstance parse_problem(const nlohmann::json& doc, const KnowledgeBase* kb = nullptr) {
  try {
    return parse_problem_record(doc, kb);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed problem record: ") + e.what());
  }
}

}  // namespace fgeo
