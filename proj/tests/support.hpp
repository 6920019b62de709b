#pragma once

// Shared fixtures: the shipped data files, loaded once per test binary.

#include <string>

#include "fgeo/fgeo.hpp"

namespace fgeo::fixtures {

inline std::string data_path(const std::string& name) { return std::string(FGEO_DATA_DIR) + "/" + name; }

inline const KnowledgeBase& mini_kb() {
  static const KnowledgeBase kb = load_knowledge_base_file(data_path("mini_gdl.json"));
  return kb;
}

inline const Corpus& mini_corpus() {
  static const Corpus c = load_corpus(data_path("mini_corpus.jsonl"), &mini_kb());
  return c;
}

inline const Corpus& adversarial_corpus() {
  static const Corpus c = load_corpus(data_path("adversarial.jsonl"), &mini_kb());
  return c;
}

inline ProblemInstance make_problem(const std::vector<std::string>& conditions, const std::string& goal,
                                     int id = 1) {
  ProblemInstance p;
  p.id = id;
  for (const auto& c : conditions) p.condition_cdl.push_back(parse_term(c));
  p.goal = make_goal(parse_term(goal));
  return p;
}

// The recorded answer of a corpus problem, as the solver renders it.
inline std::string recorded_answer(const ProblemInstance& p) {
  if (!p.answer) return "";
  const Term& a = *p.answer;
  return a.is_number() ? a.value.str() : render_term(a);
}

inline std::string solved_answer(const GoalCheck& g) { return g.solved ? g.answer.str() : ""; }

}  // namespace fgeo::fixtures
