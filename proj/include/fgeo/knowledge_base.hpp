#pragma once

// Geometry definition language: predicate schemas and theorem definitions.
//
// A GDL document is JSON:
//
//   { "predicates": [ { "name": "Polygon", "arity": 1, "arg_kinds": ["entity"],
//                       "points": [3], "symmetry": [[1,2,0],[2,1,0]],
//                       "measure": false } ... ],
//     "theorems":   [ { "name": "triangle_property_angle_sum", "code": 1,
//                       "premise":     { "facts": ["Polygon(abc)"], "equations": [] },
//                       "conclusions": { "facts": [], "equations": ["Equal(...)"] } } ... ] }
//
// "points" gives the point count of each entity argument. Symmetry entries are
// generators, each a permutation of the flattened point positions of all
// entity arguments; the loader closes them into a group. Pattern variables are
// lowercase letters standing for points.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgeo/cdl_parser.hpp"
#include "fgeo/error.hpp"
#include "fgeo/term.hpp"

namespace fgeo {

enum class ArgKind { Entity, Term, Number };

using Permutation = std::vector<std::size_t>;

struct PredicateSchema {
  std::string name;
  std::size_t arity = 0;
  std::vector<ArgKind> arg_kinds;
  std::vector<std::size_t> points;  // per argument; 0 for non-entity arguments
  bool measure = false;             // LengthOfLine, MeasureOfAngle: a measure variable, not a fact
  std::vector<Permutation> symmetry;
  std::vector<Permutation> group;  // closure of `symmetry`, identity first

  std::size_t total_points() const {
    std::size_t n = 0;
    for (auto p : points) n += p;
    return n;
  }
};

struct Theorem {
  std::string name;
  int code = 0;
  std::vector<Term> premise_facts;
  std::vector<Term> premise_equations;
  std::vector<Term> conclusion_facts;
  std::vector<Term> conclusion_equations;
  std::string variables;  // pattern variables in order of first appearance in the premise facts
};

struct Diagnostic {
  std::string kind;
  std::string subject;
  std::string message;
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

// Heads understood natively by the deduction core. Arity -1 means variadic (>= 2).
inline const std::map<std::string, int>& builtin_heads() {
  static const std::map<std::string, int> heads{
      {"Equal", 2}, {"Value", 1}, {"Relation", 1}, {"Add", -1}, {"Sub", 2},
      {"Mul", -1},  {"Div", 2},   {"Pow", 2},      {"Sqrt", 1},
  };
  return heads;
}

namespace detail {

inline void collect_pattern_vars(const Term& t, std::string& out) {
  if (t.is_entity()) {
    for (char c : t.points) {
      if (c >= 'a' && c <= 'z' && out.find(c) == std::string::npos) out += c;
    }
  }
  for (const auto& a : t.args) collect_pattern_vars(a, out);
}

inline std::vector<Permutation> close_group(std::size_t n, const std::vector<Permutation>& gens) {
  Permutation id(n);
  for (std::size_t i = 0; i < n; ++i) id[i] = i;
  std::vector<Permutation> group{id};
  std::set<Permutation> seen{id};
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (const auto& g : gens) {
      if (g.size() != n) continue;
      Permutation composed(n);
      for (std::size_t j = 0; j < n; ++j) composed[j] = group[i][g[j]];
      if (seen.insert(composed).second) group.push_back(composed);
    }
  }
  return group;
}

inline bool is_permutation_of(const Permutation& p, std::size_t n) {
  if (p.size() != n) return false;
  std::vector<bool> hit(n, false);
  for (auto v : p) {
    if (v >= n || hit[v]) return false;
    hit[v] = true;
  }
  return true;
}

}  // namespace detail

class KnowledgeBase {
 public:
  std::map<std::string, PredicateSchema> schemas;
  std::vector<Theorem> theorems;

  const PredicateSchema* schema(const std::string& name) const {
    auto it = schemas.find(name);
    return it == schemas.end() ? nullptr : &it->second;
  }

  bool is_measure(const std::string& head) const {
    const auto* s = schema(head);
    return s && s->measure;
  }

  // Rebuilds the name<->code codec and symmetry groups. Call after editing
  // `schemas` or `theorems` directly.
  void reindex() {
    by_name_.clear();
    by_code_.clear();
    for (std::size_t i = 0; i < theorems.size(); ++i) {
      by_name_.emplace(theorems[i].name, i);
      by_code_.emplace(theorems[i].code, i);
    }
    for (auto& [name, s] : schemas) s.group = detail::close_group(s.total_points(), s.symmetry);
  }

  int code_of(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw UnknownTheorem("no theorem named '" + name + "'");
    return theorems[it->second].code;
  }
  const std::string& name_of(int code) const { return theorem(code).name; }
  const Theorem& theorem(int code) const {
    auto it = by_code_.find(code);
    if (it == by_code_.end()) throw UnknownTheoremCode("no theorem with code " + std::to_string(code));
    return theorems[it->second];
  }
  bool has_code(int code) const { return by_code_.count(code) != 0; }
  bool has_name(const std::string& name) const { return by_name_.count(name) != 0; }

  // All codes in declaration order.
  std::vector<int> codes() const {
    std::vector<int> out;
    for (const auto& t : theorems) out.push_back(t.code);
    return out;
  }

  // Every symmetric variant of an entity-argument predicate, canonical first is
  // NOT guaranteed; use canonical() for that.
  std::vector<Term> variants(const Term& t) const {
    const auto* s = t.is_predicate() ? schema(t.head) : nullptr;
    if (!s || s->group.size() <= 1 || !entity_shaped(t, *s)) return {t};
    const std::string flat = flatten(t);
    std::vector<Term> out;
    std::set<std::string> seen;
    for (const auto& perm : s->group) {
      std::string p(flat.size(), ' ');
      for (std::size_t i = 0; i < flat.size(); ++i) p[i] = flat[perm[i]];
      if (seen.insert(p).second) out.push_back(unflatten(t, p));
    }
    return out;
  }

  // Symmetry-canonical form: entity-argument predicates pick the
  // lexicographically smallest point arrangement; other predicates are
  // canonicalised argument-wise.
  Term canonical(const Term& t) const {
    if (!t.is_predicate()) return t;
    const auto* s = schema(t.head);
    if (s && s->group.size() > 1 && entity_shaped(t, *s)) {
      const std::string flat = flatten(t);
      std::string best = flat;
      std::string p(flat.size(), ' ');
      for (const auto& perm : s->group) {
        for (std::size_t i = 0; i < flat.size(); ++i) p[i] = flat[perm[i]];
        if (p < best) best = p;
      }
      return unflatten(t, best);
    }
    Term out = t;
    for (auto& a : out.args) a = canonical(a);
    return out;
  }

 private:
  static bool entity_shaped(const Term& t, const PredicateSchema& s) {
    if (t.args.size() != s.points.size()) return false;
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      if (!t.args[i].is_entity() || t.args[i].points.size() != s.points[i]) return false;
    }
    return true;
  }
  static std::string flatten(const Term& t) {
    std::string flat;
    for (const auto& a : t.args) flat += a.points;
    return flat;
  }
  static Term unflatten(const Term& t, const std::string& flat) {
    Term out = t;
    std::size_t pos = 0;
    for (auto& a : out.args) {
      a.points = flat.substr(pos, a.points.size());
      pos += a.points.size();
    }
    return out;
  }

  std::map<std::string, std::size_t> by_name_;
  std::map<int, std::size_t> by_code_;
};

namespace detail {

// Lowercase variables sitting in entity positions become pattern entities.
inline Term to_pattern(const Term& t, const KnowledgeBase& kb) {
  if (!t.is_predicate()) return t;
  Term out = t;
  const auto* s = kb.schema(t.head);
  for (std::size_t i = 0; i < out.args.size(); ++i) {
    auto& a = out.args[i];
    const bool entity_slot = s && i < s->arg_kinds.size() && s->arg_kinds[i] == ArgKind::Entity;
    if (entity_slot && a.is_variable()) {
      a = Term::entity(a.head);
    } else {
      a = to_pattern(a, kb);
    }
  }
  return out;
}

inline ArgKind parse_arg_kind(const std::string& s) {
  if (s == "entity") return ArgKind::Entity;
  if (s == "term") return ArgKind::Term;
  if (s == "number") return ArgKind::Number;
  throw SchemaError("unknown arg kind '" + s + "'");
}

inline std::vector<Term> parse_patterns(const nlohmann::json& j, const char* key, const KnowledgeBase& kb,
                                        const std::string& where) {
  std::vector<Term> out;
  if (!j.contains(key)) return out;
  if (!j.at(key).is_array()) throw SchemaError(where + ": '" + key + "' must be a list");
  for (const auto& s : j.at(key)) {
    if (!s.is_string()) throw SchemaError(where + ": patterns must be strings");
    out.push_back(to_pattern(parse_term(s.get<std::string>()), kb));
  }
  return out;
}

inline void check_arity(const Term& t, const KnowledgeBase& kb, std::map<std::string, std::set<std::string>>& bad,
                        std::vector<Diagnostic>& diags, const std::string& theorem) {
  if (!t.is_predicate()) return;
  const auto& builtins = builtin_heads();
  if (auto b = builtins.find(t.head); b != builtins.end()) {
    const bool ok = b->second < 0 ? t.args.size() >= 2 : t.args.size() == static_cast<std::size_t>(b->second);
    if (!ok) bad[t.head].insert(theorem);
  } else if (const auto* s = kb.schema(t.head)) {
    if (t.args.size() != s->arity) {
      bad[t.head].insert(theorem);
    } else {
      for (std::size_t i = 0; i < t.args.size() && i < s->points.size(); ++i) {
        if (s->arg_kinds[i] == ArgKind::Entity &&
            (!t.args[i].is_entity() || t.args[i].points.size() != s->points[i])) {
          diags.push_back({"EntitySizeMismatch", theorem,
                           "argument " + std::to_string(i) + " of " + t.head + " expects " +
                               std::to_string(s->points[i]) + " points"});
        }
      }
    }
  } else {
    diags.push_back({"UnknownPredicate", theorem, "predicate '" + t.head + "' is not declared"});
  }
  for (const auto& a : t.args) check_arity(a, kb, bad, diags, theorem);
}

}  // namespace detail

// Every diagnostic names the offending theorem or schema. Empty iff valid.
inline std::vector<Diagnostic> validate(const KnowledgeBase& kb) {
  std::vector<Diagnostic> diags;
  for (const auto& [name, s] : kb.schemas) {
    if (s.arg_kinds.size() != s.arity || s.points.size() != s.arity) {
      diags.push_back({"SchemaShape", name, "arg_kinds/points length differs from arity"});
    }
    for (const auto& g : s.symmetry) {
      if (!detail::is_permutation_of(g, s.total_points())) {
        diags.push_back({"InvalidSymmetry", name, "symmetry entry is not a permutation of the declared points"});
      }
    }
  }
  std::map<int, std::vector<std::string>> by_code;
  std::map<std::string, int> by_name;
  std::map<std::string, std::set<std::string>> arity_bad;
  for (const auto& th : kb.theorems) {
    by_code[th.code].push_back(th.name);
    ++by_name[th.name];
    if (th.code <= 0) diags.push_back({"NonPositiveCode", th.name, "theorem codes start at 1"});
    for (const auto* list : {&th.premise_facts, &th.premise_equations, &th.conclusion_facts, &th.conclusion_equations}) {
      for (const auto& t : *list) detail::check_arity(t, kb, arity_bad, diags, th.name);
    }
    for (const auto& t : th.premise_facts) {
      if (t.is_predicate("Equal")) diags.push_back({"MisplacedEquation", th.name, "Equal belongs under equations"});
      if (kb.is_measure(t.head)) diags.push_back({"MisplacedMeasure", th.name, t.head + " is not a fact"});
    }
    std::string bound;
    for (const auto& t : th.premise_facts) detail::collect_pattern_vars(t, bound);
    std::string used;
    for (const auto& t : th.premise_equations) detail::collect_pattern_vars(t, used);
    for (char c : used) {
      if (bound.find(c) == std::string::npos) {
        diags.push_back({"UnboundPremiseVariable", th.name, std::string("variable '") + c + "' only occurs in equations"});
      }
    }
    std::string concl;
    for (const auto& t : th.conclusion_facts) detail::collect_pattern_vars(t, concl);
    for (const auto& t : th.conclusion_equations) detail::collect_pattern_vars(t, concl);
    for (char c : concl) {
      if (bound.find(c) == std::string::npos) {
        diags.push_back({"UnboundConclusionVariable", th.name,
                         std::string("conclusion variable '") + c + "' does not occur in the premise"});
      }
    }
    for (const auto& t : th.conclusion_equations) {
      if (!t.is_predicate("Equal")) diags.push_back({"MalformedEquation", th.name, "equations must be Equal(...)"});
    }
  }
  for (const auto& [head, theorems] : arity_bad) {
    std::string names;
    for (const auto& n : theorems) names += (names.empty() ? "" : ",") + n;
    diags.push_back({"ArityMismatch", head, "used with the wrong number of arguments in: " + names});
  }
  for (const auto& [code, names] : by_code) {
    if (names.size() > 1) {
      diags.push_back({"DuplicateCode", names[1], "code " + std::to_string(code) + " is shared by " +
                                                       std::to_string(names.size()) + " theorems"});
    }
  }
  for (const auto& [name, n] : by_name) {
    if (n > 1) diags.push_back({"DuplicateName", name, "theorem declared more than once"});
  }
  return diags;
}

// Builds a KB without validating it.
inline KnowledgeBase parse_knowledge_base(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("predicates") || !doc.contains("theorems")) {
    throw SchemaError("GDL document needs 'predicates' and 'theorems'");
  }
  KnowledgeBase kb;
  try {
    for (const auto& p : doc.at("predicates")) {
      PredicateSchema s;
      s.name = p.at("name").get<std::string>();
      if (builtin_heads().count(s.name)) throw SchemaError("'" + s.name + "' is a built-in head");
      s.arity = p.at("arity").get<std::size_t>();
      for (const auto& k : p.value("arg_kinds", nlohmann::json::array())) {
        s.arg_kinds.push_back(detail::parse_arg_kind(k.get<std::string>()));
      }
      s.points = p.value("points", std::vector<std::size_t>{});
      s.symmetry = p.value("symmetry", std::vector<Permutation>{});
      s.measure = p.value("measure", false);
      if (!kb.schemas.emplace(s.name, s).second) throw DuplicateName("predicate '" + s.name + "' declared twice");
    }
    kb.reindex();
    int index = 0;
    for (const auto& t : doc.at("theorems")) {
      ++index;
      Theorem th;
      th.name = t.at("name").get<std::string>();
      th.code = t.value("code", index);
      const nlohmann::json empty = nlohmann::json::object();
      const auto& prem = t.contains("premise") ? t.at("premise") : empty;
      const auto& concl = t.contains("conclusions") ? t.at("conclusions") : empty;
      th.premise_facts = detail::parse_patterns(prem, "facts", kb, th.name);
      th.premise_equations = detail::parse_patterns(prem, "equations", kb, th.name);
      th.conclusion_facts = detail::parse_patterns(concl, "facts", kb, th.name);
      th.conclusion_equations = detail::parse_patterns(concl, "equations", kb, th.name);
      for (const auto& f : th.premise_facts) detail::collect_pattern_vars(f, th.variables);
      kb.theorems.push_back(std::move(th));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed GDL: ") + e.what());
  }
  kb.reindex();
  return kb;
}

// Parse + validate. Diagnostics become errors.
inline KnowledgeBase load_knowledge_base(const nlohmann::json& doc) {
  KnowledgeBase kb = parse_knowledge_base(doc);
  const auto diags = validate(kb);
  for (const auto& d : diags) {
    if (d.kind == "DuplicateName") throw DuplicateName(d.subject + ": " + d.message);
    if (d.kind == "UnboundConclusionVariable") throw UnboundConclusionVariable(d.subject + ": " + d.message);
  }
  if (!diags.empty()) throw SchemaError(diags.front().kind + " in " + diags.front().subject + ": " + diags.front().message);
  return kb;
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("'" + path + "': " + e.what());
  }
}

inline KnowledgeBase load_knowledge_base_file(const std::string& path) {
  return load_knowledge_base(read_json_file(path));
}

// name -> code or code -> name.
inline int theorem_codec(const KnowledgeBase& kb, const std::string& name) { return kb.code_of(name); }
inline const std::string& theorem_codec(const KnowledgeBase& kb, int code) { return kb.name_of(code); }

}  // namespace fgeo
