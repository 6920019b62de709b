#pragma once

// Premise unification and theorem application over a ConditionSet.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fgeo/condition_set.hpp"
#include "fgeo/knowledge_base.hpp"

namespace fgeo {

// pattern variable -> point label. Injective within one application.
using Binding = std::map<char, char>;

inline std::string binding_str(const Binding& b) {
  std::string out;
  for (const auto& [v, p] : b) {
    if (!out.empty()) out += ',';
    out += v;
    out += '=';
    out += p;
  }
  return out;
}

// Bound points in the theorem's variable order; the ordering key for bindings.
inline std::string binding_key(const Theorem& th, const Binding& b) {
  std::string out;
  for (char v : th.variables) {
    auto it = b.find(v);
    out += it == b.end() ? '?' : it->second;
  }
  return out;
}

inline Term instantiate(const Term& pattern, const Binding& b) {
  Term out = pattern;
  if (out.is_entity()) {
    for (auto& c : out.points) {
      auto it = b.find(c);
      if (it != b.end()) c = it->second;
    }
    return out;
  }
  for (auto& a : out.args) a = instantiate(a, b);
  return out;
}

// True when every premise fact is in `cs` and every premise equation is
// either stored or an exact identity under the solved values.
inline bool premise_holds(const ConditionSet& cs, const Theorem& th, const Binding& b) {
  for (const auto& f : th.premise_facts) {
    const Term g = instantiate(f, b);
    if (!is_ground(g) || !cs.has_fact(g)) return false;
  }
  for (const auto& e : th.premise_equations) {
    const Term g = instantiate(e, b);
    if (!is_ground(g)) return false;
    if (!cs.knows_equation(equation_polynomial(g, cs.kb()))) return false;
  }
  std::set<char> image;
  for (const auto& [v, p] : b) {
    if (!image.insert(p).second) return false;
  }
  return true;
}

// Identity of an application: the ground premise and conclusion items it
// touches. Bindings with equal keys are symmetric duplicates.
inline std::string application_key(const ConditionSet& cs, const Theorem& th, const Binding& b) {
  const auto& kb = cs.kb();
  std::vector<std::string> prem, concl;
  for (const auto& f : th.premise_facts) prem.push_back(render_term(kb.canonical(instantiate(f, b))));
  for (const auto& f : th.conclusion_facts) concl.push_back(render_term(kb.canonical(instantiate(f, b))));
  for (const auto& e : th.conclusion_equations) {
    concl.push_back(equation_polynomial(instantiate(e, b), kb).normalized().str());
  }
  std::sort(prem.begin(), prem.end());
  std::sort(concl.begin(), concl.end());
  std::string key;
  for (const auto& s : prem) key += s + ";";
  key += "=>";
  for (const auto& s : concl) key += s + ";";
  return key;
}

namespace detail {

inline bool unify_points(const std::string& pattern, const std::string& ground, Binding& b, std::set<char>& used,
                         std::vector<char>& newly) {
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    const char v = pattern[i];
    const char p = ground[i];
    if (v >= 'A' && v <= 'Z') {
      if (v != p) return false;
      continue;
    }
    auto it = b.find(v);
    if (it != b.end()) {
      if (it->second != p) return false;
      continue;
    }
    if (used.count(p)) return false;
    b.emplace(v, p);
    used.insert(p);
    newly.push_back(v);
  }
  return true;
}

// Unify a fact pattern with one concrete (already variant-expanded) fact.
inline bool unify_fact(const Term& pattern, const Term& fact, Binding& b, std::set<char>& used, std::vector<char>& newly) {
  if (pattern.head != fact.head || pattern.args.size() != fact.args.size()) return false;
  for (std::size_t i = 0; i < pattern.args.size(); ++i) {
    const auto& pa = pattern.args[i];
    const auto& fa = fact.args[i];
    if (pa.is_entity() && fa.is_entity()) {
      if (pa.points.size() != fa.points.size()) return false;
      if (!unify_points(pa.points, fa.points, b, used, newly)) return false;
    } else if (!(pa == fa)) {
      return false;
    }
  }
  return true;
}

inline void undo(Binding& b, std::set<char>& used, std::vector<char>& newly) {
  for (char v : newly) {
    used.erase(b.at(v));
    b.erase(v);
  }
  newly.clear();
}

}  // namespace detail

// All bindings grounding the premise facts to members of `cs` and satisfying
// the premise equations, one per distinct application, ordered by bound points.
inline std::vector<Binding> match_premise(const ConditionSet& cs, const Theorem& th) {
  const auto& kb = cs.kb();
  // Fewest candidates first.
  std::vector<const Term*> order;
  for (const auto& f : th.premise_facts) order.push_back(&f);
  std::stable_sort(order.begin(), order.end(), [&](const Term* a, const Term* b) {
    return cs.facts_with_head(a->head).size() < cs.facts_with_head(b->head).size();
  });
  for (const auto* f : order) {
    if (cs.facts_with_head(f->head).empty()) return {};
  }
  std::vector<std::vector<Term>> candidates;
  for (const auto* f : order) {
    std::vector<Term> all;
    for (const auto& fact : cs.facts_with_head(f->head)) {
      for (auto& v : kb.variants(fact)) all.push_back(std::move(v));
    }
    candidates.push_back(std::move(all));
  }

  std::vector<Binding> found;
  Binding b;
  std::set<char> used;
  auto recurse = [&](auto& self, std::size_t depth) -> void {
    if (depth == order.size()) {
      if (premise_holds(cs, th, b)) found.push_back(b);
      return;
    }
    for (const auto& cand : candidates[depth]) {
      std::vector<char> newly;
      if (detail::unify_fact(*order[depth], cand, b, used, newly)) self(self, depth + 1);
      detail::undo(b, used, newly);
    }
  };
  recurse(recurse, 0);

  std::sort(found.begin(), found.end(), [&](const Binding& x, const Binding& y) {
    return binding_key(th, x) < binding_key(th, y);
  });
  found.erase(std::unique(found.begin(), found.end()), found.end());
  std::vector<Binding> out;
  std::set<std::string> keys;
  for (auto& bnd : found) {
    if (keys.insert(application_key(cs, th, bnd)).second) out.push_back(std::move(bnd));
  }
  return out;
}

// Instantiated conclusion terms (facts then equations).
inline std::vector<Term> conclusions(const Theorem& th, const Binding& b) {
  std::vector<Term> out;
  for (const auto& f : th.conclusion_facts) out.push_back(instantiate(f, b));
  for (const auto& e : th.conclusion_equations) out.push_back(instantiate(e, b));
  return out;
}

// Would applying (th, b) add anything not already known?
inline bool is_informative(const ConditionSet& cs, const Theorem& th, const Binding& b) {
  for (const auto& f : th.conclusion_facts) {
    if (!cs.has_fact(instantiate(f, b))) return true;
  }
  for (const auto& e : th.conclusion_equations) {
    if (!cs.knows_equation(equation_polynomial(instantiate(e, b), cs.kb()))) return true;
  }
  return false;
}

// Adds the instantiated conclusions with provenance; returns those that were new.
inline std::vector<Term> apply_theorem(ConditionSet& cs, const Theorem& th, const Binding& b) {
  if (!premise_holds(cs, th, b)) {
    throw InvalidBinding(th.name + " with {" + binding_str(b) + "} does not satisfy its premise");
  }
  Provenance prov;
  prov.code = th.code;
  prov.theorem = th.name;
  prov.binding = binding_str(b);
  for (const auto& f : th.premise_facts) prov.premises.push_back(render_term(cs.kb().canonical(instantiate(f, b))));
  std::vector<Term> added;
  for (const auto& t : conclusions(th, b)) {
    if (cs.add_fact(t, prov)) added.push_back(t);
  }
  return added;
}

}  // namespace fgeo
