#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace fgeo;

namespace {

const Theorem& by_name(const std::string& name) {
  const auto& kb = fixtures::mini_kb();
  return kb.theorem(kb.code_of(name));
}

// Every injective assignment of the theorem's variables to the points of
// `cs`, filtered by premise membership.
std::vector<Binding> brute_force(const ConditionSet& cs, const Theorem& th) {
  const std::vector<char> pts(cs.points().begin(), cs.points().end());
  std::vector<Binding> out;
  Binding b;
  std::vector<bool> taken(pts.size(), false);
  auto rec = [&](auto& self, std::size_t i) -> void {
    if (i == th.variables.size()) {
      if (premise_holds(cs, th, b)) out.push_back(b);
      return;
    }
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (taken[j]) continue;
      taken[j] = true;
      b[th.variables[i]] = pts[j];
      self(self, i + 1);
      b.erase(th.variables[i]);
      taken[j] = false;
    }
  };
  rec(rec, 0);
  return out;
}

std::set<std::string> keys_of(const ConditionSet& cs, const Theorem& th, const std::vector<Binding>& bs) {
  std::set<std::string> keys;
  for (const auto& b : bs) keys.insert(application_key(cs, th, b));
  return keys;
}

// Condition sets with a few points each: every corpus problem as given and
// after one round of every theorem.
std::vector<ConditionSet> small_states() {
  const auto& kb = fixtures::mini_kb();
  std::vector<ConditionSet> states;
  for (const auto& p : fixtures::mini_corpus().problems) {
    ConditionSet cs = ConditionSet::from_problem(p, kb);
    if (cs.points().size() > 8) continue;
    states.push_back(cs);
    for (const auto& th : kb.theorems) {
      for (const auto& b : match_premise(cs, th)) apply_theorem(cs, th, b);
    }
    cs.solve_equations();
    states.push_back(cs);
  }
  return states;
}

}  // namespace

TEST(MatchPremise, SinglePolygonGivesOneCanonicalBinding) {
  ConditionSet cs(fixtures::mini_kb());
  cs.add_fact(parse_term("Polygon(ABC)"));
  const auto bs = match_premise(cs, by_name("triangle_property_angle_sum"));
  ASSERT_EQ(bs.size(), 1u);
}

TEST(MatchPremise, EmptySetHasNoMatches) {
  const ConditionSet cs(fixtures::mini_kb());
  for (const auto& th : fixtures::mini_kb().theorems) EXPECT_TRUE(match_premise(cs, th).empty()) << th.name;
}

TEST(MatchPremise, AgreesWithBruteForceSubstitution) {
  std::size_t compared = 0;
  for (const auto& cs : small_states()) {
    for (const auto& th : fixtures::mini_kb().theorems) {
      const auto fast = match_premise(cs, th);
      const auto slow = brute_force(cs, th);
      EXPECT_EQ(keys_of(cs, th, fast), keys_of(cs, th, slow)) << th.name;
      EXPECT_EQ(keys_of(cs, th, fast).size(), fast.size()) << th.name << " returned symmetric duplicates";
      for (const auto& b : fast) EXPECT_TRUE(premise_holds(cs, th, b));
      ++compared;
    }
  }
  EXPECT_GT(compared, 100u);
}

TEST(MatchPremise, OrderIsLexicographicOnBoundPoints) {
  for (const auto& cs : small_states()) {
    for (const auto& th : fixtures::mini_kb().theorems) {
      const auto bs = match_premise(cs, th);
      for (std::size_t i = 1; i < bs.size(); ++i) EXPECT_LT(binding_key(th, bs[i - 1]), binding_key(th, bs[i]));
    }
  }
}

TEST(MatchPremise, BindingsAreInjective) {
  ConditionSet cs(fixtures::mini_kb());
  cs.add_fact(parse_term("Polygon(ABC)"));
  const Theorem& th = by_name("triangle_property_angle_sum");
  Binding degenerate{{'a', 'A'}, {'b', 'A'}, {'c', 'B'}};
  EXPECT_FALSE(premise_holds(cs, th, degenerate));
}

TEST(ApplyTheorem, AngleSumAddsOneEquationThenNothing) {
  ConditionSet cs(fixtures::mini_kb());
  cs.add_fact(parse_term("Polygon(ABC)"));
  const Theorem& th = by_name("triangle_property_angle_sum");
  const auto b = match_premise(cs, th).at(0);
  const auto added = apply_theorem(cs, th, b);
  ASSERT_EQ(added.size(), 1u);
  const auto expected =
      equation_polynomial(parse_term("Equal(Add(MeasureOfAngle(ABC),MeasureOfAngle(BCA),MeasureOfAngle(CAB)),180)"),
                          fixtures::mini_kb());
  EXPECT_TRUE(cs.has_equation(expected));
  EXPECT_TRUE(apply_theorem(cs, th, b).empty());
}

TEST(ApplyTheorem, UnsatisfiedBindingIsRejected) {
  ConditionSet cs(fixtures::mini_kb());
  cs.add_fact(parse_term("Polygon(ABC)"));
  EXPECT_THROW(apply_theorem(cs, by_name("triangle_property_angle_sum"), {{'a', 'A'}, {'b', 'B'}, {'c', 'D'}}),
               InvalidBinding);
}

TEST(ApplyTheorem, ProvenanceIsReproducible) {
  const auto& kb = fixtures::mini_kb();
  for (const auto& p : fixtures::mini_corpus().problems) {
    ConditionSet cs = ConditionSet::from_problem(p, kb);
    for (int code : p.annotated_sequences.front()) {
      const Theorem& th = kb.theorem(code);
      for (const auto& b : match_premise(cs, th)) apply_theorem(cs, th, b);
      cs.solve_equations();
    }
    for (const auto& [key, prov] : cs.provenance()) {
      if (prov.code == 0) continue;
      const Theorem& th = kb.theorem(prov.code);
      for (const auto& premise : prov.premises) EXPECT_TRUE(cs.has_fact(parse_term(premise))) << premise;
      bool reproduced = false;
      for (const auto& b : match_premise(cs, th)) {
        if (binding_str(b) != prov.binding) continue;
        for (const auto& t : conclusions(th, b)) {
          const std::string k = t.is_predicate("Equal") ? equation_polynomial(t, kb).normalized().str()
                                                        : render_term(kb.canonical(t));
          reproduced = reproduced || k == key;
        }
      }
      EXPECT_TRUE(reproduced) << key << " from " << th.name << " {" << prov.binding << "}";
    }
  }
}
