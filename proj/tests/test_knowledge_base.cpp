#include <gtest/gtest.h>

#include "support.hpp"

using namespace fgeo;

namespace {

nlohmann::json mini_doc() { return read_json_file(fixtures::data_path("mini_gdl.json")); }

std::size_t count_kind(const std::vector<Diagnostic>& diags, const std::string& kind) {
  std::size_t n = 0;
  for (const auto& d : diags) n += d.kind == kind;
  return n;
}

nlohmann::json tiny_doc() {
  return nlohmann::json::parse(R"J({
    "predicates": [{"name": "Polygon", "arity": 1, "arg_kinds": ["entity"], "points": [3]},
                   {"name": "MeasureOfAngle", "arity": 1, "arg_kinds": ["entity"], "points": [3], "measure": true}],
    "theorems": [{"name": "angle_sum", "premise": {"facts": ["Polygon(abc)"]},
                  "conclusions": {"equations": ["Equal(Add(MeasureOfAngle(abc),MeasureOfAngle(bca),MeasureOfAngle(cab)),180)"]}}]
  })J");
}

}  // namespace

TEST(KnowledgeBase, SingleTheoremGetsCodeOne) {
  const KnowledgeBase kb = load_knowledge_base(tiny_doc());
  EXPECT_EQ(kb.theorems.size(), 1u);
  EXPECT_EQ(theorem_codec(kb, "angle_sum"), 1);
  EXPECT_EQ(theorem_codec(kb, 1), "angle_sum");
  EXPECT_THROW(theorem_codec(kb, "missing"), UnknownTheorem);
  EXPECT_THROW(theorem_codec(kb, 2), UnknownTheoremCode);
}

TEST(KnowledgeBase, MiniGdlLoadsCleanly) {
  const KnowledgeBase& kb = fixtures::mini_kb();
  EXPECT_GE(kb.theorems.size(), 12u);
  EXPECT_TRUE(validate(kb).empty());
  EXPECT_EQ(theorem_codec(kb, kb.theorems.front().name), 1);
}

TEST(KnowledgeBase, CodecIsABijection) {
  const KnowledgeBase& kb = fixtures::mini_kb();
  std::set<int> codes;
  std::set<std::string> names;
  for (const auto& th : kb.theorems) {
    EXPECT_EQ(theorem_codec(kb, theorem_codec(kb, th.name)), th.name);
    EXPECT_EQ(theorem_codec(kb, theorem_codec(kb, th.code)), th.code);
    codes.insert(th.code);
    names.insert(th.name);
  }
  EXPECT_EQ(codes.size(), kb.theorems.size());
  EXPECT_EQ(names.size(), kb.theorems.size());
  EXPECT_EQ(codes.count(0), 0u);
}

TEST(KnowledgeBase, UnboundConclusionVariableIsRejected) {
  auto doc = tiny_doc();
  doc["theorems"][0]["conclusions"]["facts"] = {"Polygon(abd)"};
  EXPECT_THROW(load_knowledge_base(doc), UnboundConclusionVariable);
}

TEST(KnowledgeBase, DuplicateNamesAreRejected) {
  auto doc = tiny_doc();
  doc["theorems"].push_back(doc["theorems"][0]);
  EXPECT_THROW(load_knowledge_base(doc), DuplicateName);
}

TEST(Validate, DuplicateCodeIsDiagnosed) {
  auto doc = tiny_doc();
  auto second = doc["theorems"][0];
  second["name"] = "angle_sum_again";
  second["code"] = 1;
  doc["theorems"].push_back(second);
  const auto diags = validate(parse_knowledge_base(doc));
  ASSERT_EQ(diags.size(), 1u);
  EXPECT_EQ(diags[0].kind, "DuplicateCode");
  EXPECT_EQ(diags[0].subject, "angle_sum_again");
}

TEST(Validate, EachArityFlipYieldsExactlyOneArityMismatch) {
  const auto original = mini_doc();
  const KnowledgeBase kb = parse_knowledge_base(original);
  for (std::size_t i = 0; i < original["predicates"].size(); ++i) {
    const std::string name = original["predicates"][i]["name"];
    bool used = false;
    for (const auto& th : kb.theorems) {
      for (const auto* list : {&th.premise_facts, &th.conclusion_facts, &th.premise_equations, &th.conclusion_equations}) {
        for (const auto& t : *list) used = used || render_term(t).find(name + "(") != std::string::npos;
      }
    }
    if (!used) continue;
    auto doc = original;
    doc["predicates"][i]["arity"] = doc["predicates"][i]["arity"].get<int>() + 1;
    const auto diags = validate(parse_knowledge_base(doc));
    EXPECT_EQ(count_kind(diags, "ArityMismatch"), 1u) << name;
  }
}

TEST(Validate, ArityFlipInOnePatternIsNamed) {
  auto doc = mini_doc();
  doc["theorems"][0]["premise"]["facts"][0] = "Polygon(abc,abc)";
  const auto diags = validate(parse_knowledge_base(doc));
  ASSERT_EQ(count_kind(diags, "ArityMismatch"), 1u);
  for (const auto& d : diags) {
    if (d.kind == "ArityMismatch") {
      EXPECT_EQ(d.subject, "Polygon");
      EXPECT_NE(d.message.find(doc["theorems"][0]["name"].get<std::string>()), std::string::npos);
    }
  }
}

TEST(KnowledgeBase, SymmetryCanonicalisesEntities) {
  const KnowledgeBase& kb = fixtures::mini_kb();
  EXPECT_EQ(kb.canonical(parse_term("Line(BA)")), kb.canonical(parse_term("Line(AB)")));
  EXPECT_EQ(kb.canonical(parse_term("MeasureOfAngle(CBA)")), kb.canonical(parse_term("MeasureOfAngle(ABC)")));
  EXPECT_NE(kb.canonical(parse_term("MeasureOfAngle(BAC)")), kb.canonical(parse_term("MeasureOfAngle(ABC)")));
  EXPECT_EQ(kb.variants(parse_term("Polygon(ABC)")).size(), 6u);
}

TEST(KnowledgeBase, InvalidSymmetryIsDiagnosed) {
  auto doc = tiny_doc();
  doc["predicates"][0]["symmetry"] = {{0, 0, 1}};
  const auto diags = validate(parse_knowledge_base(doc));
  EXPECT_EQ(count_kind(diags, "InvalidSymmetry"), 1u);
}

TEST(KnowledgeBase, ConclusionsAreGroundForEveryMatch) {
  const KnowledgeBase& kb = fixtures::mini_kb();
  for (const auto& p : fixtures::mini_corpus().problems) {
    ConditionSet cs = ConditionSet::from_problem(p, kb);
    for (const auto& th : kb.theorems) {
      for (const auto& b : match_premise(cs, th)) {
        for (const auto& t : conclusions(th, b)) EXPECT_TRUE(is_ground(t)) << th.name << " " << render_term(t);
      }
    }
  }
}
