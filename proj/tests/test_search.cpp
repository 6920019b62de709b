#include <gtest/gtest.h>

#include <functional>
#include <optional>

#include "oracles.hpp"

using namespace fgeo;

namespace {

const KnowledgeBase& kb() { return fixtures::mini_kb(); }
const std::vector<ProblemInstance>& corpus() { return fixtures::mini_corpus().problems; }

SearchLimits unlimited() {
  SearchLimits l;
  l.timeout_secs = 1e9;
  l.clock = ClockKind::Logical;
  return l;
}

// Shortest number of single (theorem, binding) applications reaching the
// goal, by plain enumeration of every application sequence up to `limit`.
std::optional<std::size_t> shortest_by_enumeration(const ProblemInstance& p, std::size_t limit) {
  const ConditionSet start = ConditionSet::from_problem(p, kb());
  if (start.check_goal(p.goal).solved) return 0;
  std::function<bool(const ConditionSet&, std::size_t)> reach = [&](const ConditionSet& cs, std::size_t left) {
    for (const auto& th : kb().theorems) {
      for (const auto& b : match_premise(cs, th)) {
        ConditionSet next = cs;
        try {
          apply_theorem(next, th, b);
          next.solve_equations();
        } catch (const InconsistentSystem&) {
          continue;
        }
        if (next.check_goal(p.goal).solved) return true;
        if (left > 1 && reach(next, left - 1)) return true;
      }
    }
    return false;
  };
  for (std::size_t d = 1; d <= limit; ++d) {
    if (reach(start, d)) return d;
  }
  return std::nullopt;
}

void expect_valid_trace(const ProblemInstance& p, const SearchOutcome& o) {
  const auto r = replay(p, kb(), o.applied);
  EXPECT_TRUE(r.valid) << p.id;
  EXPECT_TRUE(r.check.solved) << p.id;
  if (o.answer) {
    EXPECT_EQ(r.check.answer.str(), o.answer->str()) << p.id;
  }
}

}  // namespace

TEST(ClassifyOutcome, PartitionsTheRawFlags) {
  EXPECT_EQ(classify_outcome({true, false, false}), Status::Solved);
  EXPECT_EQ(classify_outcome({true, true, false}), Status::Solved);
  EXPECT_EQ(classify_outcome({false, true, false}), Status::Timeout);
  EXPECT_EQ(classify_outcome({false, false, true}), Status::Unsolved);
  EXPECT_EQ(classify_outcome({false, false, false}), Status::Unsolved);
}

TEST(SearchLimits, RejectsNonsense) {
  SearchLimits l;
  l.max_depth = 0;
  EXPECT_THROW(l.validate(), SchemaError);
  l = {};
  l.timeout_secs = 0;
  EXPECT_THROW(l.validate(), SchemaError);
  l = {};
  l.beam_size = 0;
  EXPECT_THROW(l.validate(), SchemaError);
}

TEST(ForwardSearch, SolvesAngleSumProblem) {
  const auto& p = corpus().front();
  const auto o = forward_search(p, kb(), Strategy::BFS, unlimited());
  ASSERT_EQ(o.status, Status::Solved);
  EXPECT_EQ(o.answer->str(), "70");
  EXPECT_EQ(o.applied_sequence(), (std::vector<int>{kb().code_of("triangle_property_angle_sum")}));
  EXPECT_EQ(o.steps, 1u);
}

TEST(ForwardSearch, GivenGoalNeedsNoExpansion) {
  const auto p = fixtures::make_problem({"Equal(x,3)"}, "Value(x)");
  for (Method m : {Method::Forward, Method::Backward}) {
    RunClock clock(ClockKind::Logical);
    const auto o = search(p, kb(), m, Strategy::BFS, unlimited(), nullptr, clock);
    EXPECT_EQ(o.status, Status::Solved);
    EXPECT_EQ(o.steps, 0u);
    EXPECT_TRUE(o.applied.empty());
  }
}

TEST(ForwardSearch, UnreachableGoalExhaustsTheFrontier) {
  const auto p = fixtures::make_problem({"Polygon(ABC)", "Equal(MeasureOfAngle(ABC),50)"}, "Value(MeasureOfAngle(BCA))");
  for (Method m : {Method::Forward, Method::Backward}) {
    RunClock clock(ClockKind::Logical);
    const auto o = search(p, kb(), m, Strategy::BFS, unlimited(), nullptr, clock);
    EXPECT_EQ(o.status, Status::Unsolved) << to_string(m);
    EXPECT_FALSE(o.answer.has_value());
  }
}

TEST(ForwardSearch, DepthLimitLeavesLongProblemsUnsolved) {
  const auto* p = fixtures::mini_corpus().find(19);
  ASSERT_NE(p, nullptr);
  SearchLimits l = unlimited();
  l.max_depth = 1;
  EXPECT_EQ(forward_search(*p, kb(), Strategy::BFS, l).status, Status::Unsolved);
}

TEST(ForwardSearch, TinyBudgetTimesOut) {
  const auto* p = fixtures::mini_corpus().find(19);
  SearchLimits l = unlimited();
  l.timeout_secs = 0.001;
  for (Method m : {Method::Forward, Method::Backward}) {
    RunClock clock(ClockKind::Logical);
    const auto o = search(*p, kb(), m, Strategy::BFS, l, nullptr, clock);
    EXPECT_EQ(o.status, Status::Timeout) << to_string(m);
    EXPECT_GE(o.elapsed_us, 1000);
  }
}

TEST(ForwardSearch, RandomStrategiesReplayForASeed) {
  for (Strategy s : {Strategy::RS, Strategy::BS}) {
    for (const auto& p : corpus()) {
      SearchLimits l = unlimited();
      l.rng_seed = 1234;
      l.beam_size = 4;
      const auto a = forward_search(p, kb(), s, l);
      const auto b = forward_search(p, kb(), s, l);
      EXPECT_EQ(a.status, b.status);
      EXPECT_EQ(a.steps, b.steps);
      EXPECT_EQ(a.applied_sequence(), b.applied_sequence());
      EXPECT_EQ(a.elapsed_us, b.elapsed_us);
    }
  }
}

TEST(Search, EveryStrategyProducesReplayableTraces) {
  for (Method m : {Method::Forward, Method::Backward}) {
    for (Strategy s : {Strategy::BFS, Strategy::DFS, Strategy::RS, Strategy::BS}) {
      for (const auto& p : corpus()) {
        RunClock clock(ClockKind::Logical);
        const auto o = search(p, kb(), m, s, unlimited(), nullptr, clock);
        if (o.status != Status::Solved) continue;
        EXPECT_EQ(o.answer->str(), fixtures::recorded_answer(p)) << p.id << " " << to_string(m) << to_string(s);
        expect_valid_trace(p, o);
      }
    }
  }
}

TEST(Search, BreadthFirstFindsShortestApplicationSequence) {
  for (const auto& p : corpus()) {
    if (p.annotated_sequences.front().size() > 3) continue;
    const auto expected = shortest_by_enumeration(p, 3);
    const auto o = forward_search(p, kb(), Strategy::BFS, unlimited());
    ASSERT_EQ(o.status, Status::Solved) << p.id;
    if (expected) {
      EXPECT_EQ(o.applied.size(), *expected) << p.id;
    } else {
      EXPECT_GT(o.applied.size(), 3u) << p.id;
    }
  }
}

TEST(Search, BreadthFirstAgreesWithCodeSequenceEnumeration) {
  std::size_t checked = 0;
  for (const auto& p : corpus()) {
    if (p.annotated_sequences.front().size() > 3) continue;
    const auto brute = fixtures::code_sequence_answer(p, kb(), 3);
    const auto o = forward_search(p, kb(), Strategy::BFS, unlimited());
    EXPECT_EQ(o.status == Status::Solved, brute.has_value()) << p.id;
    if (brute && o.answer) {
      EXPECT_EQ(o.answer->str(), *brute) << p.id;
    }
    ++checked;
  }
  EXPECT_GE(checked, 10u);
}

TEST(Search, BackwardAndForwardSolveTheSameProblems) {
  for (const auto& p : corpus()) {
    const auto fw = forward_search(p, kb(), Strategy::BFS, unlimited());
    const auto bw = backward_search(p, kb(), Strategy::BFS, unlimited());
    EXPECT_EQ(fw.status, bw.status) << p.id;
    if (fw.answer && bw.answer) {
      EXPECT_EQ(fw.answer->str(), bw.answer->str()) << p.id;
    }
  }
}

TEST(Search, SeededStateIsRespected) {
  const auto* p = fixtures::mini_corpus().find(19);
  ConditionSet cs = ConditionSet::from_problem(*p, kb());
  execute_sequence(cs, kb(), p->annotated_sequences.front(), 3);
  for (Method m : {Method::Forward, Method::Backward}) {
    RunClock clock(ClockKind::Logical);
    const auto o = search(*p, kb(), m, Strategy::BFS, unlimited(), &cs, clock);
    EXPECT_EQ(o.status, Status::Solved);
    EXPECT_EQ(o.steps, 0u);
  }
}

TEST(Search, TraceJsonListsEveryStep) {
  const auto* p = fixtures::mini_corpus().find(20);
  const auto o = forward_search(*p, kb(), Strategy::BFS, unlimited());
  const auto j = trace_json(o.applied);
  ASSERT_EQ(j.size(), o.applied.size());
  for (std::size_t i = 0; i < j.size(); ++i) EXPECT_EQ(j[i]["theorem"], o.applied[i].theorem);
}
