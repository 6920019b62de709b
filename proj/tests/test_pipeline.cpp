#include <gtest/gtest.h>

#include "support.hpp"

using namespace fgeo;

namespace {

const KnowledgeBase& kb() { return fixtures::mini_kb(); }
const std::vector<ProblemInstance>& corpus() { return fixtures::mini_corpus().problems; }

PipelineConfig config(std::shared_ptr<const Predictor> pred, double timeout = 1e9) {
  PipelineConfig c;
  c.predictor = std::move(pred);
  c.limits.timeout_secs = timeout;
  c.limits.clock = ClockKind::Logical;
  return c;
}

std::vector<int> codes_of(const std::vector<AppliedStep>& steps) {
  std::vector<int> out;
  for (const auto& s : steps) out.push_back(s.code);
  return out;
}

const ProblemInstance& flood_problem() { return fixtures::adversarial_corpus().problems.front(); }

std::shared_ptr<const Predictor> flood_predictor() {
  return std::make_shared<FixedPredictor>(std::vector<int>{kb().code_of("midpoint_of_line_property"),
                                                           kb().code_of("parallel_property_alternate_interior_angle"),
                                                           kb().code_of("parallel_property_ipsilateral_internal_angle"),
                                                           kb().code_of("parallel_property_corresponding_angle")},
                                          "flood");
}

}  // namespace

TEST(ExecuteSequence, ExtraPassesChangeNothingOnceSaturated) {
  for (const auto& p : corpus()) {
    ConditionSet a = ConditionSet::from_problem(p, kb());
    ConditionSet b = a;
    const auto ra = execute_sequence(a, kb(), kb().codes(), 3);
    const auto rb = execute_sequence(b, kb(), kb().codes(), 10);
    if (ra.passes_run < 3) {
      EXPECT_TRUE(a == b) << p.id;
      EXPECT_EQ(a.fingerprint(), b.fingerprint()) << p.id;
    }
    EXPECT_LE(rb.passes_run, 10u);
  }
}

TEST(ExecuteSequence, AnnotatedSequenceIsIdempotentAfterFixpoint) {
  for (const auto& p : corpus()) {
    ConditionSet cs = ConditionSet::from_problem(p, kb());
    execute_sequence(cs, kb(), p.annotated_sequences.front(), 50);
    const ConditionSet saturated = cs;
    const auto again = execute_sequence(cs, kb(), p.annotated_sequences.front(), 3);
    EXPECT_EQ(again.new_fact_count, 0u) << p.id;
    EXPECT_EQ(again.passes_run, 1u) << p.id;
    EXPECT_TRUE(cs == saturated) << p.id;
  }
}

TEST(ExecuteSequence, UnknownCodeIsRejectedBeforeAnyChange) {
  ConditionSet cs = ConditionSet::from_problem(corpus().front(), kb());
  const ConditionSet before = cs;
  EXPECT_THROW(execute_sequence(cs, kb(), {1, 999}, 3), UnknownTheoremCode);
  EXPECT_TRUE(cs == before);
}

TEST(SolveTp, OraclePredictionSolvesWithoutSearch) {
  const auto cfg = config(std::make_shared<OraclePredictor>());
  for (const auto& p : corpus()) {
    const auto r = solve_tp(p, kb(), cfg);
    ASSERT_EQ(r.outcome.status, Status::Solved) << p.id;
    EXPECT_EQ(r.outcome.steps, 0u) << p.id;
    EXPECT_EQ(r.outcome.answer->str(), fixtures::recorded_answer(p)) << p.id;
    EXPECT_EQ(r.phase, "tp");
    const auto rep = replay(p, kb(), r.outcome.applied);
    EXPECT_TRUE(rep.valid) << p.id;
    EXPECT_TRUE(rep.check.solved) << p.id;
  }
}

TEST(SolveTp, EmptyPredictionEqualsPlainSearch) {
  const auto tp_cfg = config(std::make_shared<EmptyPredictor>());
  for (const auto& p : corpus()) {
    const auto tp = solve_tp(p, kb(), tp_cfg);
    const auto plain = solve_plain(p, kb(), tp_cfg);
    EXPECT_EQ(tp.outcome.status, plain.outcome.status) << p.id;
    EXPECT_EQ(tp.outcome.steps, plain.outcome.steps) << p.id;
    EXPECT_EQ(codes_of(tp.outcome.applied), codes_of(plain.outcome.applied)) << p.id;
    EXPECT_TRUE(tp.prediction.union_seq.empty());
  }
}

TEST(SolveTp, UnknownCodeFallsBackToPlainWithWarning) {
  const auto cfg = config(std::make_shared<FixedPredictor>(std::vector<int>{1, 999}));
  const auto& p = corpus().front();
  const auto r = solve_tp(p, kb(), cfg);
  EXPECT_EQ(r.outcome.status, Status::Solved);
  EXPECT_NE(r.warning.find("999"), std::string::npos);
  EXPECT_FALSE(r.execution.has_value());
  const auto plain = solve_plain(p, kb(), cfg);
  EXPECT_EQ(r.outcome.steps, plain.outcome.steps);
}

TEST(SolveTp, PredictorFailureIsAWarningNotAnError) {
  ProblemInstance bare = corpus().front();
  bare.annotated_sequences.clear();
  const auto r = solve_tp(bare, kb(), config(std::make_shared<OraclePredictor>()));
  EXPECT_EQ(r.outcome.status, Status::Solved);
  EXPECT_FALSE(r.warning.empty());
}

TEST(SolveTp, MissingPredictorSearchesPlain) {
  const auto r = solve_tp(corpus().front(), kb(), config(nullptr));
  EXPECT_EQ(r.outcome.status, Status::Solved);
  EXPECT_FALSE(r.warning.empty());
}

TEST(SolveHybrid, FloodedPredictionFallsBackAndSolves) {
  auto cfg = config(flood_predictor(), 0.1);
  const auto& p = flood_problem();
  const auto tp = solve_tp(p, kb(), [&] {
    auto c = cfg;
    c.limits.timeout_secs = cfg.limits.timeout_secs * cfg.budget_split;
    return c;
  }());
  ASSERT_EQ(tp.outcome.status, Status::Timeout);
  const auto hy = solve_hybrid(p, kb(), cfg);
  EXPECT_EQ(hy.phase, "fallback");
  ASSERT_EQ(hy.outcome.status, Status::Solved);
  EXPECT_EQ(hy.outcome.answer->str(), "70");
  EXPECT_LE(hy.outcome.elapsed_secs(), cfg.limits.timeout_secs + 1e-9);
  EXPECT_GE(hy.outcome.steps, hy.tp_steps);
}

// At each timeout, hybrid under `budget` solves every problem tp solves.
static void expect_hybrid_covers_tp(HybridBudget budget, std::initializer_list<double> timeouts) {
  const Split s = split_corpus(corpus(), {0.7, 0.15, 0.15}, 0);
  auto model = std::make_shared<const SeqModel>(train_predictor(s.train, s.valid, kb()));
  for (double timeout : timeouts) {
    auto cfg = config(std::make_shared<ModelPredictor>(model, kb()), timeout);
    cfg.hybrid_budget = budget;
    for (const auto& p : corpus()) {
      const auto tp = solve_tp(p, kb(), cfg);
      const auto hy = solve_hybrid(p, kb(), cfg);
      if (tp.outcome.status == Status::Solved) {
        EXPECT_EQ(hy.outcome.status, Status::Solved) << p.id << " " << timeout;
      }
    }
  }
}

TEST(SolveHybrid, RerunSolvesEverythingTpSolvesAtAnyBudget) {
  expect_hybrid_covers_tp(HybridBudget::Rerun, {0.002, 0.005, 0.02, 0.05, 1.0});
}

TEST(SolveHybrid, SplitSolvesEverythingTpSolvesWhenTpIsNotBudgetBound) {
  expect_hybrid_covers_tp(HybridBudget::Split, {0.05, 0.1, 1.0, 600.0});
}

TEST(SolveHybrid, RerunGivesTheFallbackAFullTimeout) {
  auto cfg = config(flood_predictor(), 0.05);
  cfg.hybrid_budget = HybridBudget::Rerun;
  const auto hy = solve_hybrid(flood_problem(), kb(), cfg);
  EXPECT_EQ(hy.phase, "fallback");
  EXPECT_EQ(hy.outcome.status, Status::Solved);
  EXPECT_GE(hy.outcome.elapsed_secs(), cfg.limits.timeout_secs);
  EXPECT_EQ(parse_hybrid_budget(to_string(HybridBudget::Rerun)), HybridBudget::Rerun);
}

TEST(SolveHybrid, NonTimeoutResultIsReturnedAsIs) {
  const auto cfg = config(std::make_shared<OraclePredictor>());
  const auto& p = corpus().front();
  const auto hy = solve_hybrid(p, kb(), cfg);
  EXPECT_EQ(hy.phase, "tp");
  EXPECT_EQ(hy.mode, Mode::Hybrid);
  EXPECT_EQ(hy.outcome.status, Status::Solved);
}

TEST(PipelineConfig, RejectsBadSettings) {
  auto cfg = config(nullptr);
  cfg.passes = 0;
  EXPECT_THROW(cfg.validate(), SchemaError);
  cfg = config(nullptr);
  cfg.budget_split = 1.0;
  EXPECT_THROW(cfg.validate(), SchemaError);
  EXPECT_EQ(parse_mode(to_string(Mode::Hybrid)), Mode::Hybrid);
  EXPECT_THROW(parse_mode("guided"), SchemaError);
}

TEST(RunRecord, CarriesEveryField) {
  const auto& p = corpus().front();
  const auto r = solve(p, kb(), Mode::TP, config(std::make_shared<OraclePredictor>()));
  const auto j = run_record_json(p, kb(), r);
  for (const char* key : {"problem_id", "mode", "predictor", "beams", "S_tp", "S_tp_names", "applied", "phase", "status",
                          "steps", "elapsed_ms", "prediction_ms", "answer"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["S_tp_names"][0], "triangle_property_angle_sum");
  EXPECT_EQ(j["status"], "solved");
  EXPECT_EQ(j["answer"], "70");
  EXPECT_EQ(j["mode"], "tp");
}
