#pragma once

// Predict, execute the predicted theorems, then search; plus the hybrid mode
// that falls back to plain search when the guided run times out.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgeo/predictor.hpp"
#include "fgeo/search.hpp"

namespace fgeo {

enum class Mode { Plain, TP, Hybrid };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::Plain: return "plain";
    case Mode::TP: return "tp";
    case Mode::Hybrid: return "hybrid";
  }
  return "?";
}

inline Mode parse_mode(const std::string& s) {
  if (s == "plain") return Mode::Plain;
  if (s == "tp") return Mode::TP;
  if (s == "hybrid") return Mode::Hybrid;
  throw SchemaError("unknown mode '" + s + "'");
}

// How a hybrid run spends its budget. Split gives the guided phase a share of
// one timeout and the fallback the rest; Rerun gives each phase a full timeout.
enum class HybridBudget { Split, Rerun };

inline std::string to_string(HybridBudget b) { return b == HybridBudget::Split ? "split" : "rerun"; }

inline HybridBudget parse_hybrid_budget(const std::string& s) {
  if (s == "split") return HybridBudget::Split;
  if (s == "rerun") return HybridBudget::Rerun;
  throw SchemaError("unknown hybrid budget '" + s + "'");
}

struct PipelineConfig {
  std::shared_ptr<const Predictor> predictor;
  std::size_t passes = 3;
  Method method = Method::Forward;
  Strategy strategy = Strategy::BFS;
  SearchLimits limits;
  double budget_split = 0.5;
  HybridBudget hybrid_budget = HybridBudget::Split;

  void validate() const {
    if (passes < 1) throw SchemaError("passes must be at least 1");
    if (!(budget_split > 0 && budget_split < 1)) throw SchemaError("budget split must lie in (0,1)");
    limits.validate();
  }
};

struct ExecutionReport {
  std::vector<std::pair<int, std::size_t>> applied;  // (code, bindings applied) per theorem visit
  std::size_t new_fact_count = 0;
  std::vector<AppliedStep> steps;                    // applications that added something
  std::size_t passes_run = 0;
};

// Applies every current match of each theorem in `seq`, pass after pass,
// until a pass adds nothing or `passes` is reached.
inline ExecutionReport execute_sequence(ConditionSet& cs, const KnowledgeBase& kb, const std::vector<int>& seq,
                                        std::size_t passes, RunClock* clock = nullptr) {
  for (int code : seq) {
    if (!kb.has_code(code)) throw UnknownTheoremCode("theorem code " + std::to_string(code) + " is not in the KB");
  }
  ExecutionReport rep;
  for (std::size_t pass = 0; pass < passes; ++pass) {
    ++rep.passes_run;
    std::size_t added_this_pass = 0;
    for (int code : seq) {
      const Theorem& th = kb.theorem(code);
      const auto matches = match_premise(cs, th);
      if (clock) clock->charge();
      ConditionSet before = cs;
      std::size_t added = 0;
      std::vector<AppliedStep> steps;
      for (const auto& b : matches) {
        const auto fresh = apply_theorem(cs, th, b);
        if (clock) clock->charge();
        if (fresh.empty()) continue;
        added += fresh.size();
        steps.push_back(AppliedStep{th.code, th.name, b, detail::rendered(fresh, kb)});
      }
      try {
        cs.solve_equations();
      } catch (const InconsistentSystem&) {
        cs = std::move(before);
        added = 0;
        steps.clear();
      }
      rep.applied.emplace_back(code, matches.size());
      rep.new_fact_count += added;
      added_this_pass += added;
      for (auto& s : steps) rep.steps.push_back(std::move(s));
    }
    if (added_this_pass == 0) break;
  }
  return rep;
}

struct PipelineResult {
  Mode mode = Mode::Plain;
  std::string predictor;
  std::string phase;  // "plain", "tp" or "fallback"
  SearchOutcome outcome;
  Prediction prediction;
  std::optional<ExecutionReport> execution;
  std::int64_t prediction_us = 0;
  std::size_t tp_steps = 0;  // expansions spent in the guided phase of a hybrid run
  std::string warning;
};

inline PipelineResult solve_plain(const ProblemInstance& problem, const KnowledgeBase& kb, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult r;
  r.mode = Mode::Plain;
  r.phase = "plain";
  RunClock clock(cfg.limits.clock);
  r.outcome = search(problem, kb, cfg.method, cfg.strategy, cfg.limits, nullptr, clock);
  return r;
}

inline PipelineResult solve_tp(const ProblemInstance& problem, const KnowledgeBase& kb, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult r;
  r.mode = Mode::TP;
  r.phase = "tp";
  RunClock clock(cfg.limits.clock);
  if (cfg.predictor) {
    r.predictor = cfg.predictor->name();
    const RunClock pc(ClockKind::Wall);
    try {
      r.prediction = cfg.predictor->predict(problem);
    } catch (const std::exception& e) {
      r.prediction = {};
      r.warning = std::string("prediction failed, searching without it: ") + e.what();
    }
    r.prediction_us = pc.elapsed_us();
  } else {
    r.warning = "no predictor configured, searching without a prediction";
  }

  ConditionSet cs(kb);
  try {
    cs = ConditionSet::from_problem(problem, kb);
  } catch (const InconsistentSystem&) {
    r.outcome = search(problem, kb, cfg.method, cfg.strategy, cfg.limits, nullptr, clock);
    return r;
  }
  try {
    r.execution = execute_sequence(cs, kb, r.prediction.union_seq, cfg.passes, &clock);
  } catch (const UnknownTheoremCode& e) {
    r.warning = std::string("prediction rejected, searching without it: ") + e.what();
    r.execution.reset();
    cs = ConditionSet::from_problem(problem, kb);
  }
  const std::vector<AppliedStep> executed = r.execution ? r.execution->steps : std::vector<AppliedStep>{};
  if (auto g = cs.check_goal(problem.goal); g.solved) {
    r.outcome.status = Status::Solved;
    r.outcome.answer = g.answer;
    r.outcome.applied = executed;
    r.outcome.steps = 0;
    r.outcome.elapsed_us = clock.elapsed_us();
    return r;
  }
  r.outcome = search(problem, kb, cfg.method, cfg.strategy, cfg.limits, &cs, clock);
  std::vector<AppliedStep> all = executed;
  all.insert(all.end(), r.outcome.applied.begin(), r.outcome.applied.end());
  r.outcome.applied = std::move(all);
  return r;
}

inline PipelineResult solve_hybrid(const ProblemInstance& problem, const KnowledgeBase& kb, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineConfig tp = cfg;
  const bool split = cfg.hybrid_budget == HybridBudget::Split;
  if (split) tp.limits.timeout_secs = cfg.limits.timeout_secs * cfg.budget_split;
  PipelineResult r = solve_tp(problem, kb, tp);
  r.mode = Mode::Hybrid;
  if (r.outcome.status != Status::Timeout) return r;

  const double remaining = split ? cfg.limits.timeout_secs - r.outcome.elapsed_secs() : cfg.limits.timeout_secs;
  if (!(remaining > 0)) return r;
  SearchLimits rest = cfg.limits;
  rest.timeout_secs = remaining;
  RunClock clock(cfg.limits.clock);
  SearchOutcome plain = search(problem, kb, cfg.method, cfg.strategy, rest, nullptr, clock);
  r.tp_steps = r.outcome.steps;
  plain.elapsed_us += r.outcome.elapsed_us;
  plain.steps += r.outcome.steps;
  r.outcome = std::move(plain);
  r.phase = "fallback";
  return r;
}

inline PipelineResult solve(const ProblemInstance& problem, const KnowledgeBase& kb, Mode mode,
                            const PipelineConfig& cfg) {
  switch (mode) {
    case Mode::Plain: return solve_plain(problem, kb, cfg);
    case Mode::TP: return solve_tp(problem, kb, cfg);
    case Mode::Hybrid: return solve_hybrid(problem, kb, cfg);
  }
  return solve_plain(problem, kb, cfg);
}

// Per-run record as structured text.
inline nlohmann::json run_record_json(const ProblemInstance& problem, const KnowledgeBase& kb, const PipelineResult& r) {
  nlohmann::json s_tp_names = nlohmann::json::array();
  for (int c : r.prediction.union_seq) s_tp_names.push_back(kb.has_code(c) ? kb.name_of(c) : std::to_string(c));
  nlohmann::json beams = nlohmann::json::array();
  for (const auto& b : r.prediction.beams) beams.push_back({{"seq", b.seq}, {"score", b.score}});
  nlohmann::json j{{"problem_id", problem.id},
                   {"mode", to_string(r.mode)},
                   {"predictor", r.predictor},
                   {"beams", beams},
                   {"S_tp", r.prediction.union_seq},
                   {"S_tp_names", s_tp_names},
                   {"applied", trace_json(r.outcome.applied)},
                   {"phase", r.phase},
                   {"status", to_string(r.outcome.status)},
                   {"steps", r.outcome.steps},
                   {"elapsed_ms", static_cast<double>(r.outcome.elapsed_us) / 1000.0},
                   {"prediction_ms", static_cast<double>(r.prediction_us) / 1000.0},
                   {"answer", r.outcome.answer ? nlohmann::json(r.outcome.answer->str()) : nlohmann::json(nullptr)}};
  if (!r.warning.empty()) j["warning"] = r.warning;
  return j;
}

}  // namespace fgeo
