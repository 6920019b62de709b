#pragma once

// Forward and backward theorem search.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgeo/clock.hpp"
#include "fgeo/condition_set.hpp"
#include "fgeo/frontier.hpp"
#include "fgeo/knowledge_base.hpp"
#include "fgeo/matcher.hpp"
#include "fgeo/problem.hpp"

namespace fgeo {

enum class Method { Forward, Backward };
enum class Status { Solved, Unsolved, Timeout };

inline std::string to_string(Method m) { return m == Method::Forward ? "fw" : "bw"; }
inline std::string to_string(Status s) {
  switch (s) {
    case Status::Solved: return "solved";
    case Status::Unsolved: return "unsolved";
    case Status::Timeout: return "timeout";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "fw") return Method::Forward;
  if (s == "bw") return Method::Backward;
  throw SchemaError("unknown method '" + s + "'");
}

inline Status parse_status(const std::string& s) {
  if (s == "solved") return Status::Solved;
  if (s == "unsolved") return Status::Unsolved;
  if (s == "timeout") return Status::Timeout;
  throw SchemaError("unknown status '" + s + "'");
}

struct SearchLimits {
  std::size_t max_depth = 15;
  std::size_t beam_size = 20;
  double timeout_secs = 600;
  std::uint64_t rng_seed = 0;
  ClockKind clock = ClockKind::Wall;

  void validate() const {
    if (max_depth < 1) throw SchemaError("max_depth must be at least 1");
    if (beam_size < 1) throw SchemaError("beam_size must be at least 1");
    if (!(timeout_secs > 0)) throw SchemaError("timeout must be positive");
  }
};

struct AppliedStep {
  int code = 0;
  std::string theorem;
  Binding binding;
  std::vector<std::string> added;  // rendered new facts / equations
};

struct SearchOutcome {
  Status status = Status::Unsolved;
  std::optional<Answer> answer;
  std::vector<AppliedStep> applied;
  std::size_t steps = 0;
  std::int64_t elapsed_us = 0;

  std::vector<int> applied_sequence() const {
    std::vector<int> out;
    for (const auto& s : applied) out.push_back(s.code);
    return out;
  }
  double elapsed_secs() const { return static_cast<double>(elapsed_us) / 1e6; }
};

struct RawOutcome {
  bool goal_reached = false;
  bool clock_exceeded = false;
  bool frontier_exhausted = false;
};

inline Status classify_outcome(const RawOutcome& raw) {
  if (raw.goal_reached) return Status::Solved;
  if (raw.clock_exceeded) return Status::Timeout;
  return Status::Unsolved;
}

// Ordered derivation as structured text.
inline nlohmann::json trace_json(const std::vector<AppliedStep>& steps) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out.push_back({{"step", i + 1},
                   {"theorem", steps[i].theorem},
                   {"code", steps[i].code},
                   {"binding", binding_str(steps[i].binding)},
                   {"new", steps[i].added}});
  }
  return out;
}

namespace detail {

inline std::vector<std::string> rendered(const std::vector<Term>& items, const KnowledgeBase& kb) {
  std::vector<std::string> out;
  for (const auto& t : items) {
    if (t.is_predicate("Equal")) {
      out.push_back(equation_polynomial(t, kb).normalized().str() + " = 0");
    } else {
      out.push_back(render_term(kb.canonical(t)));
    }
  }
  return out;
}

// Applies (th, b) to a copy and solves. nullopt if nothing new or the system
// became inconsistent.
inline std::optional<ConditionSet> try_apply(const ConditionSet& cs, const Theorem& th, const Binding& b,
                                             AppliedStep& step) {
  ConditionSet next = cs;
  const auto added = apply_theorem(next, th, b);
  if (added.empty()) return std::nullopt;
  try {
    next.solve_equations();
  } catch (const InconsistentSystem&) {
    return std::nullopt;
  }
  step.code = th.code;
  step.theorem = th.name;
  step.binding = b;
  step.added = rendered(added, cs.kb());
  return next;
}

inline SearchOutcome finish(SearchOutcome out, RawOutcome raw, const RunClock& clock, std::optional<Answer> answer) {
  out.status = classify_outcome(raw);
  if (out.status == Status::Solved) out.answer = std::move(answer);
  out.elapsed_us = clock.elapsed_us();
  return out;
}

inline ConditionSet initial_state(const ProblemInstance& problem, const KnowledgeBase& kb, const ConditionSet* initial) {
  return initial ? *initial : ConditionSet::from_problem(problem, kb);
}

}  // namespace detail

// Forward search; `clock` is shared with callers that account for work done
// before the search (the predictor pipeline).
inline SearchOutcome forward_search(const ProblemInstance& problem, const KnowledgeBase& kb, Strategy strategy,
                                    const SearchLimits& limits, const ConditionSet* initial, RunClock& clock) {
  limits.validate();
  SearchOutcome out;
  struct Node {
    ConditionSet cs;
    std::vector<AppliedStep> path;
  };
  struct Entry {
    std::shared_ptr<const Node> parent;
    std::size_t theorem;
    Binding binding;
    std::size_t depth;
  };

  std::shared_ptr<const Node> root;
  try {
    root = std::make_shared<const Node>(Node{detail::initial_state(problem, kb, initial), {}});
  } catch (const InconsistentSystem&) {
    return detail::finish(out, {false, false, true}, clock, std::nullopt);
  }
  if (auto g = root->cs.check_goal(problem.goal); g.solved) {
    return detail::finish(out, {true, false, false}, clock, g.answer);
  }

  const auto& theorems = kb.theorems;
  Frontier<Entry> frontier(strategy, limits.beam_size, limits.rng_seed);
  auto push_children = [&](const std::shared_ptr<const Node>& node, std::size_t depth) {
    clock.charge(static_cast<std::int64_t>(theorems.size()));
    for (std::size_t i = 0; i < theorems.size(); ++i) {
      for (auto& b : match_premise(node->cs, theorems[i])) {
        if (is_informative(node->cs, theorems[i], b)) frontier.push(Entry{node, i, std::move(b), depth}, depth);
      }
    }
  };
  std::map<std::string, std::size_t> visited{{root->cs.fingerprint(), 0}};
  push_children(root, 1);

  while (!frontier.empty()) {
    if (clock.exceeded(limits.timeout_secs)) return detail::finish(out, {false, true, false}, clock, std::nullopt);
    Entry e = frontier.pop();
    ++out.steps;
    clock.charge();

    AppliedStep step;
    auto next = detail::try_apply(e.parent->cs, theorems[e.theorem], e.binding, step);
    if (!next) continue;
    const std::string fp = next->fingerprint();
    auto seen = visited.find(fp);
    if (seen != visited.end() && seen->second <= e.depth) continue;
    visited[fp] = e.depth;

    auto path = e.parent->path;
    path.push_back(std::move(step));
    auto node = std::make_shared<const Node>(Node{std::move(*next), std::move(path)});
    if (auto g = node->cs.check_goal(problem.goal); g.solved) {
      out.applied = node->path;
      return detail::finish(out, {true, false, false}, clock, g.answer);
    }
    if (e.depth < limits.max_depth) push_children(node, e.depth + 1);
  }
  return detail::finish(out, {false, false, true}, clock, std::nullopt);
}

inline SearchOutcome forward_search(const ProblemInstance& problem, const KnowledgeBase& kb, Strategy strategy,
                                    const SearchLimits& limits, const ConditionSet* initial = nullptr) {
  RunClock clock(limits.clock);
  return forward_search(problem, kb, strategy, limits, initial, clock);
}

struct ReplayResult {
  bool valid = false;  // every step's premise held when it was applied
  GoalCheck check;
  ConditionSet cs;
};

// Re-applies recorded (theorem, binding) steps in order on a fresh state.
inline ReplayResult replay(const ProblemInstance& problem, const KnowledgeBase& kb,
                           const std::vector<AppliedStep>& steps, const ConditionSet* initial = nullptr) {
  ReplayResult r{false, {}, detail::initial_state(problem, kb, initial)};
  try {
    for (const auto& s : steps) {
      const Theorem& th = kb.theorem(s.code);
      if (!premise_holds(r.cs, th, s.binding)) return r;
      apply_theorem(r.cs, th, s.binding);
      r.cs.solve_equations();
    }
  } catch (const InconsistentSystem&) {
    return r;
  }
  r.valid = true;
  r.check = r.cs.check_goal(problem.goal);
  return r;
}

// Re-applies a bare code sequence, each theorem with all of its current matches.
inline GoalCheck replay_codes(const ProblemInstance& problem, const KnowledgeBase& kb, const std::vector<int>& codes,
                              const ConditionSet* initial = nullptr) {
  ConditionSet cs = detail::initial_state(problem, kb, initial);
  for (int code : codes) {
    const Theorem& th = kb.theorem(code);
    for (const auto& b : match_premise(cs, th)) apply_theorem(cs, th, b);
    cs.solve_equations();
  }
  return cs.check_goal(problem.goal);
}

namespace detail {

// Greedy removal of steps that the goal does not need, checked by replay.
inline std::vector<AppliedStep> minimize_steps(const ProblemInstance& problem, const KnowledgeBase& kb,
                                               std::vector<AppliedStep> steps, const ConditionSet* initial) {
  for (std::size_t i = steps.size(); i-- > 0;) {
    auto trial = steps;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
    const auto r = replay(problem, kb, trial, initial);
    if (r.valid && r.check.solved) steps = std::move(trial);
  }
  return steps;
}

inline void measure_patterns(const Term& t, const KnowledgeBase& kb, std::vector<const Term*>& out) {
  if (t.is_predicate() && kb.is_measure(t.head)) {
    out.push_back(&t);
    return;
  }
  for (const auto& a : t.args) measure_patterns(a, kb, out);
}

class BackwardSearch {
 public:
  BackwardSearch(const ProblemInstance& problem, const KnowledgeBase& kb, Strategy strategy,
                 const SearchLimits& limits, ConditionSet cs, RunClock& clock)
      : problem_(problem),
        kb_(kb),
        limits_(limits),
        cs_(std::move(cs)),
        clock_(clock),
        frontier_(strategy, limits.beam_size, limits.rng_seed) {
    for (const auto& th : kb_.theorems) {
      for (const auto& f : th.conclusion_facts) derivable_.insert(f.head);
    }
  }

  SearchOutcome run(const ConditionSet* initial) {
    SearchOutcome out;
    if (auto g = cs_.check_goal(problem_.goal); g.solved) return finish(out, {true, false, false}, clock_, g.answer);
    seed_root();
    while (!frontier_.empty()) {
      if (clock_.exceeded(limits_.timeout_secs)) return finish(out, {false, true, false}, clock_, std::nullopt);
      const std::size_t gi = frontier_.pop();
      const Goal& g = goals_[gi];
      if (closed(g)) continue;
      auto memo = expanded_.find(g.key);
      if (memo != expanded_.end() && memo->second <= g.depth) continue;
      if (g.depth >= limits_.max_depth) continue;
      expanded_[g.key] = g.depth;
      ++out.steps;
      clock_.charge(static_cast<std::int64_t>(kb_.theorems.size()));
      expand(gi);
      if (auto c = cs_.check_goal(problem_.goal); c.solved) {
        out.applied = minimize_steps(problem_, kb_, applied_, initial);
        const auto r = replay(problem_, kb_, out.applied, initial);
        return finish(out, {true, false, false}, clock_, r.check.answer);
      }
    }
    return finish(out, {false, false, true}, clock_, std::nullopt);
  }

 private:
  struct Goal {
    bool value = false;
    Term term;        // fact, or measure term / free variable for value goals
    std::string var;  // value goals
    std::string key;
    std::size_t depth = 0;
    int parent = -1;
  };
  struct TheoremNode {
    std::size_t theorem;
    Binding binding;
    std::size_t goal;
    bool done = false;
  };

  bool closed(const Goal& g) const { return g.value ? cs_.value_of(g.var).has_value() : cs_.has_fact(g.term); }

  bool on_path(const std::string& key, int from) const {
    for (int i = from; i >= 0; i = goals_[static_cast<std::size_t>(i)].parent) {
      if (goals_[static_cast<std::size_t>(i)].key == key) return true;
    }
    return false;
  }

  void add_value_goal(const std::string& var, int parent, std::size_t depth) {
    if (cs_.value_of(var)) return;
    Goal g;
    g.value = true;
    g.var = var;
    g.term = parse_term(var);
    g.key = "V:" + var;
    add_goal(std::move(g), parent, depth);
  }

  void add_fact_goal(const Term& fact, int parent, std::size_t depth) {
    if (cs_.has_fact(fact)) return;
    Goal g;
    g.term = kb_.canonical(fact);
    g.key = "F:" + render_term(g.term);
    add_goal(std::move(g), parent, depth);
  }

  void add_goal(Goal g, int parent, std::size_t depth) {
    if (on_path(g.key, parent)) return;
    g.parent = parent;
    g.depth = depth;
    goals_.push_back(std::move(g));
    frontier_.push(goals_.size() - 1, depth);
  }

  void seed_root() {
    const auto& goal = problem_.goal;
    if (goal.is_value() || goal.target.is_predicate("Equal")) {
      std::vector<Term> ms;
      collect_measures(goal.target, kb_, ms);
      for (const auto& m : ms) add_value_goal(measure_name(m, kb_), -1, 0);
    } else {
      add_fact_goal(goal.target, -1, 0);
    }
  }

  std::vector<std::string> unsolved_vars(const Term& equation) const {
    std::vector<std::string> out;
    try {
      for (const auto& v : equation_polynomial(equation, kb_).substitute(cs_.solved_values()).variables()) {
        out.push_back(v);
      }
    } catch (const NotRepresentable&) {
    }
    return out;
  }

  // Partial bindings making some conclusion of `th` match the goal.
  std::vector<Binding> conclusion_unifiers(const Theorem& th, const Goal& g) const {
    std::vector<Binding> out;
    std::vector<Term> targets;
    if (!g.value) {
      targets = kb_.variants(g.term);
    } else if (g.term.is_predicate()) {
      targets = kb_.variants(g.term);
    } else {
      return out;
    }
    auto try_pattern = [&](const Term& pattern) {
      for (const auto& t : targets) {
        Binding b;
        std::set<char> used;
        std::vector<char> newly;
        if (unify_fact(pattern, t, b, used, newly)) out.push_back(b);
      }
    };
    if (!g.value) {
      for (const auto& f : th.conclusion_facts) {
        if (f.head == g.term.head) try_pattern(f);
      }
    } else {
      for (const auto& e : th.conclusion_equations) {
        std::vector<const Term*> ms;
        measure_patterns(e, kb_, ms);
        for (const auto* m : ms) {
          if (m->head == g.term.head) try_pattern(*m);
        }
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Injective completions of `partial` over the problem's points.
  std::vector<Binding> completions(const Theorem& th, const Binding& partial) const {
    std::vector<char> free;
    for (char v : th.variables) {
      if (!partial.count(v)) free.push_back(v);
    }
    std::vector<Binding> out;
    Binding b = partial;
    std::set<char> used;
    for (const auto& [v, p] : b) used.insert(p);
    const std::vector<char> points(cs_.points().begin(), cs_.points().end());
    auto rec = [&](auto& self, std::size_t i) -> void {
      if (i == free.size()) {
        out.push_back(b);
        return;
      }
      for (char p : points) {
        if (used.count(p)) continue;
        b[free[i]] = p;
        used.insert(p);
        self(self, i + 1);
        used.erase(p);
        b.erase(free[i]);
      }
    };
    rec(rec, 0);
    return out;
  }

  bool apply_now(std::size_t theorem, const Binding& b, std::size_t goal_index) {
    const Theorem& th = kb_.theorems[theorem];
    if (!premise_holds(cs_, th, b) || !is_informative(cs_, th, b)) return false;
    clock_.charge();
    AppliedStep step;
    auto next = try_apply(cs_, th, b, step);
    if (!next) return false;
    cs_ = std::move(*next);
    applied_.push_back(std::move(step));
    const Goal& g = goals_[goal_index];
    if (g.value && !closed(g)) {
      const std::size_t depth = g.depth + 1;
      for (const auto& e : th.conclusion_equations) {
        for (const auto& v : unsolved_vars(instantiate(e, b))) {
          if (v != g.var) add_value_goal(v, static_cast<int>(goal_index), depth);
        }
      }
    }
    return true;
  }

  // Applies pending theorem nodes whose premises now hold, to a fixpoint.
  void propagate() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].done) continue;
        const Theorem& th = kb_.theorems[nodes_[i].theorem];
        if (!premise_holds(cs_, th, nodes_[i].binding)) continue;
        nodes_[i].done = true;
        if (apply_now(nodes_[i].theorem, nodes_[i].binding, nodes_[i].goal)) changed = true;
      }
    }
  }

  void expand(std::size_t gi) {
    const Goal g = goals_[gi];
    const int parent = static_cast<int>(gi);
    const std::size_t depth = g.depth + 1;
    const auto& theorems = kb_.theorems;
    bool any_applied = false;

    for (std::size_t ti = 0; ti < theorems.size(); ++ti) {
      const Theorem& th = theorems[ti];
      for (const auto& partial : conclusion_unifiers(th, g)) {
        for (const auto& b : completions(th, partial)) {
          const std::string key = application_key(cs_, th, b);
          if (!seen_applications_.insert(key).second) continue;
          std::vector<Term> missing;
          bool viable = true;
          for (const auto& f : th.premise_facts) {
            const Term fact = instantiate(f, b);
            if (cs_.has_fact(fact)) continue;
            if (!derivable_.count(fact.head)) {
              viable = false;
              break;
            }
            missing.push_back(fact);
          }
          if (!viable) continue;
          std::vector<std::string> unknown;
          for (const auto& e : th.premise_equations) {
            const Term eq = instantiate(e, b);
            if (cs_.knows_equation(equation_polynomial(eq, kb_))) continue;
            const auto vars = unsolved_vars(eq);
            if (vars.empty()) {
              viable = false;
              break;
            }
            unknown.insert(unknown.end(), vars.begin(), vars.end());
          }
          if (!viable || !is_informative(cs_, th, b)) continue;
          if (missing.empty() && unknown.empty()) {
            if (apply_now(ti, b, gi)) any_applied = true;
            continue;
          }
          nodes_.push_back(TheoremNode{ti, b, gi});
          for (const auto& f : missing) add_fact_goal(f, parent, depth);
          for (const auto& v : unknown) add_value_goal(v, parent, depth);
        }
      }
    }

    if (g.value) {
      // Algebraic decomposition: the other unknowns of equations mentioning g.
      for (const auto& eq : cs_.equations()) {
        if (!eq.variables().count(g.var)) continue;
        RealPolynomial r;
        try {
          r = eq.substitute(cs_.solved_values());
        } catch (const NotRepresentable&) {
          continue;
        }
        for (const auto& v : r.variables()) {
          if (v != g.var) add_value_goal(v, parent, depth);
        }
      }
    }
    if (any_applied) propagate();
  }

  const ProblemInstance& problem_;
  const KnowledgeBase& kb_;
  SearchLimits limits_;
  ConditionSet cs_;
  RunClock& clock_;
  Frontier<std::size_t> frontier_;
  std::set<std::string> derivable_;
  std::vector<Goal> goals_;
  std::vector<TheoremNode> nodes_;
  std::map<std::string, std::size_t> expanded_;
  std::set<std::string> seen_applications_;
  std::vector<AppliedStep> applied_;
};

}  // namespace detail

inline SearchOutcome backward_search(const ProblemInstance& problem, const KnowledgeBase& kb, Strategy strategy,
                                     const SearchLimits& limits, const ConditionSet* initial, RunClock& clock) {
  limits.validate();
  std::optional<ConditionSet> cs;
  try {
    cs = detail::initial_state(problem, kb, initial);
  } catch (const InconsistentSystem&) {
    return detail::finish({}, {false, false, true}, clock, std::nullopt);
  }
  detail::BackwardSearch search(problem, kb, strategy, limits, std::move(*cs), clock);
  return search.run(initial);
}

inline SearchOutcome backward_search(const ProblemInstance& problem, const KnowledgeBase& kb, Strategy strategy,
                                     const SearchLimits& limits, const ConditionSet* initial = nullptr) {
  RunClock clock(limits.clock);
  return backward_search(problem, kb, strategy, limits, initial, clock);
}

inline SearchOutcome search(const ProblemInstance& problem, const KnowledgeBase& kb, Method method, Strategy strategy,
                            const SearchLimits& limits, const ConditionSet* initial, RunClock& clock) {
  return method == Method::Forward ? forward_search(problem, kb, strategy, limits, initial, clock)
                                   : backward_search(problem, kb, strategy, limits, initial, clock);
}

}  // namespace fgeo
