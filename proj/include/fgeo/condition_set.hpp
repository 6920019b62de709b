#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fgeo/knowledge_base.hpp"
#include "fgeo/polynomial.hpp"
#include "fgeo/problem.hpp"
#include "fgeo/term.hpp"

namespace fgeo {

// Why a fact or equation is in the condition set. code 0 marks a given
// condition.
struct Provenance {
  int code = 0;
  std::string theorem;
  std::string binding;
  std::vector<std::string> premises;
};

struct Answer {
  std::optional<Real> value;      // Value goals
  std::string fact;               // Relation goals: the proving fact (canonical)
  std::vector<std::string> chain; // provenance chain for relation goals, root first

  std::string str() const { return value ? value->str() : fact; }
};

struct GoalCheck {
  bool solved = false;
  Answer answer;
};

// The monotone store of facts and equations for one problem.
class ConditionSet {
 public:
  explicit ConditionSet(const KnowledgeBase& kb) : kb_(&kb) {}

  // Conditions of `problem` as given facts, then one solve pass.
  static ConditionSet from_problem(const ProblemInstance& problem, const KnowledgeBase& kb) {
    ConditionSet cs(kb);
    for (const auto& t : problem.all_conditions()) cs.add_fact(t);
    cs.solve_equations();
    return cs;
  }

  const KnowledgeBase& kb() const { return *kb_; }

  // Inserts a ground fact (canonicalised) or routes an Equal(...) to the
  // equation store. Returns false when it was already present.
  bool add_fact(const Term& fact, Provenance prov = {}) {
    if (!is_ground(fact)) throw NonGroundFact(render_term(fact));
    if (fact.is_predicate("Equal")) {
      RationalPolynomial p = equation_polynomial(fact, *kb_).normalized();
      if (p.is_zero()) return false;
      for (const auto& v : p.variables()) note_points(v);
      std::string key = p.str();
      if (!equations_.insert(p).second) return false;
      provenance_.emplace(std::move(key), std::move(prov));
      return true;
    }
    if (!fact.is_predicate()) throw SchemaError("fact must be a predicate: " + render_term(fact));
    const auto* schema = kb_->schema(fact.head);
    if (!schema || schema->measure) throw SchemaError("'" + fact.head + "' is not a declared relation");
    Term c = kb_->canonical(fact);
    std::string key = render_term(c);
    note_points(key);
    if (!facts_[c.head].insert(std::move(c)).second) return false;
    provenance_.emplace(std::move(key), std::move(prov));
    return true;
  }

  bool has_fact(const Term& fact) const {
    const Term c = kb_->canonical(fact);
    auto it = facts_.find(c.head);
    return it != facts_.end() && it->second.count(c) != 0;
  }

  bool has_equation(const RationalPolynomial& p) const { return equations_.count(p.normalized()) != 0; }

  // Present literally, or already an identity under the solved values.
  bool knows_equation(const RationalPolynomial& p) const {
    if (p.is_zero() || has_equation(p)) return true;
    try {
      return p.substitute(solved_).is_zero();
    } catch (const NotRepresentable&) {
      return false;
    }
  }

  const std::set<Term>& facts_with_head(const std::string& head) const {
    static const std::set<Term> none;
    auto it = facts_.find(head);
    return it == facts_.end() ? none : it->second;
  }
  std::vector<Term> facts() const {
    std::vector<Term> out;
    for (const auto& [h, set] : facts_) out.insert(out.end(), set.begin(), set.end());
    return out;
  }
  std::size_t fact_count() const {
    std::size_t n = 0;
    for (const auto& [h, set] : facts_) n += set.size();
    return n;
  }
  const std::set<RationalPolynomial>& equations() const { return equations_; }
  const std::map<std::string, Real>& solved_values() const { return solved_; }
  const std::map<std::string, Provenance>& provenance() const { return provenance_; }
  const std::set<char>& points() const { return points_; }

  std::optional<Real> value_of(const std::string& var) const {
    auto it = solved_.find(var);
    if (it == solved_.end()) return std::nullopt;
    return it->second;
  }

  // Structural identity of the state (solved values follow from equations).
  std::string fingerprint() const {
    std::string out;
    for (const auto& [h, set] : facts_) {
      for (const auto& f : set) {
        render_into(f, out);
        out += ';';
      }
    }
    out += '|';
    for (const auto& e : equations_) {
      out += e.str();
      out += ';';
    }
    return out;
  }

  // Exact solving: Gauss-Jordan on the linear part over Q(sqrt k), then
  // single-unknown isolation for nonlinear equations. Repeats until nothing
  // new is solved. Returns the number of newly solved variables.
  std::size_t solve_equations() {
    std::size_t fresh = 0;
    while (true) {
      std::vector<RealPolynomial> reduced;
      for (const auto& eq : equations_) {
        RealPolynomial r;
        try {
          r = eq.substitute(solved_);
        } catch (const NotRepresentable&) {
          continue;
        }
        if (r.is_zero()) continue;
        if (r.is_constant()) throw InconsistentSystem("derived " + r.str() + " = 0 from " + eq.str() + " = 0");
        reduced.push_back(std::move(r));
      }
      std::size_t added = solve_linear(reduced);
      if (added == 0) added = isolate_single_unknowns(reduced);
      if (added == 0) break;
      fresh += added;
    }
    return fresh;
  }

  GoalCheck check_goal(const Goal& goal) const {
    GoalCheck out;
    if (goal.is_value()) {
      if (auto v = evaluate(goal.target, *kb_, solved_)) {
        out.solved = true;
        out.answer.value = *v;
      }
      return out;
    }
    if (goal.target.is_predicate("Equal")) {
      const auto p = equation_polynomial(goal.target, *kb_);
      if (knows_equation(p)) {
        out.solved = true;
        out.answer.fact = render_term(kb_->canonical(goal.target));
      }
      return out;
    }
    if (has_fact(goal.target)) {
      out.solved = true;
      out.answer.fact = render_term(kb_->canonical(goal.target));
      out.answer.chain = provenance_chain(out.answer.fact);
    }
    return out;
  }

  // Derivation lines for `key`, premises before the item they support.
  std::vector<std::string> provenance_chain(const std::string& key) const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    chain_into(key, out, seen);
    return out;
  }

  friend bool operator==(const ConditionSet& a, const ConditionSet& b) {
    return a.facts_ == b.facts_ && a.equations_ == b.equations_ && a.solved_ == b.solved_;
  }

 private:
  void chain_into(const std::string& key, std::vector<std::string>& out, std::set<std::string>& seen) const {
    if (!seen.insert(key).second) return;
    auto it = provenance_.find(key);
    if (it == provenance_.end()) return;
    for (const auto& p : it->second.premises) chain_into(p, out, seen);
    if (it->second.code == 0) {
      out.push_back(key + "  [given]");
    } else {
      out.push_back(key + "  [" + it->second.theorem + " " + it->second.binding + "]");
    }
  }

  void note_points(const std::string& rendered) {
    // Entity tokens are the only uppercase runs not followed by '('.
    for (std::size_t i = 0; i < rendered.size();) {
      if (rendered[i] >= 'A' && rendered[i] <= 'Z') {
        std::size_t j = i;
        bool lower = false;
        while (j < rendered.size() && std::isalnum(static_cast<unsigned char>(rendered[j]))) {
          lower = lower || !(rendered[j] >= 'A' && rendered[j] <= 'Z');
          ++j;
        }
        if (!lower && (j == rendered.size() || rendered[j] != '(')) {
          for (std::size_t k = i; k < j; ++k) points_.insert(rendered[k]);
        }
        i = j;
      } else {
        ++i;
      }
    }
  }

  bool record(const std::string& var, const Real& value) {
    return solved_.emplace(var, value).second;
  }

  std::size_t solve_linear(const std::vector<RealPolynomial>& reduced) {
    std::vector<const RealPolynomial*> linear;
    for (const auto& r : reduced) {
      if (r.total_degree() == 1) linear.push_back(&r);
    }
    if (linear.empty()) return 0;
    try {
      return eliminate(linear);
    } catch (const NotRepresentable&) {
      std::vector<const RealPolynomial*> rational;
      for (const auto* r : linear) {
        bool ok = true;
        for (const auto& [m, c] : r->terms()) ok = ok && c.is_rational();
        if (ok) rational.push_back(r);
      }
      try {
        return eliminate(rational);
      } catch (const NotRepresentable&) {
        return 0;
      }
    }
  }

  std::size_t eliminate(const std::vector<const RealPolynomial*>& rows_in) {
    std::set<std::string> var_set;
    for (const auto* r : rows_in) {
      for (const auto& v : r->variables()) var_set.insert(v);
    }
    const std::vector<std::string> vars(var_set.begin(), var_set.end());
    const std::size_t n = vars.size();
    std::vector<std::vector<Real>> rows;
    for (const auto* r : rows_in) {
      std::vector<Real> row(n + 1);
      for (const auto& [m, c] : r->terms()) {
        if (m.empty()) {
          row[n] = c;
        } else {
          const auto idx = static_cast<std::size_t>(
              std::lower_bound(vars.begin(), vars.end(), m.front().first) - vars.begin());
          row[idx] = c;
        }
      }
      rows.push_back(std::move(row));
    }
    std::size_t rank = 0;
    for (std::size_t col = 0; col < n && rank < rows.size(); ++col) {
      std::size_t pivot = rank;
      while (pivot < rows.size() && rows[pivot][col].is_zero()) ++pivot;
      if (pivot == rows.size()) continue;
      std::swap(rows[rank], rows[pivot]);
      const Real inv = Real(1) / rows[rank][col];
      for (auto& x : rows[rank]) x = x * inv;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i == rank || rows[i][col].is_zero()) continue;
        const Real f = rows[i][col];
        for (std::size_t j = 0; j <= n; ++j) rows[i][j] -= f * rows[rank][j];
      }
      ++rank;
    }
    std::size_t added = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::size_t nonzero = 0, at = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!rows[i][j].is_zero()) {
          ++nonzero;
          at = j;
        }
      }
      if (nonzero == 0 && !rows[i][n].is_zero()) throw InconsistentSystem("linear system reduces to a nonzero constant");
      if (nonzero == 1 && record(vars[at], -rows[i][n])) ++added;
    }
    return added;
  }

  // Nonlinear equations with exactly one unknown: quadratics and pure powers
  // with rational coefficients, keeping the unique positive root.
  std::size_t isolate_single_unknowns(const std::vector<RealPolynomial>& reduced) {
    for (const auto& r : reduced) {
      const auto vars = r.variables();
      if (vars.size() != 1 || r.total_degree() < 2) continue;
      const std::string& x = *vars.begin();
      std::map<int, Rational> coeff;
      bool rational = true;
      for (const auto& [m, c] : r.terms()) {
        if (!c.is_rational()) rational = false;
        coeff[m.empty() ? 0 : m.front().second] = c.rational_part();
      }
      if (!rational) continue;
      try {
        if (auto root = positive_root(coeff)) {
          if (record(x, *root)) return 1;
        }
      } catch (const NotRepresentable&) {
      }
    }
    return 0;
  }

  static std::optional<Real> positive_root(const std::map<int, Rational>& coeff) {
    const int deg = coeff.rbegin()->first;
    auto get = [&](int d) {
      auto it = coeff.find(d);
      return it == coeff.end() ? Rational(0) : it->second;
    };
    if (deg == 2) {
      const Rational a = get(2), b = get(1), c = get(0);
      const Rational disc = b * b - Rational(4) * a * c;
      if (disc.sign() < 0) return std::nullopt;
      const Real root = Real::sqrt(disc);
      const Real two_a(Rational(2) * a);
      const Real r1 = (Real(-b) + root) / two_a;
      const Real r2 = (Real(-b) - root) / two_a;
      const bool p1 = r1.sign() > 0, p2 = r2.sign() > 0;
      if (p1 && p2 && !(r1 == r2)) return std::nullopt;
      if (p1) return r1;
      if (p2) return r2;
      return std::nullopt;
    }
    // a x^n + c = 0
    if (coeff.size() > 2 || (coeff.size() == 2 && coeff.begin()->first != 0)) return std::nullopt;
    const Rational target = -get(0) / get(deg);
    if (target.sign() <= 0) return std::nullopt;
    auto nth_root = [deg](std::int64_t v) -> std::optional<std::int64_t> {
      const auto guess = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(v), 1.0 / deg)));
      for (std::int64_t g = std::max<std::int64_t>(guess - 1, 0); g <= guess + 1; ++g) {
        __int128 p = 1;
        for (int i = 0; i < deg && p <= v; ++i) p *= g;
        if (p == v) return g;
      }
      return std::nullopt;
    };
    auto n = nth_root(target.num());
    auto d = nth_root(target.den());
    if (!n || !d) return std::nullopt;
    return Real(Rational(*n, *d));
  }

  const KnowledgeBase* kb_;
  std::map<std::string, std::set<Term>> facts_;
  std::set<RationalPolynomial> equations_;
  std::map<std::string, Real> solved_;
  std::map<std::string, Provenance> provenance_;
  std::set<char> points_;
};

}  // namespace fgeo
