#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fgeo/knowledge_base.hpp"
#include "fgeo/rational.hpp"
#include "fgeo/term.hpp"

namespace fgeo {

// Sorted (variable, exponent) pairs; exponents are positive. The empty
// monomial is the constant term.
using Monomial = std::vector<std::pair<std::string, int>>;

inline Monomial multiply(const Monomial& a, const Monomial& b) {
  Monomial out;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      out.push_back(b[j++]);
    } else {
      out.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

inline int degree(const Monomial& m) {
  int d = 0;
  for (const auto& [v, e] : m) d += e;
  return d;
}

template <typename Coeff>
class Polynomial {
 public:
  using Terms = std::map<Monomial, Coeff>;

  Polynomial() = default;
  static Polynomial constant(const Coeff& c) {
    Polynomial p;
    p.add_term({}, c);
    return p;
  }
  static Polynomial variable(const std::string& name) {
    Polynomial p;
    p.add_term({{name, 1}}, Coeff(1));
    return p;
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }
  Coeff constant_term() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? Coeff(0) : it->second;
  }

  int total_degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, fgeo::degree(m));
    return d;
  }
  int degree_in(const std::string& var) const {
    int d = 0;
    for (const auto& [m, c] : terms_) {
      for (const auto& [v, e] : m) {
        if (v == var) d = std::max(d, e);
      }
    }
    return d;
  }
  std::set<std::string> variables() const {
    std::set<std::string> out;
    for (const auto& [m, c] : terms_) {
      for (const auto& [v, e] : m) out.insert(v);
    }
    return out;
  }

  void add_term(const Monomial& m, const Coeff& c) {
    if (c == Coeff(0)) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second = it->second + c;
      if (it->second == Coeff(0)) terms_.erase(it);
    }
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    Polynomial out = a;
    for (const auto& [m, c] : b.terms_) out.add_term(m, c);
    return out;
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    Polynomial out = a;
    for (const auto& [m, c] : b.terms_) out.add_term(m, -c);
    return out;
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) out.add_term(multiply(ma, mb), ca * cb);
    }
    return out;
  }
  Polynomial scaled(const Coeff& k) const {
    Polynomial out;
    for (const auto& [m, c] : terms_) out.add_term(m, c * k);
    return out;
  }
  Polynomial pow(int n) const {
    Polynomial out = constant(Coeff(1));
    for (int i = 0; i < n; ++i) out = out * *this;
    return out;
  }

  // Scaled so the greatest monomial has coefficient 1; p and k*p normalise
  // to the same polynomial.
  Polynomial normalized() const {
    if (terms_.empty()) return *this;
    return scaled(Coeff(1) / terms_.rbegin()->second);
  }

  template <typename Values>
  auto substitute(const Values& values) const {
    using Out = typename Values::mapped_type;
    Polynomial<Out> out;
    for (const auto& [m, c] : terms_) {
      Out coeff = Out(c);
      Monomial rest;
      for (const auto& [v, e] : m) {
        auto it = values.find(v);
        if (it == values.end()) {
          rest.emplace_back(v, e);
        } else {
          for (int i = 0; i < e; ++i) coeff = coeff * it->second;
        }
      }
      out.add_term(rest, coeff);
    }
    return out;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      const auto& [m, c] = *it;
      std::string coeff = Coeff(c).str();
      if (!out.empty()) out += " + ";
      std::string mono;
      for (const auto& [v, e] : m) {
        if (!mono.empty()) mono += "*";
        mono += v;
        if (e > 1) mono += "^" + std::to_string(e);
      }
      if (mono.empty()) {
        out += coeff;
      } else if (c == Coeff(1)) {
        out += mono;
      } else {
        out += coeff + "*" + mono;
      }
    }
    return out;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;
  friend auto operator<=>(const Polynomial& a, const Polynomial& b) { return a.terms_ <=> b.terms_; }

 private:
  Terms terms_;
};

using RationalPolynomial = Polynomial<Rational>;
using RealPolynomial = Polynomial<Real>;

// Name of the measure variable for a measure term, after symmetry
// canonicalisation: "MeasureOfAngle(ABC)", "LengthOfLine(AB)", or a free
// variable's own name.
inline std::string measure_name(const Term& t, const KnowledgeBase& kb) {
  if (t.is_variable()) return t.head;
  return render_term(kb.canonical(t));
}

// numerator / denominator of an expression over measure variables.
struct RationalFunction {
  RationalPolynomial num;
  RationalPolynomial den;
};

inline RationalFunction to_rational_function(const Term& t, const KnowledgeBase& kb) {
  using P = RationalPolynomial;
  switch (t.kind) {
    case Term::Kind::Number:
      return {P::constant(t.value), P::constant(1)};
    case Term::Kind::Variable:
      return {P::variable(t.head), P::constant(1)};
    case Term::Kind::Entity:
      throw SchemaError("bare entity '" + t.points + "' in an algebraic expression");
    case Term::Kind::Predicate:
      break;
  }
  if (kb.is_measure(t.head)) return {P::variable(measure_name(t, kb)), P::constant(1)};
  auto arg = [&](std::size_t i) { return to_rational_function(t.args.at(i), kb); };
  if (t.head == "Add" || t.head == "Mul") {
    RationalFunction acc = arg(0);
    for (std::size_t i = 1; i < t.args.size(); ++i) {
      const RationalFunction r = arg(i);
      if (t.head == "Add") {
        acc = {acc.num * r.den + r.num * acc.den, acc.den * r.den};
      } else {
        acc = {acc.num * r.num, acc.den * r.den};
      }
    }
    return acc;
  }
  if (t.head == "Sub" && t.args.size() == 2) {
    const auto a = arg(0), b = arg(1);
    return {a.num * b.den - b.num * a.den, a.den * b.den};
  }
  if (t.head == "Div" && t.args.size() == 2) {
    const auto a = arg(0), b = arg(1);
    if (b.num.is_zero()) throw SchemaError("division by zero in '" + render_term(t) + "'");
    return {a.num * b.den, a.den * b.num};
  }
  if (t.head == "Pow" && t.args.size() == 2 && t.args[1].is_number() && t.args[1].value.is_integer() &&
      t.args[1].value.sign() >= 0) {
    const auto a = arg(0);
    const int n = static_cast<int>(t.args[1].value.num());
    return {a.num.pow(n), a.den.pow(n)};
  }
  throw SchemaError("'" + render_term(t) + "' is not a supported algebraic expression");
}

// Equal(l, r) as the polynomial l.num*r.den - r.num*l.den.
inline RationalPolynomial equation_polynomial(const Term& equal, const KnowledgeBase& kb) {
  if (!equal.is_predicate("Equal") || equal.args.size() != 2) throw SchemaError("expected Equal(lhs,rhs)");
  const auto l = to_rational_function(equal.args[0], kb);
  const auto r = to_rational_function(equal.args[1], kb);
  return l.num * r.den - r.num * l.den;
}

inline void collect_measures(const Term& t, const KnowledgeBase& kb, std::vector<Term>& out) {
  if (t.is_variable() || (t.is_predicate() && kb.is_measure(t.head))) {
    out.push_back(t.is_variable() ? t : kb.canonical(t));
    return;
  }
  for (const auto& a : t.args) collect_measures(a, kb, out);
}

// Evaluates an expression (including Sqrt over rationals) under solved
// values. nullopt if some measure is unknown or the value is not exactly
// representable.
template <typename Values>
std::optional<Real> evaluate(const Term& t, const KnowledgeBase& kb, const Values& solved) {
  try {
    switch (t.kind) {
      case Term::Kind::Number:
        return Real(t.value);
      case Term::Kind::Variable: {
        auto it = solved.find(t.head);
        if (it == solved.end()) return std::nullopt;
        return it->second;
      }
      case Term::Kind::Entity:
        return std::nullopt;
      case Term::Kind::Predicate:
        break;
    }
    if (kb.is_measure(t.head)) {
      auto it = solved.find(measure_name(t, kb));
      if (it == solved.end()) return std::nullopt;
      return it->second;
    }
    std::vector<Real> vals;
    for (const auto& a : t.args) {
      auto v = evaluate(a, kb, solved);
      if (!v) return std::nullopt;
      vals.push_back(*v);
    }
    if (t.head == "Add") {
      Real acc;
      for (const auto& v : vals) acc += v;
      return acc;
    }
    if (t.head == "Mul") {
      Real acc(1);
      for (const auto& v : vals) acc *= v;
      return acc;
    }
    if (t.head == "Sub" && vals.size() == 2) return vals[0] - vals[1];
    if (t.head == "Div" && vals.size() == 2) return vals[0] / vals[1];
    if (t.head == "Pow" && vals.size() == 2 && vals[1].is_rational() && vals[1].rational_part().is_integer() &&
        vals[1].rational_part().sign() >= 0) {
      Real acc(1);
      for (std::int64_t i = 0; i < vals[1].rational_part().num(); ++i) acc *= vals[0];
      return acc;
    }
    if (t.head == "Sqrt" && vals.size() == 1 && vals[0].is_rational()) return Real::sqrt(vals[0].rational_part());
    return std::nullopt;
  } catch (const NotRepresentable&) {
    return std::nullopt;
  }
}

}  // namespace fgeo
