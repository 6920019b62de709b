#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "fgeo/rational.hpp"

namespace fgeo {

// A CDL expression. Predicates carry a head and arguments; entities are
// ordered point lists ("AD" is [A, D]); numbers are exact rationals; variables
// are lowercase symbols. Inside theorem patterns an entity's points may be
// lowercase letters, which are pattern variables ranging over points.
struct Term {
  enum class Kind { Predicate, Entity, Number, Variable };

  Kind kind = Kind::Number;
  std::string head;    // predicate name or variable name
  std::string points;  // entity point labels
  Rational value;      // number value
  std::vector<Term> args;

  static Term predicate(std::string head, std::vector<Term> args) {
    Term t;
    t.kind = Kind::Predicate;
    t.head = std::move(head);
    t.args = std::move(args);
    return t;
  }
  static Term entity(std::string points) {
    Term t;
    t.kind = Kind::Entity;
    t.points = std::move(points);
    return t;
  }
  static Term number(Rational v) {
    Term t;
    t.kind = Kind::Number;
    t.value = v;
    return t;
  }
  static Term variable(std::string name) {
    Term t;
    t.kind = Kind::Variable;
    t.head = std::move(name);
    return t;
  }

  bool is_predicate() const { return kind == Kind::Predicate; }
  bool is_predicate(const std::string& h) const { return kind == Kind::Predicate && head == h; }
  bool is_entity() const { return kind == Kind::Entity; }
  bool is_number() const { return kind == Kind::Number; }
  bool is_variable() const { return kind == Kind::Variable; }

  friend bool operator==(const Term&, const Term&) = default;
  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (auto c = a.head <=> b.head; c != 0) return c;
    if (auto c = a.points <=> b.points; c != 0) return c;
    if (auto c = a.value <=> b.value; c != 0) return c;
    const std::size_t n = std::min(a.args.size(), b.args.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (auto c = a.args[i] <=> b.args[i]; c != 0) return c;
    }
    return a.args.size() <=> b.args.size();
  }
};

inline void render_into(const Term& t, std::string& out) {
  switch (t.kind) {
    case Term::Kind::Entity:
      out += t.points;
      break;
    case Term::Kind::Number:
      out += t.value.str();
      break;
    case Term::Kind::Variable:
      out += t.head;
      break;
    case Term::Kind::Predicate:
      out += t.head;
      out += '(';
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) out += ',';
        render_into(t.args[i], out);
      }
      out += ')';
      break;
  }
}

inline std::string render_term(const Term& t) {
  std::string out;
  render_into(t, out);
  return out;
}

// True when no entity in t contains a lowercase (pattern) point label.
inline bool is_ground(const Term& t) {
  if (t.is_entity()) {
    for (char c : t.points) {
      if (c < 'A' || c > 'Z') return false;
    }
    return true;
  }
  for (const auto& a : t.args) {
    if (!is_ground(a)) return false;
  }
  return true;
}

}  // namespace fgeo
