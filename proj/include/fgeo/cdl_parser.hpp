#pragma once

// Recursive-descent parser for the condition description language.
//
//   term     := call | entity | number | variable
//   call     := Name '(' term (',' term)* ')'
//   entity   := [A-Z]+                      (not followed by '(')
//   variable := [a-z][a-z0-9_]*             (not followed by '(')
//   number   := '-'? digits ('.' digits | '/' digits)?
//
// Whitespace between tokens is ignored. Anything else is a SyntaxError
// carrying the byte offset where parsing stopped.

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>

#include "fgeo/error.hpp"
#include "fgeo/term.hpp"

namespace fgeo {

namespace detail {

class CdlParser {
 public:
  explicit CdlParser(std::string_view src) : src_(src) {}

  Term parse_all() {
    skip_ws();
    if (at_end()) fail("empty input");
    Term t = parse_term();
    skip_ws();
    if (!at_end()) fail("unexpected trailing input");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, pos_); }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return at_end() ? '\0' : src_[pos_]; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  Term parse_term() {
    skip_ws();
    const char c = peek();
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_word();
    if (at_end()) fail("unexpected end of input");
    if (c == ',' || c == ')') fail("empty argument");
    fail(std::string("unknown character '") + c + "'");
  }

  Term parse_word() {
    const std::size_t start = pos_;
    while (!at_end() && ident_char(src_[pos_])) ++pos_;
    const std::string word(src_.substr(start, pos_ - start));
    const std::size_t after_word = pos_;
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      std::vector<Term> args;
      skip_ws();
      if (peek() == ')') fail("empty argument");
      while (true) {
        args.push_back(parse_term());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        if (at_end()) fail("unbalanced parentheses");
        fail(std::string("unknown character '") + peek() + "'");
      }
      return Term::predicate(word, std::move(args));
    }
    pos_ = after_word;
    bool upper = true;
    for (char ch : word) upper = upper && ch >= 'A' && ch <= 'Z';
    if (upper) return Term::entity(word);
    if (word[0] >= 'a' && word[0] <= 'z') {
      bool ok = true;
      for (char ch : word) ok = ok && ((ch >= 'a' && ch <= 'z') || std::isdigit(static_cast<unsigned char>(ch)) || ch == '_');
      if (ok) return Term::variable(word);
    }
    pos_ = start;
    fail("malformed token '" + word + "'");
  }

  std::int64_t digits(std::int64_t& scale) {
    const std::size_t start = pos_;
    std::int64_t v = 0;
    scale = 1;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
      if (__builtin_mul_overflow(v, 10, &v) || __builtin_add_overflow(v, src_[pos_] - '0', &v) ||
          __builtin_mul_overflow(scale, 10, &scale)) {
        fail("number too large");
      }
      ++pos_;
    }
    if (pos_ == start) fail("expected digits");
    return v;
  }

  Term parse_number() {
    bool neg = false;
    if (peek() == '-') {
      neg = true;
      ++pos_;
    }
    std::int64_t scale = 1;
    std::int64_t whole = digits(scale);
    Rational value(whole);
    if (peek() == '.') {
      ++pos_;
      const std::int64_t frac = digits(scale);
      value = Rational(whole) + Rational(frac, scale);
    } else if (peek() == '/') {
      ++pos_;
      const std::size_t den_pos = pos_;
      const std::int64_t den = digits(scale);
      if (den == 0) {
        pos_ = den_pos;
        fail("zero denominator");
      }
      value = Rational(whole, den);
    }
    if (!at_end() && ident_char(peek())) fail("malformed number");
    return Term::number(neg ? -value : value);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Term parse_term(std::string_view input) { return detail::CdlParser(input).parse_all(); }

}  // namespace fgeo
