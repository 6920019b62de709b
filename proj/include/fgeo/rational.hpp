#pragma once

// Exact arithmetic used throughout the deduction core.
//
//   Rational  p/q over int64 with a positive denominator in lowest terms.
//             Intermediates are computed in 128 bits; a result that does not
//             fit back into 64 bits raises NotRepresentable.
//   Real      a + b*sqrt(k) with rational a, b and square-free k >= 2
//             (k == 1 iff b == 0). Operations that would mix two different
//             radicands raise NotRepresentable; callers treat that as
//             "cannot be solved exactly" rather than approximating.

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <utility>

#include "fgeo/error.hpp"

namespace fgeo {

class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT(implicit)
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  int sign() const { return (num_ > 0) - (num_ < 0); }

  Rational operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                     static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw NotRepresentable("division by zero");
    return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 l = static_cast<__int128>(a.num_) * b.den_;
    const __int128 r = static_cast<__int128>(b.num_) * a.den_;
    return l <=> r;
  }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // "8", "-3", "1/2"
  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Fixed-point rendering with round-half-even at `digits` decimals.
  std::string fixed(int digits) const {
    __int128 scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    __int128 n = static_cast<__int128>(num_) * scale;
    const __int128 d = den_;
    bool neg = n < 0;
    if (neg) n = -n;
    __int128 q = n / d;
    const __int128 r = n % d;
    if (2 * r > d || (2 * r == d && (q % 2) == 1)) ++q;
    if (q == 0) neg = false;
    const __int128 whole = q / scale;
    __int128 frac = q % scale;
    std::string out = (neg ? "-" : "") + wide_to_string(whole);
    if (digits > 0) {
      std::string f(static_cast<std::size_t>(digits), '0');
      for (int i = digits - 1; i >= 0; --i) {
        f[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(frac % 10));
        frac /= 10;
      }
      out += "." + f;
    }
    return out;
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static std::string wide_to_string(__int128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
      s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    return s;
  }

  static __int128 gcd_wide(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Rational from_wide(__int128 n, __int128 d) {
    if (d == 0) throw NotRepresentable("zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const __int128 g = gcd_wide(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    constexpr __int128 lo = INT64_MIN + 1;
    constexpr __int128 hi = INT64_MAX;
    if (n < lo || n > hi || d > hi) throw NotRepresentable("rational overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  void assign(std::int64_t n, std::int64_t d) { *this = from_wide(n, d); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

namespace detail {

// Largest s with s*s <= v, for v >= 0.
inline std::int64_t isqrt(std::int64_t v) {
  auto s = static_cast<std::int64_t>(__builtin_sqrt(static_cast<double>(v)));
  while (s > 0 && static_cast<__int128>(s) * s > v) --s;
  while (static_cast<__int128>(s + 1) * (s + 1) <= v) ++s;
  return s;
}

// v = s*s*k with k square-free.
inline std::pair<std::int64_t, std::int64_t> split_square(std::int64_t v) {
  std::int64_t s = 1;
  std::int64_t k = v;
  for (std::int64_t p = 2; p * p <= k; ++p) {
    while (k % (p * p) == 0) {
      k /= p * p;
      s *= p;
    }
  }
  return {s, k};
}

}  // namespace detail

class Real {
 public:
  Real() = default;
  Real(Rational a) : a_(a) {}  // NOLINT(implicit)
  Real(std::int64_t a) : a_(a) {}  // NOLINT(implicit)
  Real(Rational a, Rational b, std::int64_t k) : a_(a), b_(b), k_(k) { normalize(); }

  const Rational& rational_part() const { return a_; }
  const Rational& surd_part() const { return b_; }
  std::int64_t radicand() const { return k_; }
  bool is_rational() const { return b_.is_zero(); }
  bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

  // sqrt of a non-negative rational, exactly.
  static Real sqrt(const Rational& r) {
    if (r.sign() < 0) throw NotRepresentable("square root of a negative value");
    if (r.is_zero()) return Real{};
    const __int128 pq = static_cast<__int128>(r.num()) * r.den();
    if (pq > INT64_MAX) throw NotRepresentable("radicand overflow");
    auto [s, k] = detail::split_square(static_cast<std::int64_t>(pq));
    if (k == 1) return Real{Rational(s, r.den())};
    return Real{Rational(0), Rational(s, r.den()), k};
  }

  int sign() const {
    const int sa = a_.sign();
    const int sb = b_.sign();
    if (sb == 0) return sa;
    if (sa == 0) return sb;
    if (sa == sb) return sa;
    // a + b sqrt(k) with opposite signs: compare a^2 against b^2 k.
    const Rational a2 = a_ * a_;
    const Rational b2k = b_ * b_ * Rational(k_);
    if (a2 == b2k) return 0;
    return a2 > b2k ? sa : sb;
  }

  Real operator-() const { return Real{-a_, -b_, k_}; }
  friend Real operator+(const Real& x, const Real& y) {
    const std::int64_t k = common(x, y);
    return Real{x.a_ + y.a_, x.b_ + y.b_, k};
  }
  friend Real operator-(const Real& x, const Real& y) { return x + (-y); }
  friend Real operator*(const Real& x, const Real& y) {
    const std::int64_t k = common(x, y);
    return Real{x.a_ * y.a_ + x.b_ * y.b_ * Rational(k), x.a_ * y.b_ + x.b_ * y.a_, k};
  }
  friend Real operator/(const Real& x, const Real& y) {
    if (y.is_zero()) throw NotRepresentable("division by zero");
    if (y.is_rational()) return Real{x.a_ / y.a_, x.b_ / y.a_, x.k_};
    const std::int64_t k = common(x, y);
    const Real conj{y.a_, -y.b_, k};
    const Rational norm = y.a_ * y.a_ - y.b_ * y.b_ * Rational(k);
    const Real n = x * conj;
    return Real{n.a_ / norm, n.b_ / norm, k};
  }
  Real& operator+=(const Real& o) { return *this = *this + o; }
  Real& operator-=(const Real& o) { return *this = *this - o; }
  Real& operator*=(const Real& o) { return *this = *this * o; }

  friend bool operator==(const Real&, const Real&) = default;
  friend auto operator<=>(const Real&, const Real&) = default;  // structural, for containers

  double to_double() const { return a_.to_double() + b_.to_double() * __builtin_sqrt(static_cast<double>(k_)); }

  // CDL-compatible rendering: "60", "1/2", "Mul(5,Sqrt(2))", "Add(3,Mul(2,Sqrt(3)))".
  std::string str() const {
    if (b_.is_zero()) return a_.str();
    const std::string root = "Sqrt(" + std::to_string(k_) + ")";
    const std::string surd = b_ == Rational(1) ? root : "Mul(" + b_.str() + "," + root + ")";
    if (a_.is_zero()) return surd;
    return "Add(" + a_.str() + "," + surd + ")";
  }

  friend std::ostream& operator<<(std::ostream& os, const Real& r) { return os << r.str(); }

 private:
  static std::int64_t common(const Real& x, const Real& y) {
    if (x.b_.is_zero()) return y.k_;
    if (y.b_.is_zero()) return x.k_;
    if (x.k_ != y.k_) throw NotRepresentable("mixed radicands");
    return x.k_;
  }
  void normalize() {
    if (b_.is_zero()) k_ = 1;
  }

  Rational a_;
  Rational b_;
  std::int64_t k_ = 1;
};

}  // namespace fgeo
