#pragma once

#include <compare>
#include <ostream>
#include <string>

#include "nvk/error.hpp"
#include "nvk/rational.hpp"

namespace nvk {

// Element of the exponent group extended by +inf: a finite exact rational
// (any sign) or +inf. +inf is absorbing for addition and maximal in the order.
class Exponent {
 public:
  Exponent() : inf_(false), v_(0) {}
  Exponent(long n) : inf_(false), v_(n) {}           // NOLINT: implicit by design
  Exponent(const Rational& v) : inf_(false), v_(v) {}  // NOLINT: implicit by design
  static Exponent infinity() {
    Exponent e;
    e.inf_ = true;
    return e;
  }

  static Exponent parse(const std::string& s) {
    if (s == "inf" || s == "+inf") return infinity();
    return Exponent(Rational::parse(s));
  }

  bool is_infinite() const { return inf_; }
  bool is_finite() const { return !inf_; }
  const Rational& finite() const {
    if (inf_) throw DomainError("infinite exponent where finite required");
    return v_;
  }

  friend Exponent operator+(const Exponent& a, const Exponent& b) {
    if (a.inf_ || b.inf_) return infinity();
    return Exponent(a.v_ + b.v_);
  }
  // Defined when the result is unambiguous: inf - finite = inf; inf - inf errors.
  friend Exponent operator-(const Exponent& a, const Exponent& b) {
    if (b.inf_) throw DomainError("cannot subtract infinite exponent");
    if (a.inf_) return infinity();
    return Exponent(a.v_ - b.v_);
  }
  Exponent operator-() const {
    if (inf_) throw DomainError("cannot negate infinite exponent");
    return Exponent(-v_);
  }

  friend bool operator==(const Exponent& a, const Exponent& b) {
    if (a.inf_ != b.inf_) return false;
    return a.inf_ || a.v_ == b.v_;
  }
  friend std::strong_ordering operator<=>(const Exponent& a, const Exponent& b) {
    if (a.inf_ && b.inf_) return std::strong_ordering::equal;
    if (a.inf_) return std::strong_ordering::greater;
    if (b.inf_) return std::strong_ordering::less;
    return a.v_ <=> b.v_;
  }

  std::string str() const { return inf_ ? "inf" : v_.str(); }
  friend std::ostream& operator<<(std::ostream& os, const Exponent& e) { return os << e.str(); }

 private:
  bool inf_;
  Rational v_;
};

inline Exponent min(const Exponent& a, const Exponent& b) { return a < b ? a : b; }
inline Exponent max(const Exponent& a, const Exponent& b) { return a < b ? b : a; }

}  // namespace nvk
