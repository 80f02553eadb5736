#pragma once

#include <algorithm>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nvk/error.hpp"
#include "nvk/exponent.hpp"
#include "nvk/field.hpp"
#include "nvk/rational.hpp"

namespace nvk {

// Element of the nonnegative-exponent Novikov ring truncated at `cutoff`:
// a finite sum  sum_i c_i * T^(e_i)  with 0 <= e_0 < e_1 < ... < cutoff,
// c_i nonzero in K. cutoff lies in (0, +inf]. The representation is canonical:
// equal elements have identical term lists.
//
// Cutoff coercion: a cutoff-inf operand is truncated into a finite-cutoff
// partner (the canonical quotient map); two distinct finite cutoffs error.
// This lets context-free literals like Scalar(0) and Scalar(1) participate
// in arithmetic at any ambient cutoff, which generic Eigen code relies on.
template <class K>
class NovikovScalar {
 public:
  using Term = std::pair<Rational, K>;

  NovikovScalar() = default;
  NovikovScalar(long n) { if (n != 0) terms_.push_back({Rational(0), K(n)}); canonicalize(); }  // NOLINT
  explicit NovikovScalar(const K& c) {
    if (!nvk::is_zero(c)) terms_.push_back({Rational(0), c});
  }

  static NovikovScalar zero(Exponent cutoff) {
    NovikovScalar s;
    s.cutoff_ = check_cutoff(cutoff);
    return s;
  }
  static NovikovScalar one(Exponent cutoff) { return monomial(K(1), Rational(0), cutoff); }
  static NovikovScalar monomial(const K& c, const Rational& e, Exponent cutoff = Exponent::infinity()) {
    NovikovScalar s;
    s.cutoff_ = check_cutoff(cutoff);
    if (e.sign() < 0) throw DomainError("negative exponent in ring scalar");
    if (!nvk::is_zero(c) && Exponent(e) < s.cutoff_) s.terms_.push_back({e, c});
    return s;
  }

  const Exponent& cutoff() const { return cutoff_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // +inf for zero; otherwise the least exponent.
  Exponent valuation() const {
    return terms_.empty() ? Exponent::infinity() : Exponent(terms_.front().first);
  }
  const K& leading_coeff() const {
    if (terms_.empty()) throw DomainError("leading coefficient of zero");
    return terms_.front().second;
  }
  bool is_unit() const { return !terms_.empty() && terms_.front().first.sign() == 0 && cutoff_.is_finite(); }

  // Image under the quotient map to a smaller (or equal) cutoff.
  NovikovScalar truncated(Exponent c) const {
    check_cutoff(c);
    if (cutoff_ <= c) {
      if (cutoff_ < c) throw DomainError("cannot extend cutoff");
      return *this;
    }
    NovikovScalar r;
    r.cutoff_ = c;
    for (const auto& t : terms_) {
      if (Exponent(t.first) < c) r.terms_.push_back(t);
    }
    return r;
  }

  // Coefficient of T^e, zero if absent.
  K coeff_at(const Rational& e) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), e,
                               [](const Term& t, const Rational& x) { return t.first < x; });
    if (it != terms_.end() && it->first == e) return it->second;
    return K(0);
  }

  friend NovikovScalar operator+(const NovikovScalar& a, const NovikovScalar& b) {
    Exponent c = join(a.cutoff_, b.cutoff_);
    NovikovScalar r;
    r.cutoff_ = c;
    std::map<Rational, K> acc;
    for (const auto& t : a.terms_) acc[t.first] = t.second;
    for (const auto& t : b.terms_) {
      auto [it, fresh] = acc.insert(t);
      if (!fresh) it->second += t.second;
    }
    for (auto& [e, k] : acc) {
      if (!nvk::is_zero(k) && Exponent(e) < c) r.terms_.push_back({e, k});
    }
    return r;
  }
  friend NovikovScalar operator-(const NovikovScalar& a, const NovikovScalar& b) { return a + (-b); }
  NovikovScalar operator-() const {
    NovikovScalar r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
  }
  friend NovikovScalar operator*(const NovikovScalar& a, const NovikovScalar& b) {
    Exponent c = join(a.cutoff_, b.cutoff_);
    NovikovScalar r;
    r.cutoff_ = c;
    std::map<Rational, K> acc;
    for (const auto& s : a.terms_) {
      for (const auto& t : b.terms_) {
        Rational e = s.first + t.first;
        if (!(Exponent(e) < c)) continue;  // exponents ascend within each row, but rows interleave
        K prod = s.second * t.second;
        auto [it, fresh] = acc.insert({e, prod});
        if (!fresh) it->second += prod;
      }
    }
    for (auto& [e, k] : acc) {
      if (!nvk::is_zero(k)) r.terms_.push_back({e, k});
    }
    return r;
  }
  NovikovScalar& operator+=(const NovikovScalar& b) { return *this = *this + b; }
  NovikovScalar& operator-=(const NovikovScalar& b) { return *this = *this - b; }
  NovikovScalar& operator*=(const NovikovScalar& b) { return *this = *this * b; }

  friend bool operator==(const NovikovScalar& a, const NovikovScalar& b) {
    Exponent c = join(a.cutoff_, b.cutoff_);
    return a.truncated(c).terms_ == b.truncated(c).terms_;
  }
  friend bool operator!=(const NovikovScalar& a, const NovikovScalar& b) { return !(a == b); }

  // Multiplication by T^a, a >= 0.
  NovikovScalar shifted(const Rational& a) const {
    if (a.sign() < 0) throw DomainError("negative shift on ring scalar");
    NovikovScalar r;
    r.cutoff_ = cutoff_;
    for (const auto& t : terms_) {
      Rational e = t.first + a;
      if (Exponent(e) < cutoff_) r.terms_.push_back({e, t.second});
    }
    return r;
  }
  // Division by T^a; every term must have exponent >= a.
  NovikovScalar shifted_down(const Rational& a) const {
    NovikovScalar r;
    r.cutoff_ = cutoff_;  // deliberately unchanged: used for valuation-normalized representatives
    for (const auto& t : terms_) {
      if (t.first < a) throw DomainError("shift below valuation");
      r.terms_.push_back({t.first - a, t.second});
    }
    return r;
  }
  NovikovScalar scaled(const K& c) const {
    NovikovScalar r;
    r.cutoff_ = cutoff_;
    for (const auto& t : terms_) {
      K k = t.second * c;
      if (!nvk::is_zero(k)) r.terms_.push_back({t.first, k});
    }
    return r;
  }

  // Multiplicative inverse. Defined exactly for valuation-0 elements at
  // finite cutoff (geometric series terminates below the cutoff).
  NovikovScalar inv() const {
    if (is_zero() || terms_.front().first.sign() != 0)
      throw DomainError("inverse of non-unit ring scalar");
    if (cutoff_.is_infinite())
      throw DomainError("inverse requires a finite cutoff");
    K c0inv = inverse_of(terms_.front().second);
    NovikovScalar x = (*this - NovikovScalar(terms_.front().second).truncated(cutoff_)).scaled(c0inv);
    // (c0(1+x))^-1 = c0^-1 sum (-x)^k; x has positive valuation.
    NovikovScalar acc = one(cutoff_);
    NovikovScalar pw = one(cutoff_);
    while (true) {
      pw = pw * (-x);
      if (pw.is_zero()) break;
      acc += pw;
    }
    return acc.scaled(c0inv);
  }

  std::string str(bool with_cutoff = false) const {
    std::string out;
    if (terms_.empty()) {
      out = "0";
    } else {
      bool first = true;
      for (const auto& [e, c] : terms_) {
        auto [neg, mag] = coeff_repr(c);
        std::string body;
        if (e.sign() == 0) {
          body = mag;
        } else if (mag == "1") {
          body = "T^(" + e.str() + ")";
        } else {
          body = mag + "*T^(" + e.str() + ")";
        }
        if (first) {
          out = (neg ? "-" : "") + body;
          first = false;
        } else {
          out += (neg ? " - " : " + ") + body;
        }
      }
    }
    if (with_cutoff) out += cutoff_.is_infinite() ? " @inf" : " @cutoff " + cutoff_.finite().str();
    return out;
  }
  friend std::ostream& operator<<(std::ostream& os, const NovikovScalar& s) { return os << s.str(); }

  // Literal grammar: c0 + c1*T^(p/q) + ...  with optional trailing
  // "@cutoff p/q" or "@inf". Coefficients parse in K; exponents are rationals,
  // parenthesized or bare.
  static NovikovScalar parse(const std::string& input, Exponent default_cutoff = Exponent::infinity()) {
    std::string s = input;
    Exponent cut = default_cutoff;
    auto at = s.find('@');
    if (at != std::string::npos) {
      std::string ann = trim(s.substr(at + 1));
      s = s.substr(0, at);
      if (ann == "inf") {
        cut = Exponent::infinity();
      } else if (ann.rfind("cutoff", 0) == 0) {
        cut = Exponent(Rational::parse(trim(ann.substr(6))));
      } else {
        throw ParseError("bad cutoff annotation: '@" + ann + "'");
      }
    }
    NovikovScalar r = zero(cut);
    std::size_t i = 0;
    auto skip_ws = [&] { while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i; };
    bool first = true;
    skip_ws();
    if (i == s.size()) throw ParseError("empty scalar literal");
    while (i < s.size()) {
      int sign = 1;
      skip_ws();
      if (!first || s[i] == '+' || s[i] == '-') {
        if (i >= s.size() || (s[i] != '+' && s[i] != '-')) throw ParseError("expected + or - in scalar literal");
        sign = s[i] == '-' ? -1 : 1;
        ++i;
        skip_ws();
      }
      first = false;
      // term := coeff ['*' tpow] | tpow
      K coeff(1);
      bool have_t = false;
      Rational expo(0);
      if (i < s.size() && s[i] == 'T') {
        have_t = true;
        expo = parse_tpow(s, i);
      } else {
        std::size_t j = i;
        while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '/')) ++j;
        if (j == i) throw ParseError("bad term in scalar literal: '" + s.substr(i) + "'");
        coeff = K::parse(s.substr(i, j - i));
        i = j;
        skip_ws();
        if (i < s.size() && s[i] == '*') {
          ++i;
          skip_ws();
          if (i >= s.size() || s[i] != 'T') throw ParseError("expected T^ after *");
          have_t = true;
          expo = parse_tpow(s, i);
        }
      }
      (void)have_t;
      if (expo.sign() < 0) throw ParseError("negative exponent in ring scalar literal");
      if (sign < 0) coeff = -coeff;
      r += monomial(coeff, expo, cut);
      skip_ws();
    }
    return r;
  }

 private:
  static Exponent check_cutoff(Exponent c) {
    if (c.is_finite() && c.finite().sign() <= 0) throw DomainError("cutoff must be positive");
    return c;
  }
  static Exponent join(const Exponent& a, const Exponent& b) {
    if (a == b) return a;
    if (a.is_infinite()) return b;
    if (b.is_infinite()) return a;
    throw DomainError("cutoff mismatch: " + a.str() + " vs " + b.str());
  }
  void canonicalize() {
    std::stable_sort(terms_.begin(), terms_.end(),
                     [](const Term& a, const Term& b) { return a.first < b.first; });
  }
  static std::pair<bool, std::string> coeff_repr(const K& c) {
    std::string s = c.str();
    if (!s.empty() && s[0] == '-') return {true, s.substr(1)};
    return {false, s};
  }
  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    std::size_t b = s.find_last_not_of(" \t");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
  }
  static Rational parse_tpow(const std::string& s, std::size_t& i) {
    // at s[i] == 'T'
    ++i;
    if (i >= s.size() || s[i] != '^') throw ParseError("expected ^ after T");
    ++i;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i < s.size() && s[i] == '(') {
      auto close = s.find(')', i);
      if (close == std::string::npos) throw ParseError("unclosed parenthesis in exponent");
      Rational e = Rational::parse(trim(s.substr(i + 1, close - i - 1)));
      i = close + 1;
      return e;
    }
    std::size_t j = i;
    while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '/' || s[j] == '-')) ++j;
    if (j == i) throw ParseError("missing exponent after T^");
    Rational e = Rational::parse(s.substr(i, j - i));
    i = j;
    return e;
  }

  std::vector<Term> terms_;
  Exponent cutoff_ = Exponent::infinity();
};

// T^a at cutoff inf; the workhorse literal in tests.
template <class K>
NovikovScalar<K> tpow(const Rational& a, Exponent cutoff = Exponent::infinity()) {
  return NovikovScalar<K>::monomial(K(1), a, cutoff);
}

}  // namespace nvk
