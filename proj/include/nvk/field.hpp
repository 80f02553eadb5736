#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "nvk/error.hpp"
#include "nvk/rational.hpp"

namespace nvk {

// Coefficient field interface expected by NovikovScalar<K> and the residue
// field linear algebra: default ctor = 0, K(long), +, -, *, inverse(),
// is_zero(), ==, str(), parse(). Two models: Rational (exact Q) and Fp below.

// Prime field element. modulus == 0 marks a "universal" literal (from
// context-free construction such as Scalar(1)); it adopts the partner's
// modulus on first contact, mirroring the cutoff coercion rule.
class Fp {
 public:
  Fp() : v_(0), p_(0) {}
  Fp(long v) : v_(v), p_(0) {}  // NOLINT: implicit by design
  Fp(long v, std::uint64_t p) : v_(v), p_(p) { normalize(); }

  static Fp parse(const std::string& s) {
    try {
      std::size_t pos = 0;
      long v = std::stol(s, &pos);
      if (pos != s.size()) throw ParseError("bad integer: '" + s + "'");
      return Fp(v);
    } catch (const ParseError&) {
      throw;
    } catch (...) {
      throw ParseError("bad integer: '" + s + "'");
    }
  }

  std::uint64_t modulus() const { return p_; }
  // Pins a universal element to a concrete modulus.
  Fp contextualize(std::uint64_t p) const {
    if (p_ != 0 && p != p_) throw DomainError("field modulus mismatch");
    return Fp(v_, p);
  }

  bool is_zero() const { return v_ == 0; }

  friend Fp operator+(const Fp& a, const Fp& b) {
    auto [x, y, p] = coerce(a, b);
    return make(x + y, p);
  }
  friend Fp operator-(const Fp& a, const Fp& b) {
    auto [x, y, p] = coerce(a, b);
    return make(x - y, p);
  }
  friend Fp operator*(const Fp& a, const Fp& b) {
    auto [x, y, p] = coerce(a, b);
    if (p == 0) return make(x * y, 0);
    return make(static_cast<long>((static_cast<__int128>(x) * y) % static_cast<long>(p)), p);
  }
  Fp operator-() const { return make(-v_, p_); }
  Fp& operator+=(const Fp& b) { return *this = *this + b; }
  Fp& operator-=(const Fp& b) { return *this = *this - b; }
  Fp& operator*=(const Fp& b) { return *this = *this * b; }

  Fp inverse() const {
    if (v_ == 0) throw DomainError("inverse of zero");
    if (p_ == 0) {
      if (v_ == 1 || v_ == -1) return *this;
      throw DomainError("inverse needs a modulus");
    }
    // Extended Euclid: v_ is already in [1, p).
    long t = 0, nt = 1, r = static_cast<long>(p_), nr = v_;
    while (nr != 0) {
      long q = r / nr;
      long tmp = t - q * nt; t = nt; nt = tmp;
      tmp = r - q * nr; r = nr; nr = tmp;
    }
    if (r != 1) throw DomainError("non-invertible residue (modulus not prime?)");
    return make(t, p_);
  }

  friend bool operator==(const Fp& a, const Fp& b) {
    auto [x, y, p] = coerce(a, b);
    (void)p;
    return x == y;
  }

  std::string str() const { return std::to_string(v_); }
  friend std::ostream& operator<<(std::ostream& os, const Fp& a) { return os << a.str(); }

 private:
  static Fp make(long v, std::uint64_t p) {
    Fp r;
    r.v_ = v;
    r.p_ = p;
    r.normalize();
    return r;
  }
  void normalize() {
    if (p_ != 0) {
      long p = static_cast<long>(p_);
      v_ = ((v_ % p) + p) % p;
    }
  }
  struct Coerced { long x, y; std::uint64_t p; };
  static Coerced coerce(const Fp& a, const Fp& b) {
    if (a.p_ != 0 && b.p_ != 0 && a.p_ != b.p_) throw DomainError("field modulus mismatch");
    std::uint64_t p = a.p_ != 0 ? a.p_ : b.p_;
    return {a.contextualize(p).v_, b.contextualize(p).v_, p};
  }

  long v_;
  std::uint64_t p_;
};

// Rational already satisfies the interface except for these two.
inline bool is_zero(const Rational& a) { return a.sign() == 0; }
inline Rational inverse_of(const Rational& a) { return Rational(1) / a; }
inline bool is_zero(const Fp& a) { return a.is_zero(); }
inline Fp inverse_of(const Fp& a) { return a.inverse(); }

// No-op for Q, modulus pinning for Fp; the IO layer calls this uniformly.
inline Rational contextualize(const Rational& a, std::uint64_t) { return a; }
inline Fp contextualize(const Fp& a, std::uint64_t p) { return a.contextualize(p); }

template <class K> struct FieldName;
template <> struct FieldName<Rational> { static constexpr const char* value = "q"; };
template <> struct FieldName<Fp> { static constexpr const char* value = "fp"; };

}  // namespace nvk
