#pragma once

#include <ostream>
#include <string>

#include "nvk/error.hpp"
#include "nvk/exponent.hpp"
#include "nvk/novikov.hpp"
#include "nvk/rational.hpp"

namespace nvk {

// Element of the Novikov field (fraction field of the ring): T^shift * body,
// shift any rational, body of valuation 0, known modulo T^(shift + precision).
// precision is carried as the body's cutoff. A zero body means the element is
// indistinguishable from 0 at the available precision (exact 0 when the
// precision is infinite).
template <class K>
class NovikovFieldScalar {
 public:
  NovikovFieldScalar() : shift_(0), body_(NovikovScalar<K>::zero(Exponent::infinity())) {}

  // T^shift * body; body needs valuation 0 (or zero).
  NovikovFieldScalar(const Rational& shift, const NovikovScalar<K>& body) : shift_(shift), body_(body) {
    if (!body_.is_zero() && body_.valuation() != Exponent(Rational(0)))
      throw DomainError("field scalar body must have valuation 0");
  }

  // Embeds a ring scalar: T^0 * x, precision = the scalar's cutoff.
  static NovikovFieldScalar from_ring(const NovikovScalar<K>& x) {
    NovikovFieldScalar r;
    r.shift_ = Rational(0);
    r.body_ = x;
    r.normalize();
    return r;
  }
  static NovikovFieldScalar tpower(const Rational& a, Exponent precision = Exponent::infinity()) {
    return NovikovFieldScalar(a, NovikovScalar<K>::one(precision));
  }

  bool is_zero_at_precision() const { return body_.is_zero(); }
  bool is_exact_zero() const { return body_.is_zero() && body_.cutoff().is_infinite(); }
  const Rational& shift() const { return shift_; }
  const NovikovScalar<K>& body() const { return body_; }
  Exponent precision() const { return body_.cutoff(); }
  Exponent absolute_precision() const { return Exponent(shift_) + body_.cutoff(); }

  Exponent valuation() const { return body_.is_zero() ? Exponent::infinity() : Exponent(shift_); }

  // Membership in F^level = { valuation >= level }.
  bool in_filtration(const Rational& level) const {
    return body_.is_zero() || !(shift_ < level);
  }

  friend NovikovFieldScalar operator+(const NovikovFieldScalar& a, const NovikovFieldScalar& b) {
    Exponent abs_prec = min(a.absolute_precision(), b.absolute_precision());
    if (a.body_.is_zero() && b.body_.is_zero())
      return abs_prec.is_finite() ? zero_at(abs_prec.finite()) : NovikovFieldScalar();
    if (a.body_.is_zero()) return b.truncated_absolute(abs_prec);
    if (b.body_.is_zero()) return a.truncated_absolute(abs_prec);
    Rational s = nvk::min(a.shift_, b.shift_);
    Exponent cut = abs_prec.is_infinite() ? Exponent::infinity() : abs_prec - Exponent(s);
    auto rebase = [&](const NovikovFieldScalar& x) {
      // re-express T^x.shift * body as T^s * (...) at relative precision `cut`
      NovikovScalar<K> out = NovikovScalar<K>::zero(cut);
      for (const auto& [e, c] : x.body_.terms())
        out += NovikovScalar<K>::monomial(c, e + (x.shift_ - s), cut);
      return out;
    };
    NovikovFieldScalar r;
    r.shift_ = s;
    r.body_ = rebase(a) + rebase(b);
    r.normalize();
    return r;
  }
  friend NovikovFieldScalar operator-(const NovikovFieldScalar& a, const NovikovFieldScalar& b) { return a + (-b); }
  NovikovFieldScalar operator-() const {
    NovikovFieldScalar r = *this;
    r.body_ = -r.body_;
    return r;
  }
  friend NovikovFieldScalar operator*(const NovikovFieldScalar& a, const NovikovFieldScalar& b) {
    if (a.is_exact_zero() || b.is_exact_zero()) return NovikovFieldScalar();
    if (a.body_.is_zero() && b.body_.is_zero())
      return zero_at((a.absolute_precision() + b.absolute_precision()).finite());
    if (a.body_.is_zero() || b.body_.is_zero()) {
      // O(T^t) * (T^s * unit body) = O(T^(t+s))
      Exponent t = a.body_.is_zero() ? a.absolute_precision() + b.valuation()
                                     : b.absolute_precision() + a.valuation();
      return zero_at(t.finite());
    }
    NovikovFieldScalar r;
    r.shift_ = a.shift_ + b.shift_;
    r.body_ = a.body_ * b.body_;  // cutoff joins to min precision
    return r;
  }

  NovikovFieldScalar inv() const {
    if (body_.is_zero()) throw DomainError("inverse of zero field scalar");
    NovikovFieldScalar r;
    r.shift_ = -shift_;
    if (body_.cutoff().is_infinite()) {
      if (body_.terms().size() != 1)
        throw DomainError("inverse at infinite precision is not finitely supported");
      r.body_ = NovikovScalar<K>(inverse_of(body_.leading_coeff()));
    } else {
      r.body_ = body_.inv();
    }
    return r;
  }

  friend bool operator==(const NovikovFieldScalar& a, const NovikovFieldScalar& b) {
    return (a - b).body_.is_zero();
  }

  std::string str() const {
    if (body_.is_zero())
      return absolute_precision().is_infinite() ? "0" : "O(T^(" + absolute_precision().str() + "))";
    std::string p = precision().is_infinite() ? "exact" : "prec " + precision().str();
    return "T^(" + shift_.str() + ")*(" + body_.str() + ") [" + p + "]";
  }
  friend std::ostream& operator<<(std::ostream& os, const NovikovFieldScalar& s) { return os << s.str(); }

 private:
  // Zero known only modulo T^t.
  static NovikovFieldScalar zero_at(const Rational& t) {
    NovikovFieldScalar r;
    r.shift_ = Rational(0);
    r.body_ = NovikovScalar<K>::zero(Exponent(t));
    return r;
  }
  NovikovFieldScalar truncated_absolute(Exponent abs_prec) const {
    if (abs_prec.is_infinite()) return *this;
    if (body_.is_zero()) return zero_at(abs_prec.finite());
    NovikovFieldScalar r = *this;
    r.body_ = body_.truncated(min(body_.cutoff(), abs_prec - Exponent(shift_)));
    r.normalize();
    return r;
  }
  void normalize() {
    if (body_.is_zero()) {
      // fold the shift into the precision bound
      if (body_.cutoff().is_finite()) *this = zero_at(shift_ + body_.cutoff().finite());
      else shift_ = Rational(0);
      return;
    }
    Exponent v = body_.valuation();
    if (v == Exponent(Rational(0))) return;
    Rational vr = v.finite();
    Exponent new_cut = body_.cutoff().is_infinite() ? Exponent::infinity() : Exponent(body_.cutoff().finite() - vr);
    NovikovScalar<K> nb = NovikovScalar<K>::zero(new_cut);
    for (const auto& [e, c] : body_.terms()) nb += NovikovScalar<K>::monomial(c, e - vr, new_cut);
    shift_ += vr;
    body_ = nb;
  }

  Rational shift_;
  NovikovScalar<K> body_;
};

}  // namespace nvk
