#pragma once

// Shared randomized generators for the test suites. All draws go through an
// explicitly seeded mt19937_64 and `rng() % n`, so every failure reproduces
// bit-for-bit across standard libraries.

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "nvk/barcode.hpp"
#include "nvk/field.hpp"
#include "nvk/module.hpp"
#include "nvk/novikov.hpp"
#include "nvk/persist1d.hpp"

namespace nvk::testgen {

using Rng = std::mt19937_64;

inline long pick(Rng& rng, long n) { return static_cast<long>(rng() % static_cast<std::uint64_t>(n)); }

// k/den with k in [0, max_num]; grid_pos excludes 0.
inline Rational grid(Rng& rng, long max_num, long den) { return Rational(pick(rng, max_num + 1), den); }
inline Rational grid_pos(Rng& rng, long max_num, long den) { return Rational(1 + pick(rng, max_num), den); }

inline Rational small_coeff(Rng& rng, const Rational&) {
  long n = 1 + pick(rng, 9);
  if (rng() % 2) n = -n;
  return Rational(n, 1 + pick(rng, 4));
}
inline Fp small_coeff(Rng& rng, const Fp& model) {
  return Fp(1 + pick(rng, static_cast<long>(model.modulus()) - 1), model.modulus());
}

// Up to max_terms monomials with exponents on the 1/6-grid below 4.
template <class K>
NovikovScalar<K> random_scalar(Rng& rng, const K& model, Exponent cutoff, long max_terms = 4) {
  NovikovScalar<K> s = NovikovScalar<K>::zero(cutoff);
  long n = pick(rng, max_terms + 1);
  for (long t = 0; t < n; ++t)
    s += NovikovScalar<K>::monomial(small_coeff(rng, model), grid(rng, 23, 6), cutoff);
  return s;
}

inline EqBarcode random_eq(Rng& rng, long max_torsion = 4, long max_free = 2) {
  std::vector<Rational> t;
  long n = pick(rng, max_torsion + 1);
  for (long i = 0; i < n; ++i) t.push_back(grid_pos(rng, 24, 6));
  EqBarcode e = EqBarcode::torsion(std::move(t));
  e.nf.free = pick(rng, max_free + 1);
  return e;
}

// Presentation with sparse 0-2 term entries, exponents on the 1/6-grid <= 4.
template <class K>
PresentationModule<K> random_presentation(Rng& rng, const K& model, long max_rows = 4, long max_cols = 4) {
  PresentationModule<K> m;
  const long rows = 1 + pick(rng, max_rows), cols = 1 + pick(rng, max_cols);
  m.rel = zero_matrix<K>(rows, cols, Exponent::infinity());
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) {
      long kind = pick(rng, 3);
      if (kind == 0) continue;
      NovikovScalar<K> s = NovikovScalar<K>::monomial(small_coeff(rng, model), grid(rng, 24, 6));
      if (kind == 2) s += NovikovScalar<K>::monomial(small_coeff(rng, model), grid(rng, 24, 6));
      m.rel(i, j) = s;
    }
  return m;
}

inline Rational rand_rational(Rng& rng, long lo, long hi, long maxden) {
  long num = lo + pick(rng, hi - lo + 1);
  return Rational(num, 1 + pick(rng, maxden));
}

// Circle function with nonzero slope on every segment: cyclic walk with
// nonzero steps, resampled until the wrap step is nonzero too. Extremum
// values may still tie; callers needing full genericity retry on is_generic.
inline PLFunction random_nonflat_circle(Rng& rng, long max_bp) {
  for (;;) {
    long n = 2 + pick(rng, max_bp - 1);
    std::vector<long> ticks(24);
    std::iota(ticks.begin(), ticks.end(), 0);
    for (long i = 23; i > 0; --i) std::swap(ticks[static_cast<std::size_t>(i)], ticks[static_cast<std::size_t>(pick(rng, i + 1))]);
    ticks.resize(static_cast<std::size_t>(n));
    std::sort(ticks.begin(), ticks.end());
    std::vector<Rational> xs, vs;
    for (long t : ticks) xs.push_back(Rational(t, 24));
    vs.push_back(rand_rational(rng, -6, 6, 3));
    for (long i = 1; i < n; ++i) {
      Rational step = rand_rational(rng, 1, 8, 3);
      if (rng() % 2) step = -step;
      vs.push_back(vs.back() + step);
    }
    bool ok = vs.front() != vs.back();
    for (std::size_t i = 0; ok && i + 1 < vs.size(); ++i)
      if (vs[i] == vs[i + 1]) ok = false;
    if (!ok) continue;
    return PLFunction::on_circle(xs, vs);
  }
}

inline PLFunction random_generic_circle(Rng& rng, long max_bp) {
  for (;;) {
    PLFunction f = random_nonflat_circle(rng, max_bp);
    if (is_generic(f)) return f;
  }
}

inline PLFunction random_circle(Rng& rng, long max_bp) {
  long n = 1 + pick(rng, max_bp);
  std::vector<long> ticks(24);
  std::iota(ticks.begin(), ticks.end(), 0);
  for (long i = 23; i > 0; --i) std::swap(ticks[static_cast<std::size_t>(i)], ticks[static_cast<std::size_t>(pick(rng, i + 1))]);
  ticks.resize(static_cast<std::size_t>(n));
  std::sort(ticks.begin(), ticks.end());
  std::vector<Rational> xs, vs;
  for (long t : ticks) xs.push_back(Rational(t, 24));
  for (long i = 0; i < n; ++i) vs.push_back(rand_rational(rng, -6, 6, 3));
  return PLFunction::on_circle(xs, vs);
}

}  // namespace nvk::testgen
