#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "nvk/module.hpp"

namespace nvk {

// One sheaf bar K_{[birth, birth+length)} (length +inf = a ray), tagged with
// a cohomological degree so graded outputs share the type.
struct Bar {
  Rational birth;
  Exponent length;
  int degree = 0;

  friend bool operator==(const Bar&, const Bar&) = default;
};

struct PlainBarcode {
  std::vector<Bar> bars;

  void canonicalize() {
    std::erase_if(bars, [](const Bar& b) { return b.length == Exponent(Rational(0)); });
    std::sort(bars.begin(), bars.end(), [](const Bar& x, const Bar& y) {
      if (x.degree != y.degree) return x.degree < y.degree;
      if (x.birth != y.birth) return x.birth < y.birth;
      return y.length < x.length;
    });
  }
  friend bool operator==(const PlainBarcode&, const PlainBarcode&) = default;
};

// Raw interval input for the projector: endpoint a, endpoint b (possibly
// +inf), and closedness flags. b >= a required.
struct Interval {
  Rational a;
  Exponent b;
  bool left_closed = true;
  bool right_closed = false;
};

// Equivariant barcode: a finitely presented module in normal form. Summands
// are indexed torsion-first (lengths descending, matching nf.torsion), then
// free parts.
struct EqBarcode {
  NormalForm nf;
  Exponent cutoff = Exponent::infinity();

  long summands() const { return nf.summands(); }
  long torsion_count() const { return static_cast<long>(nf.torsion.size()); }
  Exponent summand_length(long i) const {
    if (i < 0 || i >= summands()) throw DomainError("summand index out of range");
    return i < torsion_count() ? Exponent(nf.torsion[static_cast<std::size_t>(i)]) : Exponent::infinity();
  }
  friend bool operator==(const EqBarcode&, const EqBarcode&) = default;

  static EqBarcode unit(Exponent cutoff = Exponent::infinity()) { return {NormalForm{{}, 1}, cutoff}; }
  static EqBarcode zero(Exponent cutoff = Exponent::infinity()) { return {NormalForm{}, cutoff}; }
  static EqBarcode torsion(std::vector<Rational> lengths, Exponent cutoff = Exponent::infinity()) {
    NormalForm nf{std::move(lengths), 0};
    nf.canonicalize();
    return {nf, cutoff};
  }

  // Diagonal presentation: one relation row T^{c_i} per torsion summand.
  template <class K>
  PresentationModule<K> presentation() const {
    PresentationModule<K> p;
    p.cutoff = cutoff;
    p.rel = zero_matrix<K>(torsion_count(), summands(), cutoff);
    for (long i = 0; i < torsion_count(); ++i)
      p.rel(i, i) = tpow<K>(nf.torsion[static_cast<std::size_t>(i)], cutoff);
    return p;
  }
};

using GradedEq = std::map<int, EqBarcode>;

inline Exponent join_cutoffs(const Exponent& a, const Exponent& b) {
  if (a == b) return a;
  if (a.is_infinite()) return b;
  if (b.is_infinite()) return a;
  throw DomainError("cutoff mismatch: " + a.str() + " vs " + b.str());
}

// --- convolution -----------------------------------------------------------

// Bars convolve additively in births and take the shorter length; degrees
// add. This is the degree-0 stalk rule, which is the whole answer for every
// ray*ray, ray*bar pair; the degree-shifted corrections surface only through
// project() on exotic interval types.
inline PlainBarcode star(const PlainBarcode& x, const PlainBarcode& y) {
  PlainBarcode out;
  for (const Bar& p : x.bars)
    for (const Bar& q : y.bars)
      out.bars.push_back({p.birth + q.birth, min(p.length, q.length), p.degree + q.degree});
  out.canonicalize();
  return out;
}

// Tensor of cyclic summands: torsion lengths take the min, the unit is free
// rank 1.
inline EqBarcode star(const EqBarcode& x, const EqBarcode& y) {
  Exponent cutoff = join_cutoffs(x.cutoff, y.cutoff);
  EqBarcode out{NormalForm{}, cutoff};
  for (long i = 0; i < x.summands(); ++i) {
    for (long j = 0; j < y.summands(); ++j) {
      Exponent len = min(x.summand_length(i), y.summand_length(j));
      if (len.is_infinite())
        ++out.nf.free;
      else
        out.nf.torsion.push_back(len.finite());
    }
  }
  out.nf.canonicalize();
  return out;
}

// Mixed convolution: an equivariant module against one bar of length l is the
// tensor with the cyclic module of length l.
inline EqBarcode star(const EqBarcode& x, const Bar& b) {
  EqBarcode out{NormalForm{}, x.cutoff};
  for (long i = 0; i < x.summands(); ++i) {
    Exponent len = min(x.summand_length(i), b.length);
    if (len.is_infinite())
      ++out.nf.free;
    else
      out.nf.torsion.push_back(len.finite());
  }
  out.nf.canonicalize();
  return out;
}
inline EqBarcode star(const EqBarcode& x, const PlainBarcode& y) {
  EqBarcode out{NormalForm{}, x.cutoff};
  for (const Bar& b : y.bars) {
    EqBarcode piece = star(x, b);
    for (const Rational& c : piece.nf.torsion) out.nf.torsion.push_back(c);
    out.nf.free += piece.nf.free;
  }
  out.nf.canonicalize();
  return out;
}

// --- induction (free construction on a fully quotiented barcode) -----------

// Births are forgotten: a bar of length l becomes cyclic torsion of length l,
// rays become free rank 1. Only bars of the requested degree are taken.
inline EqBarcode induce(const PlainBarcode& p, int degree = 0, Exponent cutoff = Exponent::infinity()) {
  EqBarcode out{NormalForm{}, cutoff};
  for (const Bar& b : p.bars) {
    if (b.degree != degree) continue;
    if (b.length.is_infinite())
      ++out.nf.free;
    else
      out.nf.torsion.push_back(b.length.finite());
  }
  out.nf.canonicalize();
  return out;
}
inline GradedEq induce_graded(const PlainBarcode& p, Exponent cutoff = Exponent::infinity()) {
  GradedEq out;
  for (const Bar& b : p.bars) {
    auto [it, fresh] = out.insert({b.degree, EqBarcode::zero(cutoff)});
    (void)fresh;
    if (b.length.is_infinite())
      ++it->second.nf.free;
    else
      it->second.nf.torsion.push_back(b.length.finite());
  }
  for (auto& [d, e] : out) e.nf.canonicalize();
  return out;
}

// --- projector onto the one-sided tube -------------------------------------

// Image of each interval type under convolution with the standard ray,
// computed stalkwise from compactly supported cohomology of (-inf, t] cut
// against the interval: half-open intervals are fixed, [a,b] spreads to the
// ray at a, (a,b) gives the ray at b in degree 1, (a,b] dies.
inline PlainBarcode project(const std::vector<Interval>& intervals) {
  PlainBarcode out;
  for (const Interval& iv : intervals) {
    if (iv.b.is_finite() && iv.b.finite() < iv.a) throw DomainError("interval with b < a");
    const bool unbounded = iv.b.is_infinite();
    if (iv.left_closed && (unbounded || !iv.right_closed)) {
      // [a, b): kept as is (includes rays [a, inf))
      if (unbounded)
        out.bars.push_back({iv.a, Exponent::infinity(), 0});
      else if (iv.a < iv.b.finite())
        out.bars.push_back({iv.a, Exponent(iv.b.finite() - iv.a), 0});
    } else if (iv.left_closed && iv.right_closed) {
      // [a, b], compact: ray from a
      out.bars.push_back({iv.a, Exponent::infinity(), 0});
    } else if (!iv.left_closed && !iv.right_closed) {
      // (a, b): ray from b, degree shifted
      if (unbounded) continue;  // (a, inf) has no compactly supported sections
      if (iv.a < iv.b.finite()) out.bars.push_back({iv.b.finite(), Exponent::infinity(), 1});
    } else {
      // (a, b]: vanishes
      continue;
    }
  }
  out.canonicalize();
  return out;
}

// --- hom and Ext ------------------------------------------------------------

// Graded hom of equivariant barcodes, summand by summand:
//   deg 0: tor a -> tor b : cyclic min(a,b), generator valuation max(0, b-a)
//          free  -> tor b : cyclic b;  tor a -> free : 0;  free -> free : free
//   deg 1: tor a -> tor b : cyclic min(a,b); anything with a free side : 0
struct HomResult {
  NormalForm h0, h1;
  friend bool operator==(const HomResult&, const HomResult&) = default;
};

inline HomResult hom(const EqBarcode& e, const EqBarcode& f) {
  HomResult out;
  for (long j = 0; j < e.summands(); ++j) {
    for (long i = 0; i < f.summands(); ++i) {
      Exponent a = e.summand_length(j), b = f.summand_length(i);
      if (a.is_infinite() && b.is_infinite()) {
        ++out.h0.free;
      } else if (a.is_infinite()) {
        out.h0.torsion.push_back(b.finite());
      } else if (b.is_infinite()) {
        // no nonzero maps from torsion into free, and no extensions either
      } else {
        Rational m = min(a.finite(), b.finite());
        out.h0.torsion.push_back(m);
        out.h1.torsion.push_back(m);
      }
    }
  }
  out.h0.canonicalize();
  out.h1.canonicalize();
  return out;
}

// Minimal valuation of a degree-0 map per (target summand i, source summand
// j); +inf marks pairs where only the zero map exists.
inline std::vector<std::vector<Exponent>> hom_min_valuations(const EqBarcode& e, const EqBarcode& f) {
  std::vector<std::vector<Exponent>> out(static_cast<std::size_t>(f.summands()),
                                         std::vector<Exponent>(static_cast<std::size_t>(e.summands()), Exponent(Rational(0))));
  for (long i = 0; i < f.summands(); ++i) {
    for (long j = 0; j < e.summands(); ++j) {
      Exponent a = e.summand_length(j), b = f.summand_length(i);
      Exponent& v = out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (a.is_infinite()) {
        v = Exponent(Rational(0));
      } else if (b.is_infinite()) {
        v = Exponent::infinity();
      } else {
        Rational d = b.finite() - a.finite();
        v = Exponent(d.sign() > 0 ? d : Rational(0));
      }
    }
  }
  return out;
}

// --- module maps -------------------------------------------------------------

// Degree-preserving map between equivariant barcodes. entries(i, j) is the
// component from source summand j into target summand i, stored as the exact
// canonical representative: exponents below the target length, valuation at
// least max(0, b-a) on torsion-to-torsion blocks, zero into free targets from
// torsion sources.
template <class K>
struct ModuleMap {
  EqBarcode source, target;
  int degree = 0;
  Mat<K> entries;

  static ModuleMap zero(const EqBarcode& src, const EqBarcode& tgt, int degree = 0) {
    return {src, tgt, degree, zero_matrix<K>(tgt.summands(), src.summands(), Exponent::infinity())};
  }
  static ModuleMap identity(const EqBarcode& e) { return tpow_identity(e, Rational(0)); }
  // T^a * id
  static ModuleMap tpow_identity(const EqBarcode& e, const Rational& a) {
    ModuleMap m = zero(e, e);
    for (long i = 0; i < e.summands(); ++i)
      m.entries(i, i) = canonical_entry(tpow<K>(a), e.summand_length(i));
    return m;
  }

  // Reduce mod T^(target length): drop exponents at or above it.
  static NovikovScalar<K> canonical_entry(const NovikovScalar<K>& s, Exponent target_len) {
    if (!s.cutoff().is_infinite()) throw DomainError("map entries must be exact representatives");
    if (target_len.is_infinite()) return s;
    NovikovScalar<K> out = NovikovScalar<K>::zero(Exponent::infinity());
    for (const auto& [e, c] : s.terms())
      if (Exponent(e) < target_len) out += NovikovScalar<K>::monomial(c, e);
    return out;
  }

  void canonicalize() {
    for (long i = 0; i < target.summands(); ++i)
      for (long j = 0; j < source.summands(); ++j)
        entries(i, j) = canonical_entry(entries(i, j), target.summand_length(i));
  }

  void validate() const {
    if (entries.rows() != target.summands() || entries.cols() != source.summands())
      throw DomainError("map shape mismatch");
    if (degree != 0) return;  // the valuation table constrains honest degree-0 maps only
    auto mins = hom_min_valuations(source, target);
    for (long i = 0; i < target.summands(); ++i) {
      for (long j = 0; j < source.summands(); ++j) {
        const NovikovScalar<K>& s = entries(i, j);
        if (s.is_zero()) continue;
        if (!s.cutoff().is_infinite()) throw DomainError("map entries must be exact representatives");
        Exponent need = mins[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (need.is_infinite()) throw DomainError("nonzero component from torsion into free");
        if (s.valuation() < need) throw DomainError("component valuation below hom minimum");
        Exponent b = target.summand_length(i);
        if (b.is_finite() && !(Exponent(s.terms().back().first) < b))
          throw DomainError("entry not reduced modulo the target length");
      }
    }
  }

  friend bool operator==(const ModuleMap& a, const ModuleMap& b) {
    return a.source == b.source && a.target == b.target && a.degree == b.degree &&
           a.entries == b.entries;
  }

  ModuleMap scaled_tpow(const Rational& a) const {
    ModuleMap out = *this;
    for (long i = 0; i < target.summands(); ++i)
      for (long j = 0; j < source.summands(); ++j)
        out.entries(i, j) = canonical_entry(entries(i, j).shifted(a), target.summand_length(i));
    return out;
  }

  bool is_tpow_identity(const Rational& a) const {
    if (!(source == target)) return false;
    ModuleMap ref = tpow_identity(source, a);
    return entries == ref.entries;
  }
};

template <class K>
ModuleMap<K> compose(const ModuleMap<K>& g, const ModuleMap<K>& f) {
  if (!(f.target == g.source)) throw DomainError("compose: middle objects differ");
  ModuleMap<K> out{f.source, g.target, f.degree + g.degree, g.entries * f.entries};
  out.canonicalize();
  return out;
}

// --- cone ---------------------------------------------------------------------

// Two-term complex [E -> F] in degrees -1, 0: kernel and cokernel as
// equivariant barcodes. Exact representatives throughout, so cutoff +inf only.
struct Cone {
  EqBarcode h_minus1, h0;
};

namespace detail {

// Diagonal monomial relation columns T^{b_i} for the torsion summands.
template <class K>
Mat<K> torsion_relation_columns(const EqBarcode& e) {
  Mat<K> d = zero_matrix<K>(e.summands(), e.torsion_count(), Exponent::infinity());
  for (long i = 0; i < e.torsion_count(); ++i) d(i, i) = tpow<K>(e.nf.torsion[static_cast<std::size_t>(i)]);
  return d;
}

}  // namespace detail

template <class K>
Cone cone(const ModuleMap<K>& f) {
  if (f.degree != 0) throw DomainError("cone needs a degree-0 map");
  if (f.source.cutoff.is_finite() || f.target.cutoff.is_finite())
    throw DomainError("cone needs cutoff +inf barcodes");
  f.validate();
  const long ns = f.source.summands(), nt = f.target.summands();
  const long rs = f.source.torsion_count(), rt = f.target.torsion_count();

  // cokernel: target generators modulo image columns and target relations
  PresentationModule<K> cok;
  cok.cutoff = Exponent::infinity();
  cok.rel = zero_matrix<K>(ns + rt, nt, Exponent::infinity());
  for (long j = 0; j < ns; ++j)
    for (long i = 0; i < nt; ++i) cok.rel(j, i) = f.entries(i, j);
  for (long i = 0; i < rt; ++i) cok.rel(ns + i, i) = tpow<K>(f.target.nf.torsion[static_cast<std::size_t>(i)]);

  // kernel: x with f(x) in the target relation span, modulo source relations
  Mat<K> dF = detail::torsion_relation_columns<K>(f.target);
  Mat<K> big = zero_matrix<K>(nt, ns + rt, Exponent::infinity());
  big.block(0, 0, nt, ns) = f.entries;
  big.block(0, ns, nt, rt) = dF;
  Mat<K> kerBig = kernel_generators(big);
  Mat<K> w = kerBig.topRows(ns);  // generators of the kernel preimage in the source free module

  Mat<K> dE = detail::torsion_relation_columns<K>(f.source);
  Mat<K> c = zero_matrix<K>(ns, w.cols() + rs, Exponent::infinity());
  c.block(0, 0, ns, w.cols()) = w;
  c.block(0, w.cols(), ns, rs) = -dE;
  Mat<K> kerC = kernel_generators(c);
  PresentationModule<K> kerp;
  kerp.cutoff = Exponent::infinity();
  kerp.rel = kerC.topRows(w.cols()).transpose();

  return {EqBarcode{normal_form(kerp), Exponent::infinity()},
          EqBarcode{normal_form(cok), Exponent::infinity()}};
}

}  // namespace nvk
