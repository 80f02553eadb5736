#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nvk/barcode.hpp"
#include "nvk/error.hpp"
#include "nvk/exponent.hpp"
#include "nvk/metrics.hpp"
#include "nvk/module.hpp"
#include "nvk/novikov.hpp"
#include "nvk/rational.hpp"

namespace nvk {

enum class BaseKind { pt, interval, circle };

// Piecewise linear function with exact rational breakpoints. The circle has
// circumference 1 and positions in [0, 1) closing up cyclically; an interval
// carries its endpoints and the breakpoints must span it; pt holds one value.
struct PLFunction {
  BaseKind base = BaseKind::pt;
  Rational x0, x1;  // interval endpoints, ignored for pt and circle
  std::vector<Rational> xs;
  std::vector<Rational> vs;

  static PLFunction point(Rational v) {
    PLFunction f;
    f.base = BaseKind::pt;
    f.xs = {Rational(0)};
    f.vs = {std::move(v)};
    return f;
  }

  static PLFunction on_interval(Rational a, Rational b, std::vector<Rational> xs, std::vector<Rational> vs) {
    PLFunction f;
    f.base = BaseKind::interval;
    f.x0 = std::move(a);
    f.x1 = std::move(b);
    f.xs = std::move(xs);
    f.vs = std::move(vs);
    f.validate();
    return f;
  }

  static PLFunction on_circle(std::vector<Rational> xs, std::vector<Rational> vs) {
    PLFunction f;
    f.base = BaseKind::circle;
    f.xs = std::move(xs);
    f.vs = std::move(vs);
    f.validate();
    return f;
  }

  long size() const { return static_cast<long>(xs.size()); }

  friend bool operator==(const PLFunction&, const PLFunction&) = default;

  void validate() const {
    if (xs.empty() || xs.size() != vs.size()) throw DomainError("breakpoint and value counts disagree");
    switch (base) {
      case BaseKind::pt:
        if (xs.size() != 1) throw DomainError("pt base carries a single value");
        break;
      case BaseKind::interval:
        if (!(x0 < x1)) throw DomainError("interval endpoints out of order");
        if (xs.size() < 2 || xs.front() != x0 || xs.back() != x1)
          throw DomainError("breakpoints must span the interval");
        for (std::size_t i = 0; i + 1 < xs.size(); ++i)
          if (!(xs[i] < xs[i + 1])) throw DomainError("breakpoints not strictly increasing");
        break;
      case BaseKind::circle:
        for (const Rational& x : xs)
          if (x.sign() < 0 || !(x < Rational(1))) throw DomainError("circle positions live in [0, 1)");
        for (std::size_t i = 0; i + 1 < xs.size(); ++i)
          if (!(xs[i] < xs[i + 1])) throw DomainError("breakpoints not strictly increasing");
        break;
    }
  }

  Rational evaluate(Rational x) const {
    if (base == BaseKind::pt) return vs[0];
    if (base == BaseKind::interval) {
      if (x < x0 || x1 < x) throw DomainError("evaluation outside the interval");
      auto it = std::upper_bound(xs.begin(), xs.end(), x);
      if (it == xs.begin()) return vs.front();
      long i = static_cast<long>(it - xs.begin()) - 1;
      if (i + 1 == size()) return vs.back();
      return interp(xs[i], vs[i], xs[i + 1], vs[i + 1], x);
    }
    x = x - x.floor();  // reduce mod the circumference
    if (size() == 1) return vs[0];
    if (x < xs.front()) x += Rational(1);
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    long i = static_cast<long>(it - xs.begin()) - 1;
    if (i + 1 == size()) return interp(xs[i], vs[i], xs.front() + Rational(1), vs.front(), x);
    return interp(xs[i], vs[i], xs[i + 1], vs[i + 1], x);
  }

  Rational min_value() const { return *std::min_element(vs.begin(), vs.end()); }
  Rational max_value() const { return *std::max_element(vs.begin(), vs.end()); }
  bool is_constant() const {
    return std::all_of(vs.begin(), vs.end(), [&](const Rational& v) { return v == vs[0]; });
  }

 private:
  static Rational interp(const Rational& xa, const Rational& va, const Rational& xb, const Rational& vb,
                         const Rational& x) {
    return va + (vb - va) * (x - xa) / (xb - xa);
  }
};

namespace detail {

template <class F>
PLFunction pl_combine(const PLFunction& f, const PLFunction& g, F&& op) {
  f.validate();
  g.validate();
  if (f.base != g.base) throw DomainError("generating functions live over different bases");
  if (f.base == BaseKind::interval && (f.x0 != g.x0 || f.x1 != g.x1))
    throw DomainError("interval endpoints differ");
  if (f.base == BaseKind::pt) return PLFunction::point(op(f.vs[0], g.vs[0]));
  std::vector<Rational> xs = f.xs;
  xs.insert(xs.end(), g.xs.begin(), g.xs.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  PLFunction out;
  out.base = f.base;
  out.x0 = f.x0;
  out.x1 = f.x1;
  out.xs = xs;
  for (const Rational& x : xs) out.vs.push_back(op(f.evaluate(x), g.evaluate(x)));
  out.validate();
  return out;
}

}  // namespace detail

inline PLFunction operator+(const PLFunction& f, const PLFunction& g) {
  return detail::pl_combine(f, g, [](const Rational& a, const Rational& b) { return a + b; });
}

inline PLFunction operator-(const PLFunction& f, const PLFunction& g) {
  return detail::pl_combine(f, g, [](const Rational& a, const Rational& b) { return a - b; });
}

// Generic position: no flat segment, and all strict local extremum values
// pairwise distinct. Interval endpoints count as one-sided extrema. Constants
// fail (every segment is flat); pt is vacuously generic.
inline bool is_generic(const PLFunction& f) {
  f.validate();
  if (f.base == BaseKind::pt) return true;
  const long n = f.size();
  const bool cyclic = f.base == BaseKind::circle;
  const long segs = cyclic ? n : n - 1;
  if (cyclic && n == 1) return false;
  for (long i = 0; i < segs; ++i)
    if (f.vs[i] == f.vs[(i + 1) % n]) return false;
  std::vector<Rational> ext;
  for (long i = 0; i < n; ++i) {
    bool extremum;
    if (!cyclic && (i == 0 || i == n - 1)) {
      extremum = true;
    } else {
      int in = (f.vs[i] - f.vs[(i + n - 1) % n]).sign();
      int out = (f.vs[(i + 1) % n] - f.vs[i]).sign();
      extremum = in != out;
    }
    if (extremum) ext.push_back(f.vs[i]);
  }
  std::sort(ext.begin(), ext.end());
  return std::adjacent_find(ext.begin(), ext.end()) == ext.end();
}

// Deterministic shear: adds (i+1) * delta to the i-th value with delta scaled
// down until the result is generic. Each value moves by less than magnitude.
// Every colliding pair rules out a single delta, so n^2 + 2 attempts suffice.
inline PLFunction perturb(const PLFunction& f, const Rational& magnitude) {
  f.validate();
  if (!(Rational(0) < magnitude)) throw DomainError("perturbation magnitude must be positive");
  if (f.base == BaseKind::pt || is_generic(f)) return f;
  if (f.base == BaseKind::circle && f.size() == 1)
    throw DomainError("a single-vertex circle is constant and has no generic perturbation");
  const long n = f.size();
  for (long k = 1; k <= n * n + 2; ++k) {
    Rational delta = magnitude / Rational(n + 1) / Rational(k);
    PLFunction cand = f;
    for (long i = 0; i < n; ++i) cand.vs[i] += Rational(i + 1) * delta;
    if (is_generic(cand)) return cand;
  }
  throw std::logic_error("perturbation failed to reach a generic function");
}

// A generating function presents a sheaf on base x R by its epigraph; every
// module-level computation here needs only the function itself.
struct GFObject {
  PLFunction f;
  std::string label;
};

// Sublevel persistence. Vertices enter at their value, each monotone segment
// at its larger endpoint; ties break by index, an infinitesimal perturbation
// that settles plateaus and equal critical values deterministically. Degree-0
// bars pair a local minimum with the maximum merging its component, the
// surviving component gives [global min, inf), and a circle adds the
// essential degree-1 bar [global max, inf).
inline PlainBarcode sublevel_persistence(const PLFunction& f) {
  f.validate();
  PlainBarcode out;
  if (f.base == BaseKind::pt) {
    out.bars.push_back({f.vs[0], Exponent::infinity(), 0});
    return out;
  }
  const long n = f.size();
  auto lessv = [&](long i, long j) { return f.vs[i] != f.vs[j] ? f.vs[i] < f.vs[j] : i < j; };
  std::vector<long> parent(n), low(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::iota(low.begin(), low.end(), 0);
  auto find = [&](long i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  struct Edge {
    long a, b, top, idx;
  };
  std::vector<Edge> edges;
  const long m = f.base == BaseKind::circle ? n : n - 1;
  for (long i = 0; i < m; ++i) {
    long a = i, b = (i + 1) % n;
    edges.push_back({a, b, lessv(a, b) ? b : a, i});
  }
  std::sort(edges.begin(), edges.end(), [&](const Edge& x, const Edge& y) {
    if (x.top != y.top) return lessv(x.top, y.top);
    return x.idx < y.idx;
  });
  for (const Edge& e : edges) {
    long ra = find(e.a), rb = find(e.b);
    const Rational& death = f.vs[e.top];
    if (ra == rb) {
      out.bars.push_back({death, Exponent::infinity(), 1});
      continue;
    }
    long keep = lessv(low[ra], low[rb]) ? ra : rb;
    long kill = keep == ra ? rb : ra;
    out.bars.push_back({f.vs[low[kill]], Exponent(death - f.vs[low[kill]]), 0});
    parent[kill] = keep;
  }
  long r = find(0);
  out.bars.push_back({f.vs[low[r]], Exponent::infinity(), 0});
  out.canonicalize();
  return out;
}

// Hom between the sheaves presented by two generating functions over a common
// base. Sections over {g + c >= f} reduce to sublevel persistence of f - g;
// the bars then induce one equivariant module per cohomological degree.
struct HomReport {
  PLFunction difference;
  PlainBarcode bars;
  GradedEq modules;
};

inline HomReport hom_module_detailed(const GFObject& from, const GFObject& to,
                                     Exponent cutoff = Exponent::infinity()) {
  HomReport r;
  r.difference = from.f - to.f;
  r.bars = sublevel_persistence(r.difference);
  r.modules = induce_graded(r.bars, cutoff);
  return r;
}

inline GradedEq hom_module(const GFObject& from, const GFObject& to, Exponent cutoff = Exponent::infinity()) {
  return hom_module_detailed(from, to, cutoff).modules;
}

// Valuation of the canonical generator a bar contributes: sections appear
// from parameter max(0, birth) on, equivariant structures start at 0.
inline Rational generator_valuation(const Bar& b) { return max(Rational(0), b.birth); }

// Left: total residue dimension of the derived fiber of Hom(from, to), i.e.
// tor0 + tor1 summed over degrees. Right: critical points of f - g, the
// breakpoints whose slope changes sign (1 for a pt base). Graph-transverse
// pairs satisfy lhs == rhs; callers assert the equality.
inline std::pair<long, long> intersection_count_check(const GFObject& from, const GFObject& to) {
  PLFunction h = from.f - to.f;
  if (h.base == BaseKind::interval) throw DomainError("intersection count needs a pt or circle base");
  long lhs = 0;
  for (const auto& [deg, e] : hom_module(from, to)) {
    (void)deg;
    ResidueDims d = base_change_residue(e.presentation<Rational>());
    lhs += d.tor0 + d.tor1;
  }
  if (h.base == BaseKind::pt) return {lhs, 1};
  const long n = h.size();
  std::vector<int> slope_sign(n);
  for (long i = 0; i < n; ++i) {
    slope_sign[i] = (h.vs[(i + 1) % n] - h.vs[i]).sign();
    if (slope_sign[i] == 0) throw DomainError("difference has a flat segment; graphs are not transverse");
  }
  long rhs = 0;
  for (long i = 0; i < n; ++i)
    if (slope_sign[(i + n - 1) % n] != slope_sign[i]) ++rhs;
  return {lhs, rhs};
}

// The flow generated by h moves a generating function by h.
inline GFObject hamiltonian_shift(const GFObject& obj, const PLFunction& h) {
  return GFObject{obj.f + h, obj.label};
}

struct StabilityReport {
  Exponent dist_bound;  // max over degrees of the interleaving upper bound
  Rational osc;         // max h - min h
};

// Continuity of Hom in the Hofer-style metric: shifting one argument by the
// flow of h moves each degree at most osc(h) in the interleaving distance.
inline StabilityReport stability_check(const GFObject& from, const GFObject& to, const PLFunction& h,
                                       Exponent cutoff = Exponent::infinity()) {
  GradedEq before = hom_module(from, to, cutoff);
  GradedEq after = hom_module(hamiltonian_shift(from, h), to, cutoff);
  std::set<int> degrees;
  for (const auto& [d, e] : before) degrees.insert(d);
  for (const auto& [d, e] : after) degrees.insert(d);
  auto piece = [&](const GradedEq& g, int d) {
    auto it = g.find(d);
    return it != g.end() ? it->second : EqBarcode::zero(cutoff);
  };
  Exponent bound = Exponent(Rational(0));
  for (int d : degrees) {
    DistanceReport<Rational> rep = interleaving_distance<Rational>(piece(after, d), piece(before, d));
    bound = max(bound, rep.upper);
  }
  h.validate();
  Rational osc = h.max_value() - h.min_value();
  if (Exponent(osc) < bound) throw std::logic_error("stability bound violated");
  return {bound, osc};
}

// Rank-one local system on the circle over a finite-cutoff ring: classified
// by an element b of positive valuation, with monodromy the unit 1 + b.
template <class K>
struct NovikovLocalSystem {
  NovikovScalar<K> b;

  Exponent cutoff() const { return b.cutoff(); }
  NovikovScalar<K> monodromy() const { return NovikovScalar<K>::one(b.cutoff()) + b; }

  void validate() const {
    if (!b.cutoff().is_finite() || !(Rational(0) < b.cutoff().finite()))
      throw DomainError("local system needs a finite positive cutoff");
    if (!(Exponent(Rational(0)) < b.valuation()))
      throw DomainError("classifying element needs positive valuation");
  }
};

template <class K>
NovikovLocalSystem<K> cl(const NovikovScalar<K>& b) {
  NovikovLocalSystem<K> sys{b};
  sys.validate();
  return sys;
}

template <class K>
NovikovScalar<K> cl_invert(const NovikovLocalSystem<K>& sys) {
  sys.validate();
  return sys.monodromy() - NovikovScalar<K>::one(sys.b.cutoff());
}

template <class K>
bool isomorphic(const NovikovLocalSystem<K>& a, const NovikovLocalSystem<K>& b) {
  a.validate();
  b.validate();
  if (a.cutoff() != b.cutoff()) throw DomainError("local systems at different cutoffs");
  return a.monodromy() == b.monodromy();
}

}  // namespace nvk
