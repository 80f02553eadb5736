#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nvk/barcode.hpp"

namespace nvk {

// c-isomorphism data: alpha: E -> F and beta: F -> E composing to T^eps both
// ways. eps = 0 is an honest isomorphism.
template <class K>
struct Interleaving {
  Exponent epsilon;
  ModuleMap<K> alpha, beta;

  void validate() const {
    if (epsilon.is_infinite()) throw DomainError("interleaving epsilon must be finite");
    if (epsilon.finite().sign() < 0) throw DomainError("interleaving epsilon must be >= 0");
    if (alpha.degree != 0 || beta.degree != 0) throw DomainError("interleaving maps must be degree 0");
    if (!(alpha.source == beta.target) || !(alpha.target == beta.source))
      throw DomainError("interleaving shape mismatch");
    alpha.validate();
    beta.validate();
    if (!compose(beta, alpha).is_tpow_identity(epsilon.finite()))
      throw DomainError("beta*alpha is not T^eps id on the source");
    if (!compose(alpha, beta).is_tpow_identity(epsilon.finite()))
      throw DomainError("alpha*beta is not T^eps id on the target");
  }
};

template <class K>
bool check_c_isomorphism(const EqBarcode& e, const EqBarcode& f, const Interleaving<K>& cand) {
  if (!(cand.alpha.source == e) || !(cand.alpha.target == f)) return false;
  try {
    cand.validate();
  } catch (const DomainError&) {
    return false;
  }
  return true;
}

// Weak (a,b)-isomorphism: two pairs of maps agreeing after T^a / T^b scaling,
// each pair composing to T^(a+b) on its side.
template <class K>
struct WeakInterleaving {
  Exponent a, b;
  ModuleMap<K> alpha, delta;  // E -> F
  ModuleMap<K> beta, gamma;   // F -> E

  void validate() const {
    if (a.is_infinite() || b.is_infinite()) throw DomainError("weak shifts must be finite");
    if (a.finite().sign() < 0 || b.finite().sign() < 0) throw DomainError("weak shifts must be >= 0");
    for (const ModuleMap<K>* m : {&alpha, &delta}) {
      m->validate();
      if (!(m->source == alpha.source) || !(m->target == alpha.target))
        throw DomainError("weak data shape mismatch");
    }
    for (const ModuleMap<K>* m : {&beta, &gamma}) {
      m->validate();
      if (!(m->source == alpha.target) || !(m->target == alpha.source))
        throw DomainError("weak data shape mismatch");
    }
    Rational s = a.finite() + b.finite();
    if (!compose(beta, alpha).is_tpow_identity(s)) throw DomainError("beta*alpha is not T^(a+b) id");
    if (!compose(delta, gamma).is_tpow_identity(s)) throw DomainError("delta*gamma is not T^(a+b) id");
    if (!(alpha.scaled_tpow(a.finite()) == delta.scaled_tpow(a.finite())))
      throw DomainError("T^a alpha differs from T^a delta");
    if (!(beta.scaled_tpow(b.finite()) == gamma.scaled_tpow(b.finite())))
      throw DomainError("T^b beta differs from T^b gamma");
  }
};

// A weak (a,b)-isomorphism yields a strong 2(a+b)-isomorphism: the pair
// (T^(a+b) alpha, beta) works, using T^(a+b) alpha = T^(a+b) delta and then
// delta gamma = T^(a+b) id on the target side.
template <class K>
Interleaving<K> weak_to_strong(const WeakInterleaving<K>& w) {
  w.validate();
  Rational s = w.a.finite() + w.b.finite();
  Interleaving<K> out{Exponent(s + s), w.alpha.scaled_tpow(s), w.beta};
  out.validate();
  return out;
}

// Measures the torsion order of cone(alpha) for a validated eps-interleaving
// and enforces the 3*eps bound; exceeding it means the caller handed in data
// this implementation considers impossible.
template <class K>
Exponent cone_torsion_of_interleaving(const Interleaving<K>& i) {
  i.validate();
  Cone c = cone(i.alpha);
  Exponent measured = max(torsion_order(c.h_minus1.nf), torsion_order(c.h0.nf));
  Rational bound = i.epsilon.finite() * Rational(3);
  if (Exponent(bound) < measured)
    throw std::logic_error("cone torsion exceeds 3*eps: implementation bug");
  return measured;
}

namespace detail {

// Bottleneck feasibility with deletions, via the standard diagonal
// augmentation: left = A items + B diagonal slots, right = B items + A
// diagonal slots; diagonal-diagonal edges are free. A perfect matching exists
// iff every non-deletable item can be covered. Returns the matched (i, j)
// pairs on success.
inline std::optional<std::vector<std::pair<long, long>>> bottleneck_matching(
    long na, long nb, const std::function<bool(long, long)>& can_match,
    const std::function<bool(long)>& can_del_a, const std::function<bool(long)>& can_del_b) {
  const long nl = na + nb, nr = nb + na;
  std::vector<std::vector<long>> adj(static_cast<std::size_t>(nl));
  for (long i = 0; i < na; ++i) {
    for (long j = 0; j < nb; ++j)
      if (can_match(i, j)) adj[static_cast<std::size_t>(i)].push_back(j);
    if (can_del_a(i)) adj[static_cast<std::size_t>(i)].push_back(nb + i);
  }
  for (long j = 0; j < nb; ++j) {
    auto& row = adj[static_cast<std::size_t>(na + j)];
    if (can_del_b(j)) row.push_back(j);
    for (long i = 0; i < na; ++i) row.push_back(nb + i);
  }
  std::vector<long> match_right(static_cast<std::size_t>(nr), -1);
  std::vector<char> seen;
  std::function<bool(long)> augment = [&](long u) -> bool {
    for (long v : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = 1;
      if (match_right[static_cast<std::size_t>(v)] < 0 || augment(match_right[static_cast<std::size_t>(v)])) {
        match_right[static_cast<std::size_t>(v)] = u;
        return true;
      }
    }
    return false;
  };
  long size = 0;
  for (long u = 0; u < nl; ++u) {
    seen.assign(static_cast<std::size_t>(nr), 0);
    if (augment(u)) ++size;
  }
  if (size != nl) return std::nullopt;
  std::vector<std::pair<long, long>> pairs;
  for (long j = 0; j < nb; ++j)
    if (match_right[static_cast<std::size_t>(j)] >= 0 && match_right[static_cast<std::size_t>(j)] < na)
      pairs.push_back({match_right[static_cast<std::size_t>(j)], j});
  return pairs;
}

}  // namespace detail

template <class K>
struct DistanceReport {
  Exponent lower, upper;
  bool exact = false;
  std::optional<Interleaving<K>> witness;

  std::string str() const {
    return "d_I lower=" + lower.str() + " upper=" + upper.str() + " exact=" + (exact ? "true" : "false");
  }
};

namespace detail {

// Torsion-summand matching feasibility at threshold eps: matching a to b
// costs |a-b|, deleting a summand costs its full length.
inline std::optional<std::vector<std::pair<long, long>>> eq_matching(
    const std::vector<Rational>& a, const std::vector<Rational>& b, const Rational& eps) {
  auto cost_ok = [&](long i, long j) {
    Rational d = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)];
    return !(eps < d.abs());
  };
  auto del_a = [&](long i) { return !(eps < a[static_cast<std::size_t>(i)]); };
  auto del_b = [&](long j) { return !(eps < b[static_cast<std::size_t>(j)]); };
  return bottleneck_matching(static_cast<long>(a.size()), static_cast<long>(b.size()), cost_ok, del_a, del_b);
}

// Rank-function feasibility of an eps-interleaving: both inequalities
// N_E(t+eps) <= N_F(t) and N_F(t+eps) <= N_E(t) on the breakpoint grid.
inline bool rank_feasible(const NormalForm& e, const NormalForm& f, const Rational& eps) {
  std::vector<Rational> grid{Rational(0)};
  for (const Rational& c : e.torsion) {
    grid.push_back(c);
    if (!((c - eps).sign() < 0)) grid.push_back(c - eps);
  }
  for (const Rational& c : f.torsion) {
    grid.push_back(c);
    if (!((c - eps).sign() < 0)) grid.push_back(c - eps);
  }
  for (const Rational& t : grid) {
    if (rank_function(e, t + eps) > rank_function(f, t)) return false;
    if (rank_function(f, t + eps) > rank_function(e, t)) return false;
  }
  return true;
}

}  // namespace detail

// Interleaving distance between equivariant barcodes. The upper bound is the
// optimal bottleneck matching value with a constructed witness; the lower
// bound is certified by rank-function inequalities. Both thresholds move only
// at candidate values {|a-b|, a, b}, so binary search over that grid is
// exact. At a finite shared cutoff, values at or beyond the cutoff are
// reported as +inf.
template <class K>
DistanceReport<K> interleaving_distance(const EqBarcode& e, const EqBarcode& f) {
  Exponent cutoff = join_cutoffs(e.cutoff, f.cutoff);
  DistanceReport<K> out;
  const std::vector<Rational>&a = e.nf.torsion, &b = f.nf.torsion;

  std::vector<Rational> cand{Rational(0)};
  for (const Rational& x : a) cand.push_back(x);
  for (const Rational& y : b) cand.push_back(y);
  for (const Rational& x : a)
    for (const Rational& y : b) cand.push_back((x - y).abs());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  auto first_feasible = [&](const std::function<bool(const Rational&)>& ok) -> std::optional<Rational> {
    if (!ok(cand.back())) return std::nullopt;
    std::size_t lo = 0, hi = cand.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (ok(cand[mid]))
        hi = mid;
      else
        lo = mid + 1;
    }
    return cand[lo];
  };

  std::optional<Rational> upper, lower;
  if (e.nf.free == f.nf.free) {
    upper = first_feasible([&](const Rational& eps) { return detail::eq_matching(a, b, eps).has_value(); });
    lower = first_feasible([&](const Rational& eps) { return detail::rank_feasible(e.nf, f.nf, eps); });
  }
  out.lower = lower ? Exponent(*lower) : Exponent::infinity();
  out.upper = upper ? Exponent(*upper) : Exponent::infinity();
  if (cutoff.is_finite()) {
    if (!(out.lower < cutoff)) out.lower = Exponent::infinity();
    if (!(out.upper < cutoff)) out.upper = Exponent::infinity();
  }
  out.exact = out.lower == out.upper;

  if (out.upper.is_finite()) {
    const Rational eps = *upper;
    auto pairs = detail::eq_matching(a, b, eps);
    Interleaving<K> w{Exponent(eps), ModuleMap<K>::zero(e, f), ModuleMap<K>::zero(f, e)};
    for (const auto& [i, j] : *pairs) {
      Rational d = b[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(i)];
      Rational up = d.sign() > 0 ? d : Rational(0);
      w.alpha.entries(j, i) = ModuleMap<K>::canonical_entry(tpow<K>(up), f.summand_length(j));
      w.beta.entries(i, j) = ModuleMap<K>::canonical_entry(tpow<K>(eps - up), e.summand_length(i));
    }
    for (long k = 0; k < e.nf.free; ++k) {
      w.alpha.entries(f.torsion_count() + k, e.torsion_count() + k) = NovikovScalar<K>(1);
      w.beta.entries(e.torsion_count() + k, f.torsion_count() + k) = tpow<K>(eps);
    }
    w.validate();
    out.witness = std::move(w);
  }
  return out;
}

// Hofer pseudo-distance: torsion is invisible over the fraction field, and
// matching free summands carry no relative shift, so only the free ranks
// speak.
inline Exponent hofer_distance(const EqBarcode& e, const EqBarcode& f) {
  return e.nf.free == f.nf.free ? Exponent(Rational(0)) : Exponent::infinity();
}

// Non-equivariant bottleneck distance on plain barcodes: births participate,
// matched bars pay max of endpoint shifts, deletion pays the full length,
// rays only ever match rays, and distinct degrees never interact.
inline Exponent plain_distance(const PlainBarcode& x, const PlainBarcode& y) {
  std::vector<int> degrees;
  for (const Bar& b : x.bars) degrees.push_back(b.degree);
  for (const Bar& b : y.bars) degrees.push_back(b.degree);
  std::sort(degrees.begin(), degrees.end());
  degrees.erase(std::unique(degrees.begin(), degrees.end()), degrees.end());

  std::vector<Rational> cand{Rational(0)};
  auto pair_cost = [](const Bar& p, const Bar& q) -> std::optional<Rational> {
    if (p.length.is_infinite() != q.length.is_infinite()) return std::nullopt;
    Rational birth_shift = (p.birth - q.birth).abs();
    if (p.length.is_infinite()) return birth_shift;
    Rational death_shift = ((p.birth + p.length.finite()) - (q.birth + q.length.finite())).abs();
    return max(birth_shift, death_shift);
  };
  for (const Bar& p : x.bars)
    for (const Bar& q : y.bars)
      if (p.degree == q.degree)
        if (auto c = pair_cost(p, q)) cand.push_back(*c);
  for (const Bar& p : x.bars)
    if (p.length.is_finite()) cand.push_back(p.length.finite());
  for (const Bar& q : y.bars)
    if (q.length.is_finite()) cand.push_back(q.length.finite());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  auto feasible = [&](const Rational& eps) {
    for (int deg : degrees) {
      std::vector<Bar> xs, ys;
      for (const Bar& p : x.bars)
        if (p.degree == deg) xs.push_back(p);
      for (const Bar& q : y.bars)
        if (q.degree == deg) ys.push_back(q);
      auto ok = [&](long i, long j) {
        auto c = pair_cost(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]);
        return c && !(eps < *c);
      };
      auto del_x = [&](long i) {
        const Bar& p = xs[static_cast<std::size_t>(i)];
        return p.length.is_finite() && !(eps < p.length.finite());
      };
      auto del_y = [&](long j) {
        const Bar& q = ys[static_cast<std::size_t>(j)];
        return q.length.is_finite() && !(eps < q.length.finite());
      };
      if (!detail::bottleneck_matching(static_cast<long>(xs.size()), static_cast<long>(ys.size()), ok, del_x, del_y))
        return false;
    }
    return true;
  };
  if (!feasible(cand.back())) return Exponent::infinity();
  std::size_t lo = 0, hi = cand.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (feasible(cand[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return Exponent(cand[lo]);
}

// Limit of a Cauchy sequence presented with consecutive witnesses. eps has
// one entry per term: eps[k] bounds the step k -> k+1 for k < N-1, and the
// final entry bounds the remaining tail beyond the last term. Witness alphas
// must be in matching form (at most one nonzero component per torsion row and
// column); the limit follows the matched chains, each contributing
// max_n(length_n - tail_n) when positive. The certificate
// d_I(limit, term n) <= tail_n is re-verified before returning.
template <class K>
EqBarcode cauchy_limit(const std::vector<EqBarcode>& seq, const std::vector<Exponent>& eps,
                       const std::vector<Interleaving<K>>& witnesses) {
  if (seq.empty()) throw DomainError("cauchy_limit needs a nonempty sequence");
  if (eps.size() != seq.size()) throw DomainError("need one eps per term (last entry bounds the tail)");
  if (witnesses.size() + 1 != seq.size()) throw DomainError("need one witness per consecutive pair");
  std::vector<Rational> step(eps.size());
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (eps[k].is_infinite() || eps[k].finite().sign() < 0) throw DomainError("eps entries must be finite and >= 0");
    step[k] = eps[k].finite();
  }
  Exponent cutoff = seq[0].cutoff;
  for (const EqBarcode& t : seq) cutoff = join_cutoffs(cutoff, t.cutoff);
  for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
    if (!check_c_isomorphism(seq[k], seq[k + 1], witnesses[k])) throw DomainError("invalid witnesses");
    if (Exponent(step[k]) < witnesses[k].epsilon) throw DomainError("witness epsilon exceeds the stated bound");
    if (seq[k].nf.free != seq[k + 1].nf.free) throw DomainError("free ranks do not stabilize");
  }

  // matched[k][i] = torsion index in term k+1 that torsion summand i feeds
  std::vector<std::vector<long>> matched(witnesses.size());
  for (std::size_t k = 0; k < witnesses.size(); ++k) {
    const ModuleMap<K>& al = witnesses[k].alpha;
    long rs = seq[k].torsion_count(), rt = seq[k + 1].torsion_count();
    matched[k].assign(static_cast<std::size_t>(rs), -1);
    std::vector<char> row_used(static_cast<std::size_t>(rt), 0);
    for (long j = 0; j < rs; ++j) {
      for (long i = 0; i < rt; ++i) {
        if (al.entries(i, j).is_zero()) continue;
        if (matched[k][static_cast<std::size_t>(j)] >= 0 || row_used[static_cast<std::size_t>(i)])
          throw DomainError("witness alpha is not in matching form");
        matched[k][static_cast<std::size_t>(j)] = i;
        row_used[static_cast<std::size_t>(i)] = 1;
      }
    }
  }

  std::vector<Rational> tail(seq.size());
  Rational acc(0);
  for (std::size_t n = seq.size(); n-- > 0;) {
    acc += step[n];
    tail[n] = acc;
  }

  EqBarcode limit{NormalForm{{}, seq[0].nf.free}, cutoff};
  std::vector<std::vector<char>> consumed(seq.size());
  for (std::size_t n = 0; n < seq.size(); ++n)
    consumed[n].assign(static_cast<std::size_t>(seq[n].torsion_count()), 0);
  for (std::size_t start = 0; start < seq.size(); ++start) {
    for (long i0 = 0; i0 < seq[start].torsion_count(); ++i0) {
      if (consumed[start][static_cast<std::size_t>(i0)]) continue;
      Rational best = seq[start].nf.torsion[static_cast<std::size_t>(i0)] - tail[start];
      long i = i0;
      for (std::size_t n = start; n < seq.size(); ++n) {
        consumed[n][static_cast<std::size_t>(i)] = 1;
        Rational v = seq[n].nf.torsion[static_cast<std::size_t>(i)] - tail[n];
        best = max(best, v);
        if (n + 1 >= seq.size() || matched[n][static_cast<std::size_t>(i)] < 0) break;
        i = matched[n][static_cast<std::size_t>(i)];
      }
      if (best.sign() > 0) limit.nf.torsion.push_back(best);
    }
  }
  limit.nf.canonicalize();

  for (std::size_t n = 0; n < seq.size(); ++n) {
    DistanceReport<K> r = interleaving_distance<K>(limit, seq[n]);
    if (Exponent(tail[n]) < r.upper) throw DomainError("certificate violated: limit too far from term " + std::to_string(n));
  }
  return limit;
}

// Lift of a compatible system alpha_j = T^(theta_j) * common map: the
// valuation-normalized representative taken from the smallest theta.
template <class K>
ModuleMap<K> limit_lift(const std::vector<ModuleMap<K>>& alphas, const std::vector<Exponent>& thetas) {
  if (alphas.empty() || alphas.size() != thetas.size()) throw DomainError("limit_lift needs matching nonempty lists");
  std::vector<Rational> th(thetas.size());
  for (std::size_t j = 0; j < thetas.size(); ++j) {
    if (thetas[j].is_infinite() || thetas[j].finite().sign() < 0) throw DomainError("thetas must be finite and >= 0");
    th[j] = thetas[j].finite();
  }
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    if (!(alphas[j].source == alphas[0].source) || !(alphas[j].target == alphas[0].target) ||
        alphas[j].degree != alphas[0].degree)
      throw DomainError("limit_lift maps must share shape");
    alphas[j].validate();
  }
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    for (std::size_t jp = j + 1; jp < alphas.size(); ++jp) {
      if (th[j] < th[jp]) throw DomainError("incompatible system: thetas must be non-increasing");
      if (!(alphas[jp].scaled_tpow(th[j] - th[jp]) == alphas[j]))
        throw DomainError("incompatible system: T-shift relation fails");
    }
  }
  std::size_t last = alphas.size() - 1;
  ModuleMap<K> lift = alphas[last];
  try {
    for (long i = 0; i < lift.entries.rows(); ++i)
      for (long j = 0; j < lift.entries.cols(); ++j)
        lift.entries(i, j) = lift.entries(i, j).shifted_down(th[last]);
  } catch (const DomainError&) {
    throw DomainError("incompatible system: representative valuation below theta");
  }
  for (std::size_t j = 0; j < alphas.size(); ++j)
    if (!(lift.scaled_tpow(th[j]) == alphas[j]))
      throw DomainError("incompatible system: lift does not reproduce alpha_j");
  return lift;
}

}  // namespace nvk
