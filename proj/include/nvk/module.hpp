#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nvk/eigen_support.hpp"
#include "nvk/error.hpp"
#include "nvk/novikov.hpp"

namespace nvk {

// Finitely presented module over the ring at a fixed cutoff, as the cokernel
// of the relation matrix acting on the free module of rank cols: generators
// are indexed by columns, each row is one relation among them.
template <class K>
struct PresentationModule {
  Mat<K> rel;
  Exponent cutoff = Exponent::infinity();

  Eigen::Index relations() const { return rel.rows(); }
  Eigen::Index generators() const { return rel.cols(); }

  void validate() const {
    if (cutoff.is_finite() && cutoff.finite().sign() <= 0) throw DomainError("cutoff must be positive");
    for (Eigen::Index i = 0; i < rel.rows(); ++i)
      for (Eigen::Index j = 0; j < rel.cols(); ++j)
        if (!(rel(i, j).cutoff() == cutoff)) throw DomainError("presentation entries must share the cutoff");
  }
};

// Elementary-divisor data: direct sum of cyclic torsion modules (lengths
// sorted descending) plus a free part. At a finite cutoff every generator is
// torsion of length <= cutoff and free stays 0; free parts only arise at
// cutoff +inf.
struct NormalForm {
  std::vector<Rational> torsion;
  long free = 0;

  friend bool operator==(const NormalForm& a, const NormalForm& b) = default;

  void canonicalize() { std::sort(torsion.begin(), torsion.end(), [](auto& x, auto& y) { return y < x; }); }

  bool is_zero() const { return torsion.empty() && free == 0; }
  long summands() const { return static_cast<long>(torsion.size()) + free; }

  // "torsion: [c1, c2, ...], free: r"
  std::string str() const {
    std::string out = "torsion: [";
    for (std::size_t i = 0; i < torsion.size(); ++i) {
      if (i) out += ", ";
      out += torsion[i].str();
    }
    out += "], free: " + std::to_string(free);
    return out;
  }
};

// Formal sum of a finitely presented part and almost-zero markers (copies of
// the residue-of-maximal-ideal module, which no finite presentation hits).
struct FormalSum {
  NormalForm nf;
  long almost_zero = 0;
};
struct AlmostParts {
  long almost_zero;        // the part killed by every positive power of T
  NormalForm finitely_presented;
};

// ---------------------------------------------------------------------------
// Diagonalization by invertible row/column operations. Pivots are chosen by
// minimal valuation (ties: lowest row, then lowest column) and rows/columns
// are cleared division-free: with pivot p = T^c*w_p and target q = T^{c'}*w_q
// (c' >= c), row_i := w_p*row_i - T^(c'-c)*w_q*row_pivot zeroes the target
// exactly; w_p has valuation 0, so the operation is invertible.

template <class K>
struct Diagonalization {
  Mat<K> a;                                              // permuted-diagonal result
  std::optional<Mat<K>> v;                               // column-op tracker: ker(A) = span of v's pivotless columns
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pivots;  // positions in a

  std::vector<Rational> pivot_valuations() const {
    std::vector<Rational> out;
    for (auto [i, j] : pivots) out.push_back(a(i, j).valuation().finite());
    return out;
  }
};

template <class K>
Diagonalization<K> diagonalize(Mat<K> a, bool track_cols) {
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Exponent cutoff = rows > 0 && cols > 0 ? a(0, 0).cutoff() : Exponent::infinity();
  Diagonalization<K> d;
  if (track_cols) d.v = identity_matrix<K>(cols, cutoff);
  std::vector<bool> row_active(rows, true), col_active(cols, true);
  while (true) {
    Eigen::Index pi = -1, pj = -1;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (!row_active[i]) continue;
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!col_active[j] || a(i, j).is_zero()) continue;
        if (pi < 0 || a(i, j).valuation() < a(pi, pj).valuation()) { pi = i; pj = j; }
      }
    }
    if (pi < 0) break;
    const Rational c = a(pi, pj).valuation().finite();
    const NovikovScalar<K> wp = a(pi, pj).shifted_down(c);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i == pi || !row_active[i] || a(i, pj).is_zero()) continue;
      const Rational cq = a(i, pj).valuation().finite();
      const NovikovScalar<K> f = a(i, pj).shifted_down(cq).shifted(cq - c);
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!col_active[j]) continue;
        a(i, j) = wp * a(i, j) - f * a(pi, j);
      }
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (j == pj || !col_active[j] || a(pi, j).is_zero()) continue;
      const Rational cq = a(pi, j).valuation().finite();
      const NovikovScalar<K> f = a(pi, j).shifted_down(cq).shifted(cq - c);
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (!row_active[i] && i != pi) continue;
        a(i, j) = wp * a(i, j) - f * a(i, pj);
      }
      if (d.v) {
        for (Eigen::Index i = 0; i < cols; ++i) (*d.v)(i, j) = wp * (*d.v)(i, j) - f * (*d.v)(i, pj);
      }
    }
    d.pivots.push_back({pi, pj});
    row_active[pi] = false;
    col_active[pj] = false;
  }
  d.a = std::move(a);
  return d;
}

// Columns generating the kernel over the ring. Exact only at cutoff +inf
// (valuation domain); callers pass exact representatives.
template <class K>
Mat<K> kernel_generators(const Mat<K>& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (a(i, j).cutoff().is_finite()) throw DomainError("kernel computation needs exact entries");
  Diagonalization<K> d = diagonalize(a, true);
  std::vector<bool> is_pivot_col(a.cols(), false);
  for (auto [i, j] : d.pivots) is_pivot_col[j] = true;
  Mat<K> ker = zero_matrix<K>(a.cols(), a.cols() - static_cast<Eigen::Index>(d.pivots.size()),
                              Exponent::infinity());
  Eigen::Index out = 0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (is_pivot_col[j]) continue;
    ker.col(out++) = d.v->col(j);
  }
  return ker;
}

// ---------------------------------------------------------------------------

template <class K>
NormalForm normal_form(const PresentationModule<K>& m) {
  m.validate();
  Diagonalization<K> d = diagonalize(m.rel, false);
  NormalForm nf;
  for (const Rational& c : d.pivot_valuations())
    if (c.sign() > 0) nf.torsion.push_back(c);  // unit pivots kill a generator/relation pair
  long unconstrained = m.generators() - static_cast<long>(d.pivots.size());
  if (m.cutoff.is_finite()) {
    for (long i = 0; i < unconstrained; ++i) nf.torsion.push_back(m.cutoff.finite());
  } else {
    nf.free = unconstrained;
  }
  nf.canonicalize();
  return nf;
}

// Predicted rank function of a normal form: free + #{c_i > t}.
inline long rank_function(const NormalForm& nf, const Rational& t) {
  long n = nf.free;
  for (const Rational& c : nf.torsion)
    if (t < c) ++n;
  return n;
}

namespace detail {

// Rank of a dense matrix over the coefficient field.
template <class K>
long field_rank(std::vector<std::vector<K>> m) {
  if (m.empty()) return 0;
  const std::size_t cols = m[0].size();
  long rank = 0;
  for (std::size_t j = 0; j < cols && rank < static_cast<long>(m.size()); ++j) {
    std::size_t piv = m.size();
    for (std::size_t i = rank; i < m.size(); ++i)
      if (!is_zero(m[i][j])) { piv = i; break; }
    if (piv == m.size()) continue;
    std::swap(m[rank], m[piv]);
    K inv = inverse_of(m[rank][j]);
    for (std::size_t i = rank + 1; i < m.size(); ++i) {
      if (is_zero(m[i][j])) continue;
      K f = m[i][j] * inv;
      for (std::size_t k = j; k < cols; ++k) m[i][k] = m[i][k] - f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

inline long lcm_long(long a, long b) { return std::lcm(a, b); }

}  // namespace detail

// Matrix-level rank function: the residue-field dimension of T^t*M modulo the
// maximal ideal, computed from the presentation alone. Terms with exponent
// above t cannot influence generators at level t, so the matrix is truncated
// to exponents <= t first and then diagonalized; only pivots of valuation
// <= t cut the dimension (elimination of the truncated matrix may create
// pivots beyond t, which act trivially at level t).
template <class K>
long rank_function(const PresentationModule<K>& m, const Rational& t) {
  m.validate();
  if (t.sign() < 0 || !(Exponent(t) < m.cutoff)) throw DomainError("rank function needs 0 <= t < cutoff");
  Mat<K> trunc = m.rel;
  for (Eigen::Index i = 0; i < trunc.rows(); ++i) {
    for (Eigen::Index j = 0; j < trunc.cols(); ++j) {
      NovikovScalar<K> kept = NovikovScalar<K>::zero(m.cutoff);
      for (const auto& [e, c] : m.rel(i, j).terms())
        if (!(t < e)) kept += NovikovScalar<K>::monomial(c, e, m.cutoff);
      trunc(i, j) = kept;
    }
  }
  Diagonalization<K> d = diagonalize(std::move(trunc), false);
  long cut = 0;
  for (const Rational& v : d.pivot_valuations())
    if (!(t < v)) ++cut;
  return m.generators() - cut;
}

// Largest a with T^a * id nonzero... torsion order: the least a killing the
// module (+inf when a free part survives, 0 for the zero module).
inline Exponent torsion_order(const NormalForm& nf) {
  if (nf.free > 0) return Exponent::infinity();
  if (nf.torsion.empty()) return Exponent(Rational(0));
  return Exponent(nf.torsion.front());
}

inline AlmostParts almost_parts(const FormalSum& s) {
  if (s.almost_zero < 0) throw DomainError("negative marker count");
  return {s.almost_zero, s.nf};
}
template <class K>
AlmostParts almost_parts(const PresentationModule<K>& m) {
  return {0, normal_form(m)};
}

struct ResidueDims {
  long tor0;
  long tor1;
  friend bool operator==(const ResidueDims&, const ResidueDims&) = default;
};

namespace detail {

// Column echelon by column operations only: returns independent columns
// spanning the column space. Used on the transposed relation matrix to get a
// free basis of the relation submodule.
template <class K>
Mat<K> column_space_basis(Mat<K> a) {
  const Eigen::Index rows = a.rows(), cols = a.cols();
  std::vector<bool> row_used(rows, false), col_active(cols, true);
  std::vector<Eigen::Index> pivot_cols;
  while (true) {
    Eigen::Index pi = -1, pj = -1;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (row_used[i]) continue;
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (!col_active[j] || a(i, j).is_zero()) continue;
        if (pi < 0 || a(i, j).valuation() < a(pi, pj).valuation()) { pi = i; pj = j; }
      }
    }
    if (pi < 0) break;
    const Rational c = a(pi, pj).valuation().finite();
    const NovikovScalar<K> wp = a(pi, pj).shifted_down(c);
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (j == pj || !col_active[j] || a(pi, j).is_zero()) continue;
      const Rational cq = a(pi, j).valuation().finite();
      const NovikovScalar<K> f = a(pi, j).shifted_down(cq).shifted(cq - c);
      for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = wp * a(i, j) - f * a(i, pj);
    }
    row_used[pi] = true;
    col_active[pj] = false;
    pivot_cols.push_back(pj);
  }
  Mat<K> basis = zero_matrix<K>(rows, static_cast<Eigen::Index>(pivot_cols.size()),
                                rows > 0 && cols > 0 ? a(0, 0).cutoff() : Exponent::infinity());
  for (std::size_t k = 0; k < pivot_cols.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = a.col(pivot_cols[k]);
  return basis;
}

template <class K>
std::vector<std::vector<K>> residue_matrix(const Mat<K>& a) {
  std::vector<std::vector<K>> out(static_cast<std::size_t>(a.rows()),
                                  std::vector<K>(static_cast<std::size_t>(a.cols()), K(0)));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = a(i, j).coeff_at(Rational(0));
  return out;
}

}  // namespace detail

// Derived base change to the residue field: (dim Tor_0, dim Tor_1), computed
// from a free resolution 0 -> R -> free^n -> M -> 0 where R is the relation
// submodule (free, basis by column echelon). Shares no code with normal_form.
template <class K>
ResidueDims base_change_residue(const PresentationModule<K>& m) {
  m.validate();
  Mat<K> bt = m.rel.transpose();
  Mat<K> basis = detail::column_space_basis(bt);
  long rho = basis.cols();
  long rank0 = detail::field_rank(detail::residue_matrix(basis));
  return {m.generators() - rank0, rho - rank0};
}

// Base change along the quotient to cutoff c (pre: c below the current one).
template <class K>
NormalForm base_change_truncate(const PresentationModule<K>& m, const Rational& c) {
  m.validate();
  if (c.sign() <= 0 || !(Exponent(c) < m.cutoff)) throw DomainError("truncation level must satisfy 0 < c < cutoff");
  PresentationModule<K> t;
  t.cutoff = Exponent(c);
  t.rel = zero_matrix<K>(m.rel.rows(), m.rel.cols(), t.cutoff);
  for (Eigen::Index i = 0; i < m.rel.rows(); ++i)
    for (Eigen::Index j = 0; j < m.rel.cols(); ++j) t.rel(i, j) = m.rel(i, j).truncated(t.cutoff);
  return normal_form(t);
}

// Base change to the fraction field: the rank of the localized module.
template <class K>
long base_change_rank(const PresentationModule<K>& m) {
  m.validate();
  Diagonalization<K> d = diagonalize(m.rel, false);
  return m.generators() - static_cast<long>(d.pivots.size());
}

}  // namespace nvk
