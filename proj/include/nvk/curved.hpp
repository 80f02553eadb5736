#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nvk/barcode.hpp"
#include "nvk/eigen_support.hpp"

namespace nvk {

namespace detail {

template <class K>
bool is_zero_vec(const Vec<K>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!v(i).is_zero()) return false;
  return true;
}

template <class K>
bool vec_eq(const Vec<K>& a, const Vec<K>& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!(a(i) == b(i))) return false;
  return true;
}

template <class K>
bool mat_eq(const Mat<K>& a, const Mat<K>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (!(a(i, j) == b(i, j))) return false;
  return true;
}

// Membership in the monoid generated by positive rationals, with memoized
// subtraction search. Generators come from a gapping list headed by 0.
class MonoidChecker {
 public:
  explicit MonoidChecker(const std::vector<Rational>& gapping) {
    for (const Rational& g : gapping)
      if (g.sign() > 0) gens_.push_back(g);
  }
  bool contains(const Rational& e) {
    if (e.sign() == 0) return true;
    if (e.sign() < 0) return false;
    auto it = memo_.find(e);
    if (it != memo_.end()) return it->second;
    bool ok = false;
    for (const Rational& g : gens_) {
      if (e < g) continue;
      if (contains(e - g)) {
        ok = true;
        break;
      }
    }
    memo_.emplace(e, ok);
    return ok;
  }

 private:
  std::vector<Rational> gens_;
  std::map<Rational, bool> memo_;
};

// Solves m x = rhs over the coefficient field with pivot columns chosen in
// ascending basis order and free variables pinned to zero, so the support of
// the solution is deterministic. Returns nothing when inconsistent.
template <class K>
std::optional<std::vector<K>> solve_field(std::vector<std::vector<K>> m, std::vector<K> rhs) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows == 0 ? 0 : m[0].size();
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t j = 0; j < cols && r < rows; ++j) {
    std::size_t piv = rows;
    for (std::size_t i = r; i < rows; ++i)
      if (!is_zero(m[i][j])) { piv = i; break; }
    if (piv == rows) continue;
    std::swap(m[piv], m[r]);
    std::swap(rhs[piv], rhs[r]);
    K inv = inverse_of(m[r][j]);
    for (std::size_t jj = j; jj < cols; ++jj) m[r][jj] = m[r][jj] * inv;
    rhs[r] = rhs[r] * inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || is_zero(m[i][j])) continue;
      K f = m[i][j];
      for (std::size_t jj = j; jj < cols; ++jj) m[i][jj] = m[i][jj] - f * m[r][jj];
      rhs[i] = rhs[i] - f * rhs[r];
    }
    pivot_col.push_back(j);
    ++r;
  }
  for (std::size_t i = r; i < rows; ++i)
    if (!is_zero(rhs[i])) return std::nullopt;
  std::vector<K> x(cols, K(0));
  for (std::size_t k = 0; k < pivot_col.size(); ++k) x[pivot_col[k]] = rhs[k];
  return x;
}

}  // namespace detail

// Finite free curved dga over the Novikov ring: basis with integer degrees,
// structure-constant multiplication, degree +1 differential, and a
// positive-valuation curvature m0 satisfying d(m0) = 0 and d^2 = [m0, -].
// All arithmetic happens at the stated cutoff and every exponent must lie in
// the monoid generated by the gapping.
template <class K>
struct CurvedDGA {
  std::vector<int> degrees;
  std::vector<std::string> names;           // optional labels for io; empty or one per basis element
  std::vector<std::vector<Vec<K>>> mult;    // mult[i][j] = basis_i * basis_j
  Mat<K> diff;                              // column j = d(basis_j)
  Vec<K> curvature;                         // degree-2, valuation > 0
  Vec<K> unit;                              // coefficients of the algebra unit
  Exponent cutoff = Exponent::infinity();
  std::vector<Rational> gapping{Rational(0)};

  long dim() const { return static_cast<long>(degrees.size()); }

  Vec<K> zero_elem() const { return zero_matrix<K>(dim(), 1, cutoff); }
  Vec<K> basis_elem(long i) const {
    Vec<K> v = zero_elem();
    v(i) = NovikovScalar<K>::one(cutoff);
    return v;
  }

  Vec<K> mul(const Vec<K>& u, const Vec<K>& v) const {
    Vec<K> out = zero_elem();
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      if (u(i).is_zero()) continue;
      for (Eigen::Index j = 0; j < v.size(); ++j) {
        if (v(j).is_zero()) continue;
        NovikovScalar<K> c = u(i) * v(j);
        const Vec<K>& t = mult[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        for (Eigen::Index k = 0; k < out.size(); ++k)
          if (!t(k).is_zero()) out(k) += c * t(k);
      }
    }
    return out;
  }

  Vec<K> d(const Vec<K>& u) const {
    Vec<K> out = diff * u;
    return out;
  }

  // True when every nonzero coordinate sits in the given degree.
  bool homogeneous(const Vec<K>& u, int degree) const {
    for (Eigen::Index i = 0; i < u.size(); ++i)
      if (!u(i).is_zero() && degrees[static_cast<std::size_t>(i)] != degree) return false;
    return true;
  }

  void validate() const {
    const long n = dim();
    if (!names.empty() && static_cast<long>(names.size()) != n) throw DomainError("names must be empty or one per basis element");
    if (static_cast<long>(mult.size()) != n) throw DomainError("mult table has wrong size");
    for (const auto& row : mult) {
      if (static_cast<long>(row.size()) != n) throw DomainError("mult table has wrong size");
      for (const Vec<K>& v : row)
        if (v.size() != n) throw DomainError("mult table entry has wrong length");
    }
    if (diff.rows() != n || diff.cols() != n) throw DomainError("diff has wrong shape");
    if (curvature.size() != n || unit.size() != n) throw DomainError("element vector has wrong length");

    if (gapping.empty() || gapping.front().sign() != 0) throw DomainError("gapping must start at 0");
    for (std::size_t k = 0; k + 1 < gapping.size(); ++k)
      if (!(gapping[k] < gapping[k + 1])) throw DomainError("gapping must be strictly increasing");
    for (const Rational& g : gapping)
      if (g.sign() < 0 || !(Exponent(g) < cutoff)) throw DomainError("gapping must live in [0, cutoff)");

    detail::MonoidChecker monoid(gapping);
    auto check_scalar = [&](const NovikovScalar<K>& s) {
      for (const auto& [e, c] : s.terms()) {
        (void)c;
        if (!monoid.contains(e)) throw DomainError("structure constant exponent outside the gapping monoid");
      }
    };
    for (const auto& row : mult)
      for (const Vec<K>& v : row)
        for (Eigen::Index k = 0; k < v.size(); ++k) check_scalar(v(k));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) check_scalar(diff(i, j));
    for (Eigen::Index i = 0; i < n; ++i) check_scalar(curvature(i));

    // grading of the structure maps
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        if (!homogeneous(mult[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                         degrees[static_cast<std::size_t>(i)] + degrees[static_cast<std::size_t>(j)]))
          throw DomainError("product is not degree-additive");
    for (long j = 0; j < n; ++j) {
      Vec<K> dj = diff.col(j);
      if (!homogeneous(dj, degrees[static_cast<std::size_t>(j)] + 1)) throw DomainError("diff is not degree +1");
    }
    if (!homogeneous(curvature, 2)) throw DomainError("curvature must be degree 2");
    for (Eigen::Index i = 0; i < n; ++i)
      if (!curvature(i).is_zero() && !(Exponent(Rational(0)) < curvature(i).valuation()))
        throw DomainError("curvature must have positive valuation");

    // unit laws and d(1) = 0
    if (!homogeneous(unit, 0) || detail::is_zero_vec(unit)) throw DomainError("unit must be a nonzero degree-0 element");
    for (long j = 0; j < n; ++j) {
      Vec<K> e = basis_elem(j);
      if (!detail::vec_eq(mul(unit, e), e) || !detail::vec_eq(mul(e, unit), e))
        throw DomainError("unit law fails on a basis element");
    }
    if (!detail::is_zero_vec(d(unit))) throw DomainError("d(unit) must vanish");

    // associativity on basis triples
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j)
        for (long k = 0; k < n; ++k) {
          Vec<K> lhs = mul(mult[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], basis_elem(k));
          Vec<K> rhs = mul(basis_elem(i), mult[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
          if (!detail::vec_eq(lhs, rhs)) throw DomainError("multiplication is not associative");
        }

    // signed Leibniz rule on basis pairs
    for (long i = 0; i < n; ++i)
      for (long j = 0; j < n; ++j) {
        Vec<K> lhs = d(mult[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        Vec<K> rhs = mul(d(basis_elem(i)), basis_elem(j));
        Vec<K> second = mul(basis_elem(i), d(basis_elem(j)));
        const bool odd = (degrees[static_cast<std::size_t>(i)] % 2) != 0;
        for (Eigen::Index k = 0; k < n; ++k) rhs(k) += odd ? -second(k) : second(k);
        if (!detail::vec_eq(lhs, rhs)) throw DomainError("Leibniz rule fails");
      }

    // curvature axioms: d(m0) = 0 and d^2 = [m0, -]
    if (!detail::is_zero_vec(d(curvature))) throw DomainError("curvature is not closed");
    for (long j = 0; j < n; ++j) {
      Vec<K> e = basis_elem(j);
      Vec<K> lhs = d(d(e));
      Vec<K> rhs = mul(curvature, e);
      Vec<K> second = mul(e, curvature);
      for (Eigen::Index k = 0; k < n; ++k) rhs(k) -= second(k);
      if (!detail::vec_eq(lhs, rhs)) throw DomainError("d^2 differs from the curvature commutator");
    }
  }
};

template <class K>
struct MaurerCartanElement {
  Vec<K> b;
};

// Obstruction to continuing the level-by-level solve: the residue class of
// the residual at the failing energy level, nonzero in H^2 of the residue
// dga.
template <class K>
struct ObstructionReport {
  Rational level;
  std::vector<K> kappa_class;
};

// Optional higher operation for the residual evaluator: an arity-i tensor
// mapping input basis tuples to output elements. Only the evaluator consumes
// these; they are not part of the dga structure.
template <class K>
struct HigherOp {
  int arity = 3;
  std::map<std::vector<long>, Vec<K>> entries;
};

// curvature + d(b) + b*b (+ optional higher terms m_i(b,...,b)), exact at the
// cutoff. Vanishes exactly when b is a Maurer-Cartan element.
template <class K>
Vec<K> mc_residual(const CurvedDGA<K>& a, const Vec<K>& b, const std::vector<HigherOp<K>>& higher = {}) {
  if (b.size() != a.dim()) throw DomainError("element vector has wrong length");
  if (!a.homogeneous(b, 1)) throw DomainError("Maurer-Cartan input must be degree 1");
  Vec<K> r = a.d(b);
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) += a.curvature(i);
  Vec<K> sq = a.mul(b, b);
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) += sq(i);
  for (const HigherOp<K>& op : higher) {
    if (op.arity < 3) throw DomainError("higher operations start at arity 3");
    for (const auto& [tuple, out] : op.entries) {
      if (static_cast<int>(tuple.size()) != op.arity || out.size() != a.dim())
        throw DomainError("malformed higher-operation tensor");
      NovikovScalar<K> c = NovikovScalar<K>::one(a.cutoff);
      for (long idx : tuple) c = c * b(idx);
      if (c.is_zero()) continue;
      for (Eigen::Index i = 0; i < r.size(); ++i)
        if (!out(i).is_zero()) r(i) += c * out(i);
    }
  }
  return r;
}

template <class K>
bool is_maurer_cartan(const CurvedDGA<K>& a, const Vec<K>& b) {
  return detail::is_zero_vec(mc_residual(a, b));
}

namespace detail {

// Residue coefficient of an element at energy level c, restricted to the
// given basis indices.
template <class K>
std::vector<K> level_slice(const Vec<K>& v, const Rational& c, const std::vector<long>& idx) {
  std::vector<K> out;
  out.reserve(idx.size());
  for (long i : idx) out.push_back(v(i).coeff_at(c));
  return out;
}

template <class K>
std::vector<long> degree_indices(const CurvedDGA<K>& a, int degree) {
  std::vector<long> idx;
  for (long i = 0; i < a.dim(); ++i)
    if (a.degrees[static_cast<std::size_t>(i)] == degree) idx.push_back(i);
  return idx;
}

// Residue differential d0: degree p part of the valuation-0 piece of d.
template <class K>
std::vector<std::vector<K>> residue_diff(const CurvedDGA<K>& a, const std::vector<long>& rows,
                                         const std::vector<long>& cols) {
  std::vector<std::vector<K>> m(rows.size(), std::vector<K>(cols.size(), K(0)));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) m[i][j] = a.diff(rows[i], cols[j]).coeff_at(Rational(0));
  return m;
}

}  // namespace detail

// Solves (d+b)^2 = 0 energy level by energy level. At each level the
// residual's leading residue class must be d0-exact in degree 2; the chosen
// degree-1 preimage (pivot-column support, free variables zero) is subtracted
// from b scaled by T^level. Stops when the residual vanishes exactly; a
// non-exact class is returned as the obstruction, verified nonzero in H^2 of
// the residue dga.
template <class K>
std::variant<MaurerCartanElement<K>, ObstructionReport<K>> mc_solve(const CurvedDGA<K>& a) {
  a.validate();
  const std::vector<long> deg1 = detail::degree_indices(a, 1);
  const std::vector<long> deg2 = detail::degree_indices(a, 2);
  const std::vector<long> deg3 = detail::degree_indices(a, 3);
  const std::vector<std::vector<K>> d12 = detail::residue_diff(a, deg2, deg1);
  const std::vector<std::vector<K>> d23 = detail::residue_diff(a, deg3, deg2);
  detail::MonoidChecker monoid(a.gapping);

  Vec<K> b = a.zero_elem();
  Exponent prev = Exponent(Rational(0));
  for (int round = 0; round < 512; ++round) {
    Vec<K> r = mc_residual(a, b);
    if (detail::is_zero_vec(r)) return MaurerCartanElement<K>{b};
    Exponent lev = Exponent::infinity();
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (!r(i).is_zero()) lev = min(lev, r(i).valuation());
    const Rational c = lev.finite();
    if (c.sign() <= 0) throw std::logic_error("residual with non-positive valuation on a validated dga");
    if (round > 0 && !(prev < lev)) throw std::logic_error("energy level failed to increase");
    if (!monoid.contains(c)) throw std::logic_error("residual level escaped the gapping monoid");
    prev = lev;

    std::vector<K> rc = detail::level_slice(r, c, deg2);
    std::optional<std::vector<K>> sol = detail::solve_field(d12, rc);
    if (!sol) {
      // closedness of the class, then independence from the image of d0
      std::vector<K> closed(deg3.size(), K(0));
      for (std::size_t i = 0; i < deg3.size(); ++i)
        for (std::size_t j = 0; j < deg2.size(); ++j) closed[i] = closed[i] + d23[i][j] * rc[j];
      for (const K& v : closed)
        if (!is_zero(v)) throw std::logic_error("obstruction class is not d0-closed");
      std::vector<std::vector<K>> stacked(deg2.size());
      for (std::size_t i = 0; i < deg2.size(); ++i) {
        stacked[i] = d12[i];
        stacked[i].push_back(rc[i]);
      }
      std::vector<std::vector<K>> image(deg2.size());
      for (std::size_t i = 0; i < deg2.size(); ++i) image[i] = d12[i];
      if (detail::field_rank(std::move(stacked)) <= detail::field_rank(std::move(image)))
        throw std::logic_error("obstruction class is exact after all");
      return ObstructionReport<K>{c, rc};
    }
    for (std::size_t j = 0; j < deg1.size(); ++j)
      if (!is_zero((*sol)[j])) b(deg1[j]) -= NovikovScalar<K>::monomial((*sol)[j], c, a.cutoff);
  }
  throw DomainError("Maurer-Cartan solve did not converge within the level budget");
}

// One object of a twisted complex: a graded slot with an internal degree +1
// differential squaring to zero, tagged with its energy offset.
template <class K>
struct TCObject {
  std::vector<int> degrees;
  Mat<K> diff;
  Rational offset;

  long dim() const { return static_cast<long>(degrees.size()); }

  void validate(Exponent /*cutoff*/) const {
    if (diff.rows() != dim() || diff.cols() != dim()) throw DomainError("object differential has wrong shape");
    for (long i = 0; i < dim(); ++i)
      for (long j = 0; j < dim(); ++j)
        if (!diff(i, j).is_zero() &&
            degrees[static_cast<std::size_t>(i)] != degrees[static_cast<std::size_t>(j)] + 1)
          throw DomainError("object differential is not degree +1");
    Mat<K> sq = diff * diff;
    if (!is_zero_matrix(sq)) throw DomainError("object differential does not square to zero");
  }

  friend bool operator==(const TCObject& x, const TCObject& y) {
    return x.degrees == y.degrees && x.offset == y.offset && detail::mat_eq(x.diff, y.diff);
  }
};

// One-sided twisted complex: objects V_0, V_1, ... with strictly increasing
// energy offsets and maps f_ij: V_i -> V_j only for i > j, of total degree +1
// for the convention tot = internal + slot.
template <class K>
struct TwistedComplex {
  std::vector<TCObject<K>> objects;
  std::vector<std::vector<Mat<K>>> maps;  // maps[i][j] defined for j < i
  Exponent cutoff = Exponent::infinity();

  long slots() const { return static_cast<long>(objects.size()); }

  void validate() const {
    if (static_cast<long>(maps.size()) != slots()) throw DomainError("map table has wrong size");
    for (long i = 0; i < slots(); ++i) {
      objects[static_cast<std::size_t>(i)].validate(cutoff);
      if (i > 0 && !(objects[static_cast<std::size_t>(i - 1)].offset < objects[static_cast<std::size_t>(i)].offset))
        throw DomainError("energy offsets must be strictly increasing");
      if (static_cast<long>(maps[static_cast<std::size_t>(i)].size()) != i)
        throw DomainError("map table has wrong size");
      for (long j = 0; j < i; ++j) {
        const Mat<K>& f = maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const TCObject<K>&vi = objects[static_cast<std::size_t>(i)], &vj = objects[static_cast<std::size_t>(j)];
        if (f.rows() != vj.dim() || f.cols() != vi.dim()) throw DomainError("map block has wrong shape");
        for (long r = 0; r < f.rows(); ++r)
          for (long c = 0; c < f.cols(); ++c)
            if (!f(r, c).is_zero() &&
                vj.degrees[static_cast<std::size_t>(r)] + j !=
                    vi.degrees[static_cast<std::size_t>(c)] + i + 1)
              throw DomainError("map block is not total degree +1");
      }
    }
  }

  friend bool operator==(const TwistedComplex& x, const TwistedComplex& y) {
    if (!(x.objects == y.objects) || x.slots() != y.slots() || !(x.cutoff == y.cutoff)) return false;
    for (long i = 0; i < x.slots(); ++i)
      for (long j = 0; j < i; ++j)
        if (!detail::mat_eq(x.maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                            y.maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]))
          return false;
    return true;
  }
};

// Maurer-Cartan residual per (i, j): d_j f_ij + f_ij d_i + sum over j < k < i
// of f_kj f_ik. The complex is honest exactly when all blocks vanish.
template <class K>
std::vector<std::vector<Mat<K>>> tc_residual(const TwistedComplex<K>& t) {
  t.validate();
  std::vector<std::vector<Mat<K>>> res(static_cast<std::size_t>(t.slots()));
  for (long i = 0; i < t.slots(); ++i) {
    for (long j = 0; j < i; ++j) {
      const Mat<K>& f = t.maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      Mat<K> r = t.objects[static_cast<std::size_t>(j)].diff * f + f * t.objects[static_cast<std::size_t>(i)].diff;
      for (long k = j + 1; k < i; ++k) {
        Mat<K> comp = t.maps[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] *
                      t.maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        r += comp;
      }
      res[static_cast<std::size_t>(i)].push_back(std::move(r));
    }
  }
  return res;
}

template <class K>
bool tc_residual_is_zero(const std::vector<std::vector<Mat<K>>>& res) {
  for (const auto& row : res)
    for (const Mat<K>& m : row)
      if (!is_zero_matrix(m)) return false;
  return true;
}

// Totalization of a twisted complex: all generators side by side with total
// degree internal + slot, energy tag = slot offset, and the block matrix
// diag(d_i) + f as differential.
template <class K>
struct Totalization {
  std::vector<int> degrees;      // total degrees
  std::vector<Rational> energy;  // per-generator energy tag
  Mat<K> diff;
  Exponent cutoff = Exponent::infinity();
};

template <class K>
Totalization<K> tc_totalize(const TwistedComplex<K>& t) {
  t.validate();
  std::vector<long> begin(static_cast<std::size_t>(t.slots()) + 1, 0);
  for (long i = 0; i < t.slots(); ++i)
    begin[static_cast<std::size_t>(i) + 1] = begin[static_cast<std::size_t>(i)] + t.objects[static_cast<std::size_t>(i)].dim();
  const long n = begin.back();
  Totalization<K> out;
  out.cutoff = t.cutoff;
  out.degrees.resize(static_cast<std::size_t>(n));
  out.energy.resize(static_cast<std::size_t>(n));
  out.diff = zero_matrix<K>(n, n, t.cutoff);
  for (long i = 0; i < t.slots(); ++i) {
    const TCObject<K>& v = t.objects[static_cast<std::size_t>(i)];
    for (long g = 0; g < v.dim(); ++g) {
      out.degrees[static_cast<std::size_t>(begin[static_cast<std::size_t>(i)] + g)] =
          v.degrees[static_cast<std::size_t>(g)] + static_cast<int>(i);
      out.energy[static_cast<std::size_t>(begin[static_cast<std::size_t>(i)] + g)] = v.offset;
    }
    out.diff.block(begin[static_cast<std::size_t>(i)], begin[static_cast<std::size_t>(i)], v.dim(), v.dim()) = v.diff;
    for (long j = 0; j < i; ++j)
      out.diff.block(begin[static_cast<std::size_t>(j)], begin[static_cast<std::size_t>(i)],
                     t.objects[static_cast<std::size_t>(j)].dim(), v.dim()) =
          t.maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  Mat<K> sq = out.diff * out.diff;
  if (is_zero_matrix(sq) != tc_residual_is_zero(tc_residual(t)))
    throw std::logic_error("totalization square disagrees with the residual");
  return out;
}

// Splits a totalized differential back into a twisted complex along its
// energy tags: same-energy blocks become the object differentials, blocks
// from higher to lower energy become the f_ij, and any block pointing up the
// energy order is rejected.
template <class K>
TwistedComplex<K> sigma_decompose(const Totalization<K>& total) {
  const long n = static_cast<long>(total.degrees.size());
  if (total.diff.rows() != n || total.diff.cols() != n || static_cast<long>(total.energy.size()) != n)
    throw DomainError("totalization tables have mismatched sizes");
  std::vector<Rational> levels = total.energy;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  auto slot_of = [&](const Rational& e) {
    return static_cast<long>(std::lower_bound(levels.begin(), levels.end(), e) - levels.begin());
  };
  std::vector<std::vector<long>> members(levels.size());
  for (long g = 0; g < n; ++g) members[static_cast<std::size_t>(slot_of(total.energy[static_cast<std::size_t>(g)]))].push_back(g);

  for (long c = 0; c < n; ++c)
    for (long r = 0; r < n; ++r)
      if (!total.diff(r, c).is_zero() &&
          total.energy[static_cast<std::size_t>(c)] < total.energy[static_cast<std::size_t>(r)])
        throw DomainError("differential is not triangular for the energy order");

  TwistedComplex<K> t;
  t.cutoff = total.cutoff;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    TCObject<K> v;
    v.offset = levels[i];
    v.degrees.reserve(members[i].size());
    for (long g : members[i])
      v.degrees.push_back(total.degrees[static_cast<std::size_t>(g)] - static_cast<int>(i));
    v.diff = zero_matrix<K>(static_cast<long>(members[i].size()), static_cast<long>(members[i].size()), total.cutoff);
    for (std::size_t r = 0; r < members[i].size(); ++r)
      for (std::size_t c = 0; c < members[i].size(); ++c) v.diff(static_cast<long>(r), static_cast<long>(c)) = total.diff(members[i][r], members[i][c]);
    t.objects.push_back(std::move(v));
  }
  t.maps.resize(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      Mat<K> f = zero_matrix<K>(static_cast<long>(members[j].size()), static_cast<long>(members[i].size()), total.cutoff);
      for (std::size_t r = 0; r < members[j].size(); ++r)
        for (std::size_t c = 0; c < members[i].size(); ++c) f(static_cast<long>(r), static_cast<long>(c)) = total.diff(members[j][r], members[i][c]);
      t.maps[i].push_back(std::move(f));
    }
  }
  t.validate();
  return t;
}

// Endomorphism curved dga of a level-indexed family carrying a standard
// degree-1 map. Basis = matrix units E(q <- p) of degree tot(q) - tot(p),
// multiplication = composition, differential twisted by f_st, curvature =
// the standard complex's own residual D(f_st) + f_st^2. Maurer-Cartan
// elements of this dga are exactly the corrections b with real(b) honest.
template <class K>
struct EndDGA {
  CurvedDGA<K> algebra;
  std::vector<TCObject<K>> family;
  Mat<K> f_st;
  std::vector<long> begin;  // generator offset per slot, plus the total

  long total_dim() const { return begin.back(); }
  long unit_index(long q, long p) const { return q * total_dim() + p; }
  long slot_of(long g) const {
    long s = 0;
    while (begin[static_cast<std::size_t>(s) + 1] <= g) ++s;
    return s;
  }
  int total_degree(long g) const {
    long s = slot_of(g);
    return family[static_cast<std::size_t>(s)].degrees[static_cast<std::size_t>(g - begin[static_cast<std::size_t>(s)])] +
           static_cast<int>(s);
  }

  Mat<K> matrix_of(const Vec<K>& v) const {
    const long n = total_dim();
    Mat<K> m = zero_matrix<K>(n, n, algebra.cutoff);
    for (long q = 0; q < n; ++q)
      for (long p = 0; p < n; ++p) m(q, p) = v(unit_index(q, p));
    return m;
  }
  Vec<K> element_of(const Mat<K>& m) const {
    const long n = total_dim();
    Vec<K> v = algebra.zero_elem();
    for (long q = 0; q < n; ++q)
      for (long p = 0; p < n; ++p) v(unit_index(q, p)) = m(q, p);
    return v;
  }
};

template <class K>
EndDGA<K> endomorphism_dga(const TwistedComplex<K>& st, const std::vector<Rational>& gapping,
                           bool validate_algebra = true) {
  st.validate();
  EndDGA<K> e;
  e.family = st.objects;
  e.begin.assign(1, 0);
  for (const TCObject<K>& v : e.family) e.begin.push_back(e.begin.back() + v.dim());
  const long n = e.begin.back();
  const Exponent cutoff = st.cutoff;

  Mat<K> d0 = zero_matrix<K>(n, n, cutoff);
  for (long i = 0; i < st.slots(); ++i)
    d0.block(e.begin[static_cast<std::size_t>(i)], e.begin[static_cast<std::size_t>(i)],
             e.family[static_cast<std::size_t>(i)].dim(), e.family[static_cast<std::size_t>(i)].dim()) =
        e.family[static_cast<std::size_t>(i)].diff;
  e.f_st = zero_matrix<K>(n, n, cutoff);
  for (long i = 0; i < st.slots(); ++i)
    for (long j = 0; j < i; ++j)
      e.f_st.block(e.begin[static_cast<std::size_t>(j)], e.begin[static_cast<std::size_t>(i)],
                   e.family[static_cast<std::size_t>(j)].dim(), e.family[static_cast<std::size_t>(i)].dim()) =
          st.maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];

  CurvedDGA<K>& a = e.algebra;
  a.cutoff = cutoff;
  a.gapping = gapping;
  const long nn = n * n;
  a.degrees.resize(static_cast<std::size_t>(nn));
  for (long q = 0; q < n; ++q)
    for (long p = 0; p < n; ++p)
      a.degrees[static_cast<std::size_t>(e.unit_index(q, p))] = e.total_degree(q) - e.total_degree(p);

  a.mult.assign(static_cast<std::size_t>(nn), std::vector<Vec<K>>(static_cast<std::size_t>(nn)));
  for (long q = 0; q < n; ++q)
    for (long p = 0; p < n; ++p)
      for (long s = 0; s < n; ++s)
        for (long r = 0; r < n; ++r) {
          Vec<K> prod = zero_matrix<K>(nn, 1, cutoff);
          if (p == s) prod(e.unit_index(q, r)) = NovikovScalar<K>::one(cutoff);
          a.mult[static_cast<std::size_t>(e.unit_index(q, p))][static_cast<std::size_t>(e.unit_index(s, r))] =
              std::move(prod);
        }

  a.diff = zero_matrix<K>(nn, nn, cutoff);
  for (long q = 0; q < n; ++q)
    for (long p = 0; p < n; ++p) {
      Mat<K> unit = zero_matrix<K>(n, n, cutoff);
      unit(q, p) = NovikovScalar<K>::one(cutoff);
      const bool odd = (a.degrees[static_cast<std::size_t>(e.unit_index(q, p))] % 2) != 0;
      Mat<K> img = d0 * unit + e.f_st * unit;
      Mat<K> right = unit * d0 + unit * e.f_st;
      if (odd)
        img += right;
      else
        img -= right;
      for (long qq = 0; qq < n; ++qq)
        for (long pp = 0; pp < n; ++pp) a.diff(e.unit_index(qq, pp), e.unit_index(q, p)) = img(qq, pp);
    }

  Mat<K> curv = d0 * e.f_st + e.f_st * d0 + e.f_st * e.f_st;
  a.curvature = e.element_of(curv);
  a.unit = zero_matrix<K>(nn, 1, cutoff);
  for (long p = 0; p < n; ++p) a.unit(e.unit_index(p, p)) = NovikovScalar<K>::one(cutoff);
  if (validate_algebra) a.validate();
  return e;
}

// Interprets f_st + b as twisted-complex maps. Any component at source slot
// i <= target slot j must vanish, including the block diagonal.
template <class K>
TwistedComplex<K> real(const EndDGA<K>& e, const Vec<K>& b) {
  if (b.size() != e.algebra.dim()) throw DomainError("element vector has wrong length");
  if (!e.algebra.homogeneous(b, 1)) throw DomainError("Maurer-Cartan input must be degree 1");
  Mat<K> m = e.f_st + e.matrix_of(b);
  const long slots = static_cast<long>(e.family.size());
  for (long i = 0; i < slots; ++i)
    for (long j = i; j < slots; ++j) {
      Mat<K> block = m.block(e.begin[static_cast<std::size_t>(j)], e.begin[static_cast<std::size_t>(i)],
                             e.family[static_cast<std::size_t>(j)].dim(), e.family[static_cast<std::size_t>(i)].dim());
      if (!is_zero_matrix(block)) throw DomainError("component at i <= j nonzero");
    }
  TwistedComplex<K> t;
  t.cutoff = e.algebra.cutoff;
  t.objects = e.family;
  t.maps.resize(static_cast<std::size_t>(slots));
  for (long i = 0; i < slots; ++i)
    for (long j = 0; j < i; ++j)
      t.maps[static_cast<std::size_t>(i)].push_back(
          m.block(e.begin[static_cast<std::size_t>(j)], e.begin[static_cast<std::size_t>(i)],
                  e.family[static_cast<std::size_t>(j)].dim(), e.family[static_cast<std::size_t>(i)].dim()));
  t.validate();
  return t;
}

// Extracts the bounding cochain of a twisted complex over the same family:
// sum of the f_ij minus the standard map.
template <class K>
Vec<K> bc(const TwistedComplex<K>& t, const EndDGA<K>& e) {
  if (!(t.objects == e.family) || !(t.cutoff == e.algebra.cutoff))
    throw DomainError("complex objects do not match the endomorphism family");
  t.validate();
  const long n = e.total_dim();
  Mat<K> m = zero_matrix<K>(n, n, e.algebra.cutoff);
  for (long i = 0; i < t.slots(); ++i)
    for (long j = 0; j < i; ++j)
      m.block(e.begin[static_cast<std::size_t>(j)], e.begin[static_cast<std::size_t>(i)],
              e.family[static_cast<std::size_t>(j)].dim(), e.family[static_cast<std::size_t>(i)].dim()) =
          t.maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  m -= e.f_st;
  return e.element_of(m);
}

// Gauge transport: conjugates the full twisted differential by g (identity
// modulo positive valuation, energy-triangular, degree 0) and reads off the
// transported bounding cochain. Maurer-Cartan solutions map to Maurer-Cartan
// solutions.
template <class K>
Vec<K> gauge_transport(const EndDGA<K>& e, const Mat<K>& g, const Vec<K>& b) {
  const long n = e.total_dim();
  if (g.rows() != n || g.cols() != n) throw DomainError("gauge matrix has wrong shape");
  Mat<K> nil = g - identity_matrix<K>(n, e.algebra.cutoff);
  for (long q = 0; q < n; ++q)
    for (long p = 0; p < n; ++p) {
      if (nil(q, p).is_zero()) continue;
      if (e.total_degree(q) != e.total_degree(p)) throw DomainError("gauge matrix must be degree 0");
      if (e.slot_of(p) < e.slot_of(q)) throw DomainError("gauge matrix must respect the energy order");
      if (!(Exponent(Rational(0)) < nil(q, p).valuation()))
        throw DomainError("gauge matrix must be the identity modulo positive valuation");
    }
  Mat<K> inv = identity_matrix<K>(n, e.algebra.cutoff);
  Mat<K> power = nil;
  for (int k = 1; k <= 64 && !is_zero_matrix(power); ++k) {
    if (k % 2 == 1)
      inv -= power;
    else
      inv += power;
    power = Mat<K>(power * nil);
  }
  if (!is_zero_matrix(power)) throw DomainError("gauge matrix is not invertible by a finite series");
  Mat<K> id_check = g * inv - identity_matrix<K>(n, e.algebra.cutoff);
  if (!is_zero_matrix(id_check)) throw std::logic_error("gauge inverse series failed");
  Mat<K> d0 = zero_matrix<K>(n, n, e.algebra.cutoff);
  for (std::size_t i = 0; i < e.family.size(); ++i)
    d0.block(e.begin[i], e.begin[i], e.family[i].dim(), e.family[i].dim()) = e.family[i].diff;
  Mat<K> twisted = d0 + e.f_st + e.matrix_of(b);
  Mat<K> conj = g * twisted * inv;
  Mat<K> nb = conj - d0 - e.f_st;
  Vec<K> out = e.element_of(nb);
  if (!e.algebra.homogeneous(out, 1)) throw DomainError("gauge transport left degree 1");
  if (is_maurer_cartan(e.algebra, b) && !is_maurer_cartan(e.algebra, out))
    throw std::logic_error("gauge transport broke the Maurer-Cartan equation");
  return out;
}

// Strict morphism of curved dgas: degree-preserving, unit to unit, commutes
// with d, multiplicative, matches curvatures, and refines the gapping.
template <class K>
struct DGAMorphism {
  Mat<K> entries;  // column j = image of source basis j

  void validate(const CurvedDGA<K>& src, const CurvedDGA<K>& tgt) const {
    if (entries.rows() != tgt.dim() || entries.cols() != src.dim()) throw DomainError("morphism has wrong shape");
    if (!(src.cutoff == tgt.cutoff)) throw DomainError("morphism endpoints need a common cutoff");
    for (long i = 0; i < tgt.dim(); ++i)
      for (long j = 0; j < src.dim(); ++j)
        if (!entries(i, j).is_zero() &&
            tgt.degrees[static_cast<std::size_t>(i)] != src.degrees[static_cast<std::size_t>(j)])
          throw DomainError("morphism does not preserve degree");
    for (const Rational& g : src.gapping)
      if (std::find(tgt.gapping.begin(), tgt.gapping.end(), g) == tgt.gapping.end())
        throw DomainError("target gapping does not refine the source gapping");
    Vec<K> u = entries * src.unit;
    if (!detail::vec_eq(u, tgt.unit)) throw DomainError("morphism does not preserve the unit");
    Mat<K> left = entries * src.diff, right = tgt.diff * entries;
    if (!detail::mat_eq(left, right)) throw DomainError("morphism does not commute with d");
    Vec<K> curv = entries * src.curvature;
    if (!detail::vec_eq(curv, tgt.curvature)) throw DomainError("morphism does not match curvatures");
    for (long i = 0; i < src.dim(); ++i)
      for (long j = 0; j < src.dim(); ++j) {
        Vec<K> lhs = entries * src.mult[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        Vec<K> rhs = tgt.mul(entries.col(i), entries.col(j));
        if (!detail::vec_eq(lhs, rhs)) throw DomainError("morphism is not multiplicative");
      }
  }

  Vec<K> apply(const Vec<K>& v) const {
    Vec<K> out = entries * v;
    return out;
  }
};

// Colimit of a finite chain of refinements: after validating every link, the
// last dga is the colimit presentation at the finest gapping.
template <class K>
CurvedDGA<K> colimit_dga(const std::vector<CurvedDGA<K>>& dgas, const std::vector<DGAMorphism<K>>& maps) {
  if (dgas.empty()) throw DomainError("colimit of an empty family");
  if (maps.size() + 1 != dgas.size()) throw DomainError("need one refinement map per consecutive pair");
  for (const CurvedDGA<K>& a : dgas) a.validate();
  for (std::size_t k = 0; k < maps.size(); ++k) maps[k].validate(dgas[k], dgas[k + 1]);
  return dgas.back();
}

// Pushes an element of dgas[from] through the chain into the last dga. A
// Maurer-Cartan element stays Maurer-Cartan (strict morphisms preserve the
// equation); that is re-checked here.
template <class K>
Vec<K> push_mc_forward(const std::vector<CurvedDGA<K>>& dgas, const std::vector<DGAMorphism<K>>& maps,
                       std::size_t from, const Vec<K>& b) {
  if (dgas.empty() || maps.size() + 1 != dgas.size() || from >= dgas.size())
    throw DomainError("malformed refinement chain");
  const bool was_mc = is_maurer_cartan(dgas[from], b);
  Vec<K> v = b;
  for (std::size_t k = from; k < maps.size(); ++k) v = maps[k].apply(v);
  if (was_mc && !is_maurer_cartan(dgas.back(), v))
    throw std::logic_error("refinement chain broke the Maurer-Cartan equation");
  return v;
}

}  // namespace nvk
