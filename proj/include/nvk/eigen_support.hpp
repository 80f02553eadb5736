#pragma once

#include <Eigen/Core>

#include "nvk/novikov.hpp"

namespace Eigen {

// NovikovScalar is an exact non-ordered ring scalar: no epsilon games, unit
// costs padded for the heap-backed term lists.
template <class K>
struct NumTraits<nvk::NovikovScalar<K>> {
  using Self = nvk::NovikovScalar<K>;
  using Real = Self;
  using NonInteger = Self;
  using Nested = Self;
  using Literal = long;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 64,
    MulCost = 128,
  };
  static inline Self epsilon() { return Self(0); }
  static inline Self dummy_precision() { return Self(0); }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen

namespace nvk {

template <class K>
using Mat = Eigen::Matrix<NovikovScalar<K>, Eigen::Dynamic, Eigen::Dynamic>;
template <class K>
using Vec = Eigen::Matrix<NovikovScalar<K>, Eigen::Dynamic, 1>;

// Zero/identity at an explicit cutoff (Eigen's Zero() would produce cutoff-inf
// scalars, which coerce fine, but matrices built here carry their cutoff).
template <class K>
Mat<K> zero_matrix(Eigen::Index rows, Eigen::Index cols, Exponent cutoff) {
  Mat<K> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = NovikovScalar<K>::zero(cutoff);
  return m;
}
template <class K>
Mat<K> identity_matrix(Eigen::Index n, Exponent cutoff) {
  Mat<K> m = zero_matrix<K>(n, n, cutoff);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = NovikovScalar<K>::one(cutoff);
  return m;
}

template <class K>
bool is_zero_matrix(const Mat<K>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!m(i, j).is_zero()) return false;
  return true;
}

}  // namespace nvk
