#include <variant>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "nvk/curved.hpp"
#include "nvk/error.hpp"

using namespace nvk;

namespace {

using Scalar = NovikovScalar<Rational>;

// <e, x, y> in degrees 0, 1, 2 with x*x = y when square is set, d(x) = dx*y,
// and the given curvature coefficient on y.
CurvedDGA<Rational> three_gen(bool square, const Scalar& dx, const Scalar& curv, Exponent cutoff,
                              std::vector<Rational> gapping) {
  CurvedDGA<Rational> a;
  a.cutoff = cutoff;
  a.gapping = std::move(gapping);
  a.degrees = {0, 1, 2};
  a.names = {"e", "x", "y"};
  a.mult.assign(3, std::vector<Vec<Rational>>(3));
  for (long i = 0; i < 3; ++i)
    for (long j = 0; j < 3; ++j) a.mult[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = zero_matrix<Rational>(3, 1, cutoff);
  for (long i = 0; i < 3; ++i) {
    a.mult[0][static_cast<std::size_t>(i)](i) = Scalar::one(cutoff);
    a.mult[static_cast<std::size_t>(i)][0](i) = Scalar::one(cutoff);
  }
  if (square) a.mult[1][1](2) = Scalar::one(cutoff);
  a.diff = zero_matrix<Rational>(3, 3, cutoff);
  a.diff(2, 1) = dx;
  a.unit = zero_matrix<Rational>(3, 1, cutoff);
  a.unit(0) = Scalar::one(cutoff);
  a.curvature = zero_matrix<Rational>(3, 1, cutoff);
  a.curvature(2) = curv;
  return a;
}

CurvedDGA<Rational> flat_square() {
  Exponent cut = Exponent::infinity();
  return three_gen(true, Scalar::zero(cut), Scalar::zero(cut), cut, {Rational(0), Rational(1, 2)});
}

// x*x = 0, d(x) = y, curvature T^c y: solved exactly by b = -T^c x.
CurvedDGA<Rational> curved_line(const Rational& c) {
  Exponent cut{c + c};
  return three_gen(false, Scalar::one(cut), tpow<Rational>(c, cut), cut, {Rational(0), c});
}

// <e, y> with curvature T^c y and nothing in degree 1 to cancel it.
CurvedDGA<Rational> obstructed(const Rational& c) {
  Exponent cut{c + c};
  CurvedDGA<Rational> a;
  a.cutoff = cut;
  a.gapping = {Rational(0), c};
  a.degrees = {0, 2};
  a.mult.assign(2, std::vector<Vec<Rational>>(2));
  for (long i = 0; i < 2; ++i)
    for (long j = 0; j < 2; ++j) a.mult[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = zero_matrix<Rational>(2, 1, cut);
  for (long i = 0; i < 2; ++i) {
    a.mult[0][static_cast<std::size_t>(i)](i) = Scalar::one(cut);
    a.mult[static_cast<std::size_t>(i)][0](i) = Scalar::one(cut);
  }
  a.diff = zero_matrix<Rational>(2, 2, cut);
  a.unit = zero_matrix<Rational>(2, 1, cut);
  a.unit(0) = Scalar::one(cut);
  a.curvature = zero_matrix<Rational>(2, 1, cut);
  a.curvature(1) = tpow<Rational>(c, cut);
  return a;
}

// V0 = <u, u'> with d(u') = u at offset 0, V1 = <v> at offset 1/2,
// V2 = <w> at offset 1; maps chosen so the residual cancels exactly.
TwistedComplex<Rational> three_term() {
  TwistedComplex<Rational> t;
  t.cutoff = Exponent::infinity();
  TCObject<Rational> v0{{0, -1}, zero_matrix<Rational>(2, 2, t.cutoff), Rational(0)};
  v0.diff(0, 1) = Scalar(1);
  TCObject<Rational> v1{{-2}, zero_matrix<Rational>(1, 1, t.cutoff), Rational(1, 2)};
  TCObject<Rational> v2{{-4}, zero_matrix<Rational>(1, 1, t.cutoff), Rational(1)};
  t.objects = {v0, v1, v2};
  t.maps.resize(3);
  t.maps[1].push_back(zero_matrix<Rational>(2, 1, t.cutoff));
  t.maps[1][0](0, 0) = tpow<Rational>(Rational(1, 2));
  t.maps[2].push_back(zero_matrix<Rational>(2, 1, t.cutoff));
  t.maps[2][0](1, 0) = -tpow<Rational>(Rational(1));
  t.maps[2].push_back(zero_matrix<Rational>(1, 1, t.cutoff));
  t.maps[2][1](0, 0) = tpow<Rational>(Rational(1, 2));
  return t;
}

Vec<Rational> coeff_on(const CurvedDGA<Rational>& a, long idx, const Scalar& c) {
  Vec<Rational> v = a.zero_elem();
  v(idx) = c;
  return v;
}

}  // namespace

TEST_CASE("dga validation accepts the fixtures") {
  flat_square().validate();
  curved_line(Rational(1)).validate();
  obstructed(Rational(1)).validate();
}

TEST_CASE("dga validation rejects broken structure") {
  CurvedDGA<Rational> a = flat_square();
  a.unit(0) = Scalar(2);
  CHECK_THROWS_AS(a.validate(), DomainError);  // unit law

  a = flat_square();
  a.degrees[2] = 1;
  CHECK_THROWS_AS(a.validate(), DomainError);  // x*x no longer degree-additive

  a = curved_line(Rational(1));
  a.curvature(2) = Scalar::one(a.cutoff);
  CHECK_THROWS_AS(a.validate(), DomainError);  // curvature needs positive valuation

  a = curved_line(Rational(1));
  a.diff(2, 1) = tpow<Rational>(Rational(1, 3), a.cutoff);
  CHECK_THROWS_AS(a.validate(), DomainError);  // exponent outside the gapping monoid

  a = flat_square();
  a.gapping = {Rational(1, 2)};
  CHECK_THROWS_AS(a.validate(), DomainError);  // gapping must start at 0

  a = flat_square();
  a.mult[0][1](1) = Scalar(2);
  CHECK_THROWS_AS(a.validate(), DomainError);  // unit no longer acts as identity

  a = flat_square();
  a.diff(1, 0) = Scalar(1);
  CHECK_THROWS_AS(a.validate(), DomainError);  // d(unit) must vanish
}

TEST_CASE("algebra operations") {
  CurvedDGA<Rational> a = flat_square();
  CHECK(detail::vec_eq(a.mul(a.basis_elem(1), a.basis_elem(1)), a.basis_elem(2)));
  CHECK(a.homogeneous(a.basis_elem(1), 1));
  CHECK(!a.homogeneous(a.basis_elem(1), 0));

  CurvedDGA<Rational> line = curved_line(Rational(1));
  CHECK(detail::vec_eq(line.d(line.basis_elem(1)), line.basis_elem(2)));
}

TEST_CASE("residual of a candidate cochain") {
  CurvedDGA<Rational> a = flat_square();
  Vec<Rational> b = coeff_on(a, 1, tpow<Rational>(Rational(1, 2)));
  Vec<Rational> r = mc_residual(a, b);
  CHECK(detail::vec_eq(r, coeff_on(a, 2, tpow<Rational>(Rational(1)))));  // b*b = T*y
  CHECK(!is_maurer_cartan(a, b));
  CHECK(is_maurer_cartan(a, a.zero_elem()));
  CHECK_THROWS_AS((void)mc_residual(a, coeff_on(a, 2, Scalar(1))), DomainError);  // wrong degree

  // an arity-3 operation adds m3(b, b, b)
  HigherOp<Rational> op;
  op.arity = 3;
  op.entries[{1, 1, 1}] = coeff_on(a, 2, Scalar(1));
  Vec<Rational> r3 = mc_residual(a, b, {op});
  Vec<Rational> want = r;
  want(2) += tpow<Rational>(Rational(3, 2));
  CHECK(detail::vec_eq(r3, want));

  HigherOp<Rational> bad = op;
  bad.arity = 2;
  CHECK_THROWS_AS((void)mc_residual(a, b, {bad}), DomainError);
}

TEST_CASE("maurer-cartan solve") {
  // flat algebra: nothing to solve
  auto flat = mc_solve(three_gen(true, Scalar::zero(Exponent(Rational(2))), Scalar::zero(Exponent(Rational(2))),
                                 Exponent(Rational(2)), {Rational(0), Rational(1)}));
  REQUIRE(std::holds_alternative<MaurerCartanElement<Rational>>(flat));
  CHECK(detail::is_zero_vec(std::get<MaurerCartanElement<Rational>>(flat).b));

  // curvature T^1*y against d(x) = y: solved exactly by b = -T^1*x
  CurvedDGA<Rational> line = curved_line(Rational(1));
  auto sol = mc_solve(line);
  REQUIRE(std::holds_alternative<MaurerCartanElement<Rational>>(sol));
  Vec<Rational> b = std::get<MaurerCartanElement<Rational>>(sol).b;
  CHECK(detail::vec_eq(b, coeff_on(line, 1, Scalar::zero(line.cutoff) - tpow<Rational>(Rational(1), line.cutoff))));
  CHECK(detail::is_zero_vec(mc_residual(line, b)));
  CHECK(is_maurer_cartan(line, b));

  // nothing in degree 1 can eat the curvature: obstruction class [1] at level 1
  auto obs = mc_solve(obstructed(Rational(1)));
  REQUIRE(std::holds_alternative<ObstructionReport<Rational>>(obs));
  const auto& rep = std::get<ObstructionReport<Rational>>(obs);
  CHECK(rep.level == Rational(1));
  REQUIRE(rep.kappa_class.size() == 1);
  CHECK(rep.kappa_class[0] == Rational(1));
}

TEST_CASE("twisted complex fixture") {
  TwistedComplex<Rational> t = three_term();
  t.validate();
  CHECK(tc_residual_is_zero(tc_residual(t)));

  Totalization<Rational> tot = tc_totalize(t);
  CHECK(tot.degrees == std::vector<int>{0, -1, -1, -2});
  CHECK(tot.energy == std::vector<Rational>{Rational(0), Rational(0), Rational(1, 2), Rational(1)});
  Mat<Rational> sq = tot.diff * tot.diff;
  CHECK(is_zero_matrix(sq));

  CHECK(sigma_decompose(tot) == t);
}

TEST_CASE("totalization squares to zero exactly when the residual vanishes") {
  TwistedComplex<Rational> t = three_term();
  t.maps[2][0](1, 0) = tpow<Rational>(Rational(1));  // flip the sign: cancellation breaks
  t.validate();
  CHECK(!tc_residual_is_zero(tc_residual(t)));
  Totalization<Rational> tot = tc_totalize(t);
  Mat<Rational> sq = tot.diff * tot.diff;
  CHECK(!is_zero_matrix(sq));
}

TEST_CASE("twisted complex validation") {
  TwistedComplex<Rational> t = three_term();
  t.objects[2].offset = Rational(1, 2);
  CHECK_THROWS_AS(t.validate(), DomainError);  // offsets must strictly increase

  t = three_term();
  t.maps[1][0](1, 0) = Scalar(1);  // u' row has the wrong total degree
  CHECK_THROWS_AS(t.validate(), DomainError);

  t = three_term();
  t.objects[0].diff(1, 0) = Scalar(1);  // d no longer squares to zero
  CHECK_THROWS_AS(t.validate(), DomainError);
}

TEST_CASE("endomorphism algebra, bounding cochains, and realization") {
  TwistedComplex<Rational> st = three_term();
  st.cutoff = Exponent(Rational(3));
  for (auto& row : st.maps)
    for (auto& m : row)
      for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) m(i, j) = m(i, j).truncated(st.cutoff);
  for (auto& obj : st.objects)
    for (long i = 0; i < obj.diff.rows(); ++i)
      for (long j = 0; j < obj.diff.cols(); ++j) obj.diff(i, j) = obj.diff(i, j).truncated(st.cutoff);

  EndDGA<Rational> e = endomorphism_dga(st, {Rational(0), Rational(1, 2)});
  CHECK(e.total_dim() == 4);
  CHECK(e.algebra.dim() == 16);
  CHECK(detail::is_zero_vec(e.algebra.curvature));  // the fixture is already honest

  // bc of the standard complex is zero, and real(0) gives it back
  CHECK(detail::is_zero_vec(bc(st, e)));
  CHECK(real(e, e.algebra.zero_elem()) == st);

  // a rescaled map reads off as a nonzero cochain and realizes back exactly
  TwistedComplex<Rational> t2 = st;
  t2.maps[1][0](0, 0) = t2.maps[1][0](0, 0) + t2.maps[1][0](0, 0);
  t2.validate();
  Vec<Rational> b2 = bc(t2, e);
  CHECK(!detail::is_zero_vec(b2));
  CHECK(e.algebra.homogeneous(b2, 1));
  CHECK(real(e, b2) == t2);
  CHECK(!is_maurer_cartan(e.algebra, b2));  // its residual no longer cancels

  TwistedComplex<Rational> wrong = st;
  wrong.objects[1].offset = Rational(1, 3);
  CHECK_THROWS_AS((void)bc(wrong, e), DomainError);
}

TEST_CASE("gauge transport preserves the equation") {
  TwistedComplex<Rational> st = three_term();
  EndDGA<Rational> e = endomorphism_dga(st, {Rational(0), Rational(1, 2)});
  const long n = e.total_dim();

  Mat<Rational> g = identity_matrix<Rational>(n, e.algebra.cutoff);
  g(1, 2) = tpow<Rational>(Rational(1, 2));  // u' <- T^(1/2) v, both total degree -1
  Vec<Rational> out = gauge_transport(e, g, e.algebra.zero_elem());
  CHECK(!detail::is_zero_vec(out));
  CHECK(is_maurer_cartan(e.algebra, out));
  real(e, out).validate();

  Mat<Rational> bad = identity_matrix<Rational>(n, e.algebra.cutoff);
  bad(2, 1) = tpow<Rational>(Rational(1, 2));  // wrong energy direction
  CHECK_THROWS_AS((void)gauge_transport(e, bad, e.algebra.zero_elem()), DomainError);

  bad = identity_matrix<Rational>(n, e.algebra.cutoff);
  bad(3, 2) = tpow<Rational>(Rational(1, 2));  // total degrees -2 vs -1
  CHECK_THROWS_AS((void)gauge_transport(e, bad, e.algebra.zero_elem()), DomainError);

  bad = identity_matrix<Rational>(n, e.algebra.cutoff);
  bad(1, 2) = Scalar(1);  // valuation 0 off the diagonal
  CHECK_THROWS_AS((void)gauge_transport(e, bad, e.algebra.zero_elem()), DomainError);
}

TEST_CASE("refinement chains and pushforward") {
  CurvedDGA<Rational> a = curved_line(Rational(1));
  a.gapping = {Rational(0), Rational(1)};
  CurvedDGA<Rational> b = curved_line(Rational(1));
  b.gapping = {Rational(0), Rational(1, 2), Rational(1)};
  DGAMorphism<Rational> id{identity_matrix<Rational>(3, a.cutoff)};
  id.validate(a, b);

  CurvedDGA<Rational> colim = colimit_dga<Rational>({a, b}, {id});
  CHECK(colim.gapping == b.gapping);

  auto sol = mc_solve(a);
  REQUIRE(std::holds_alternative<MaurerCartanElement<Rational>>(sol));
  Vec<Rational> mc = std::get<MaurerCartanElement<Rational>>(sol).b;
  Vec<Rational> pushed = push_mc_forward({a, b}, {id}, 0, mc);
  CHECK(detail::vec_eq(pushed, mc));
  CHECK(is_maurer_cartan(b, pushed));

  DGAMorphism<Rational> broken{identity_matrix<Rational>(3, a.cutoff)};
  broken.entries(0, 0) = Scalar(2);
  CHECK_THROWS_AS(broken.validate(a, b), DomainError);  // unit is not preserved

  // literal refinement is required, monoid containment is not enough
  CurvedDGA<Rational> halves = curved_line(Rational(1));
  halves.gapping = {Rational(0), Rational(1, 2)};
  halves.validate();
  CHECK_THROWS_AS(id.validate(a, halves), DomainError);
  CHECK_THROWS_AS((void)colimit_dga<Rational>({a, halves}, {id}), DomainError);
  CHECK_THROWS_AS((void)colimit_dga<Rational>({}, {}), DomainError);
}
