#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "nvk/io.hpp"

using namespace nvk;

namespace {

const char* dga_text =
    "dga\n"
    "cutoff 2\n"
    "gapping 0 1\n"
    "basis e 0\n"
    "basis x 1\n"
    "basis y 2\n"
    "unit (1)*e\n"
    "curvature (T^(1))*y\n"
    "mult e*e = (1)*e\n"
    "mult e*x = (1)*x\n"
    "mult x*e = (1)*x\n"
    "mult e*y = (1)*y\n"
    "mult y*e = (1)*y\n"
    "diff x = (1)*y\n"
    "end\n";

const char* tc_text =
    "tc\n"
    "cutoff inf\n"
    "object 0 : 0 -1\n"
    "object 1/2 : -2\n"
    "object 1 : -4\n"
    "diff 0\n"
    "0\n1\n0\n0\n"
    "map 1 0\n"
    "T^(1/2)\n0\n"
    "map 2 0\n"
    "0\n-T^(1)\n"
    "map 2 1\n"
    "T^(1/2)\n"
    "end\n";

template <class K>
bool mat_eq(const Mat<K>& a, const Mat<K>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      if (!(a(i, j) == b(i, j))) return false;
  return true;
}

}  // namespace

TEST_CASE("matrix files round trip") {
  testgen::Rng rng(941u);
  Rational model;
  for (Exponent cut : {Exponent(Rational(5, 2)), Exponent::infinity()}) {
    Mat<Rational> m = zero_matrix<Rational>(3, 2, cut);
    for (long i = 0; i < 3; ++i)
      for (long j = 0; j < 2; ++j) m(i, j) = testgen::random_scalar<Rational>(rng, model, cut);
    CHECK(mat_eq(m, io::parse_matrix<Rational>(io::format_matrix(m))));
  }

  // mod-p entries survive a format/parse/format cycle verbatim
  Fp fmodel(1, 7);
  Mat<Fp> p = zero_matrix<Fp>(2, 2, Exponent(Rational(3)));
  for (long i = 0; i < 2; ++i)
    for (long j = 0; j < 2; ++j) p(i, j) = testgen::random_scalar<Fp>(rng, fmodel, Exponent(Rational(3)));
  std::string once = io::format_matrix(p);
  CHECK(io::format_matrix(io::parse_matrix<Fp>(once)) == once);

  Mat<Rational> empty = io::parse_matrix<Rational>("0 0 inf\n");
  CHECK(empty.rows() == 0);

  CHECK_THROWS_AS((void)io::parse_matrix<Rational>(""), ParseError);
  CHECK_THROWS_AS((void)io::parse_matrix<Rational>("2 2\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_matrix<Rational>("-1 2 inf\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_matrix<Rational>("1 2 inf\n0\n"), ParseError);  // body too short
  CHECK_THROWS_AS((void)io::parse_matrix<Rational>("x y inf\n"), ParseError);
}

TEST_CASE("normal forms and equivariant barcodes round trip") {
  NormalForm nf{{Rational(3), Rational(1, 2)}, 2};
  CHECK(io::parse_normal_form(nf.str()) == nf);
  CHECK(io::parse_normal_form("torsion: [], free: 0") == NormalForm{});

  EqBarcode e{nf, Exponent(Rational(7, 2))};
  CHECK(io::parse_eq(io::format_eq(e)) == e);
  EqBarcode open{nf, Exponent::infinity()};
  CHECK(io::parse_eq(io::format_eq(open)) == open);
  CHECK(io::parse_eq("torsion: [1], free: 0\n") == EqBarcode{{{Rational(1)}, 0}, Exponent::infinity()});

  CHECK_THROWS_AS((void)io::parse_normal_form("free: 2"), ParseError);
  CHECK_THROWS_AS((void)io::parse_normal_form("torsion: [1]"), ParseError);
  CHECK_THROWS_AS((void)io::parse_normal_form("torsion: [1], free: -1"), ParseError);
  CHECK_THROWS_AS((void)io::parse_eq("torsion: [1], free: 0\ncutoff 2\nextra\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_eq("torsion: [1], free: 0\nbound 2\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_eq("torsion: [0], free: 0\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_eq("torsion: [-1], free: 1\n"), ParseError);
}

TEST_CASE("plain barcode files round trip") {
  PlainBarcode p;
  p.bars = {{Rational(0), Exponent::infinity(), 0},
            {Rational(1, 5), Exponent(Rational(4, 5)), 0},
            {Rational(3, 2), Exponent::infinity(), 1},
            {Rational(-1), Exponent(Rational(2)), -1}};
  p.canonicalize();
  CHECK(io::parse_plain(io::format_plain(p)) == p);
  CHECK(io::parse_plain("").bars.empty());
  CHECK(io::parse_plain("1 0\n").bars.empty());  // zero-length bars are dropped

  CHECK_THROWS_AS((void)io::parse_plain("1\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_plain("1 2 3 4\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_plain("1 2 x\n"), ParseError);
}

TEST_CASE("piecewise linear files round trip") {
  PLFunction circ = PLFunction::on_circle({Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4)},
                                          {Rational(0), Rational(1), Rational(1, 5), Rational(3, 2)});
  CHECK(io::parse_pl(io::format_pl(circ)) == circ);

  PLFunction seg = PLFunction::on_interval(Rational(-1), Rational(2), {Rational(-1), Rational(0), Rational(2)},
                                           {Rational(1), Rational(-1, 3), Rational(4)});
  CHECK(io::parse_pl(io::format_pl(seg)) == seg);

  PLFunction pt = PLFunction::point(Rational(-7, 3));
  CHECK(io::parse_pl(io::format_pl(pt)) == pt);

  CHECK_THROWS_AS((void)io::parse_pl(""), ParseError);
  CHECK_THROWS_AS((void)io::parse_pl("base torus\n0 0\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_pl("base pt 0 1\n0 0\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_pl("base circle\n0 0 0\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_pl("base circle\n0 0\n2 1\n"), DomainError);  // position outside [0, 1)
}

TEST_CASE("basis combinations round trip") {
  std::vector<std::string> names = {"e", "x", "y"};
  std::map<std::string, long> index = {{"e", 0}, {"x", 1}, {"y", 2}};
  Exponent cut{Rational(2)};

  Vec<Rational> v = zero_matrix<Rational>(3, 1, cut);
  v(0) = NovikovScalar<Rational>::parse("1 + T^(1/2)", cut);
  v(2) = NovikovScalar<Rational>::parse("-2*T^(1)", cut);
  Vec<Rational> back = io::parse_combo<Rational>(io::format_combo(v, names), index, 3, cut);
  CHECK(detail::vec_eq(v, back));

  Vec<Rational> zero = io::parse_combo<Rational>("0", index, 3, cut);
  CHECK(detail::is_zero_vec(zero));
  CHECK(io::format_combo(zero, names) == "0");

  // repeated names accumulate
  Vec<Rational> twice = io::parse_combo<Rational>("(1)*x + (1)*x", index, 3, cut);
  CHECK(twice(1) == NovikovScalar<Rational>(2));

  CHECK_THROWS_AS((void)io::parse_combo<Rational>("(1)*w", index, 3, cut), ParseError);
  CHECK_THROWS_AS((void)io::parse_combo<Rational>("1*x", index, 3, cut), ParseError);
  CHECK_THROWS_AS((void)io::parse_combo<Rational>("(1)x", index, 3, cut), ParseError);
}

TEST_CASE("curved dga files") {
  CurvedDGA<Rational> a = io::parse_dga<Rational>(dga_text);
  CHECK(a.dim() == 3);
  CHECK(a.cutoff == Exponent(Rational(2)));
  CHECK(a.gapping == std::vector<Rational>{Rational(0), Rational(1)});
  CHECK(a.names == std::vector<std::string>{"e", "x", "y"});
  CHECK(detail::vec_eq(a.d(a.basis_elem(1)), a.basis_elem(2)));

  std::string once = io::format_dga(a);
  CHECK(io::format_dga(io::parse_dga<Rational>(once)) == once);

  CHECK_THROWS_AS((void)io::parse_dga<Rational>("algebra\nend\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_dga<Rational>("dga\nbasis e 0\nunit (1)*e\nspin e = (1)*e\nend\n"),
                  ParseError);
  CHECK_THROWS_AS((void)io::parse_dga<Rational>("dga\nbasis e 0\nbasis e 0\nunit (1)*e\nend\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_dga<Rational>("dga\nbasis 1e 0\nunit (1)*1e\nend\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_dga<Rational>("dga\nbasis e 0\nmult e*e = (1)*e\nend\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_dga<Rational>("dga\ncutoff 1\ncutoff 2\nbasis e 0\nunit (1)*e\nend\n"),
                  ParseError);
  CHECK_THROWS_AS((void)io::parse_dga<Rational>("dga\nend\n"), ParseError);
}

TEST_CASE("twisted complex files") {
  TwistedComplex<Rational> t = io::parse_tc<Rational>(tc_text);
  CHECK(t.slots() == 3);
  CHECK(tc_residual_is_zero(tc_residual(t)));
  CHECK(io::parse_tc<Rational>(io::format_tc(t)) == t);

  CHECK_THROWS_AS((void)io::parse_tc<Rational>("complex\nend\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_tc<Rational>("tc\nend\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_tc<Rational>("tc\nobject 0 : 0\nmap 1 0\n0\nend\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_tc<Rational>("tc\nobject 0 : 0\nobject 1 : -1\nmap 1 0\nend\n"),
                  ParseError);  // block cut short
  CHECK_THROWS_AS((void)io::parse_tc<Rational>("tc\nobject 0 : 0\nglue 0 0\nend\n"), ParseError);
  CHECK_THROWS_AS((void)io::parse_tc<Rational>("tc\nobject 0 :\nend\n"), ParseError);
}
