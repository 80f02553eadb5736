#include <cstdint>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "nvk/curved.hpp"
#include "nvk/io.hpp"
#include "nvk/metrics.hpp"
#include "nvk/persist1d.hpp"

using namespace nvk;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct FieldSpec {
  bool rational = true;
  std::uint64_t p = 0;
};

FieldSpec parse_field(const std::string& s) {
  if (s == "q") return {};
  if (s.rfind("fp:", 0) == 0) {
    FieldSpec f;
    f.rational = false;
    try {
      f.p = std::stoul(s.substr(3));
    } catch (const std::exception&) {
      throw ParseError("bad field spec: '" + s + "'");
    }
    if (f.p < 2) throw ParseError("field characteristic must be at least 2");
    return f;
  }
  throw ParseError("unknown field: '" + s + "' (expected q or fp:<p>)");
}

// Parsed fp literals are universal; pin them to the chosen modulus so that
// multiples of p actually vanish.
NovikovScalar<Fp> pin(const NovikovScalar<Fp>& s, std::uint64_t p) {
  NovikovScalar<Fp> out = NovikovScalar<Fp>::zero(s.cutoff());
  for (const auto& [e, c] : s.terms()) out += NovikovScalar<Fp>::monomial(c.contextualize(p), e, s.cutoff());
  return out;
}

Mat<Fp> pin(const Mat<Fp>& m, std::uint64_t p) {
  Mat<Fp> out = m;
  for (long i = 0; i < out.rows(); ++i)
    for (long j = 0; j < out.cols(); ++j) out(i, j) = pin(out(i, j), p);
  return out;
}

void pin(CurvedDGA<Fp>& a, std::uint64_t p) {
  for (auto& row : a.mult)
    for (auto& v : row) v = pin(v, p);
  a.diff = pin(a.diff, p);
  a.curvature = pin(Mat<Fp>(a.curvature), p);
  a.unit = pin(Mat<Fp>(a.unit), p);
}

void pin(TwistedComplex<Fp>& t, std::uint64_t p) {
  for (auto& o : t.objects) o.diff = pin(o.diff, p);
  for (auto& row : t.maps)
    for (auto& f : row) f = pin(f, p);
}

std::string bar_str(const Bar& b) {
  std::string death = b.length.is_infinite() ? "inf" : (b.birth + b.length.finite()).str();
  return "bar " + std::to_string(b.degree) + " [" + b.birth.str() + ", " + death + ")";
}

Exponent matrix_cutoff(const std::string& text) {
  std::vector<std::string> head = io::tokens_of(io::lines_of(text).at(0));
  return io::parse_cutoff_token(head.at(2));
}

// --- subcommand bodies ---

void cmd_nf(const std::string& path, const FieldSpec& field, const std::string& cutoff_flag) {
  std::string text = read_file(path);
  Exponent cut = cutoff_flag.empty() ? matrix_cutoff(text) : Exponent::parse(cutoff_flag);
  auto run = [&](auto tag) {
    using K = decltype(tag);
    Mat<K> m = io::parse_matrix<K>(text);
    if constexpr (std::is_same_v<K, Fp>) m = pin(m, field.p);
    if (!cutoff_flag.empty())
      for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) m(i, j) = m(i, j).truncated(cut);
    std::cout << normal_form(PresentationModule<K>{m, cut}).str() << "\n";
  };
  field.rational ? run(Rational()) : run(Fp());
}

void cmd_dist(const std::string& pe, const std::string& pf, bool witness) {
  EqBarcode e = io::parse_eq(read_file(pe));
  EqBarcode f = io::parse_eq(read_file(pf));
  DistanceReport<Rational> rep = interleaving_distance<Rational>(e, f);
  std::cout << rep.str() << "\n";
  if (witness) {
    if (rep.witness) {
      std::cout << "witness epsilon " << rep.witness->epsilon.str() << "\n";
      std::cout << "alpha\n" << io::format_matrix(rep.witness->alpha.entries);
      std::cout << "beta\n" << io::format_matrix(rep.witness->beta.entries);
    } else {
      std::cout << "witness none\n";
    }
  }
}

void cmd_hom(const std::string& pf, const std::string& pg, const std::string& cutoff_flag) {
  Exponent cut = cutoff_flag.empty() ? Exponent::infinity() : Exponent::parse(cutoff_flag);
  GFObject F{io::parse_pl(read_file(pf)), pf};
  GFObject G{io::parse_pl(read_file(pg)), pg};
  HomReport r = hom_module_detailed(F, G, cut);
  for (const auto& [d, e] : r.modules) std::cout << "degree " << d << ": " << e.nf.str() << "\n";
  for (const Bar& b : r.bars.bars)
    std::cout << bar_str(b) << " valuation " << generator_valuation(b).str() << "\n";
}

void cmd_persist(const std::string& mode, const std::vector<std::string>& paths, const std::string& cutoff_flag) {
  Exponent cut = cutoff_flag.empty() ? Exponent::infinity() : Exponent::parse(cutoff_flag);
  if (mode == "sublevel") {
    if (paths.size() != 1) throw ParseError("persist sublevel takes one PL function file");
    PlainBarcode bars = sublevel_persistence(io::parse_pl(read_file(paths[0])));
    for (const Bar& b : bars.bars) std::cout << bar_str(b) << "\n";
    return;
  }
  if (mode == "intersection") {
    if (paths.size() != 2) throw ParseError("persist intersection takes two PL function files");
    GFObject F{io::parse_pl(read_file(paths[0])), paths[0]};
    GFObject G{io::parse_pl(read_file(paths[1])), paths[1]};
    auto [lhs, rhs] = intersection_count_check(F, G);
    std::cout << "lhs=" << lhs << " rhs=" << rhs << "\n";
    return;
  }
  if (mode == "stability") {
    if (paths.size() != 3) throw ParseError("persist stability takes f, g, and h files");
    GFObject F{io::parse_pl(read_file(paths[0])), paths[0]};
    GFObject G{io::parse_pl(read_file(paths[1])), paths[1]};
    PLFunction h = io::parse_pl(read_file(paths[2]));
    StabilityReport rep = stability_check(F, G, h, cut);
    std::cout << "bound=" << rep.dist_bound.str() << " osc=" << rep.osc.str() << "\n";
    return;
  }
  throw ParseError("unknown persist mode: '" + mode + "'");
}

template <class K>
void mc_report(const CurvedDGA<K>& a, bool witness) {
  auto outcome = mc_solve(a);
  if (std::holds_alternative<MaurerCartanElement<K>>(outcome)) {
    const auto& sol = std::get<MaurerCartanElement<K>>(outcome);
    Exponent level = Exponent::infinity();
    for (long i = 0; i < sol.b.rows(); ++i)
      if (!sol.b(i).is_zero()) level = min(level, sol.b(i).valuation());
    std::vector<std::string> names = a.names;
    if (names.empty())
      for (long i = 0; i < a.dim(); ++i) names.push_back("g" + std::to_string(i));
    std::cout << "mc solution\nlevel " << level.str() << "\n";
    std::cout << "b = " << io::format_combo(sol.b, names) << "\n";
    if (witness) {
      Vec<K> res = mc_residual(a, sol.b);
      std::cout << "residual = " << io::format_combo(res, names) << "\n";
    }
  } else {
    const auto& obs = std::get<ObstructionReport<K>>(outcome);
    std::string kappa;
    for (std::size_t i = 0; i < obs.kappa_class.size(); ++i) {
      if (i) kappa += ", ";
      kappa += obs.kappa_class[i].str();
    }
    std::cout << "mc obstruction\nlevel " << obs.level.str() << "\n";
    std::cout << "kappa = [" << kappa << "]\n";
  }
}

void cmd_mc(const std::string& path, const FieldSpec& field, bool witness) {
  std::string text = read_file(path);
  if (field.rational) {
    mc_report(io::parse_dga<Rational>(text), witness);
  } else {
    CurvedDGA<Fp> a = io::parse_dga<Fp>(text);
    pin(a, field.p);
    a.validate();
    mc_report(a, witness);
  }
}

template <class K>
void tc_report(const TwistedComplex<K>& t) {
  std::cout << "slots " << t.slots() << "\n";
  bool zero = tc_residual_is_zero(tc_residual(t));
  std::cout << "residual zero: " << (zero ? "true" : "false") << "\n";
  Totalization<K> tot = tc_totalize(t);
  std::cout << "total dim " << tot.degrees.size() << "\n";
  Mat<K> sq = tot.diff * tot.diff;
  std::cout << "total squares to zero: " << (is_zero_matrix(sq) ? "true" : "false") << "\n";
}

void cmd_tc(const std::string& path, const FieldSpec& field) {
  std::string text = read_file(path);
  if (field.rational) {
    tc_report(io::parse_tc<Rational>(text));
  } else {
    TwistedComplex<Fp> t = io::parse_tc<Fp>(text);
    pin(t, field.p);
    t.validate();
    tc_report(t);
  }
}

template <class K>
void cl_report(const std::string& literal, Exponent default_cutoff, std::uint64_t p) {
  NovikovScalar<K> b = NovikovScalar<K>::parse(literal, default_cutoff);
  if constexpr (std::is_same_v<K, Fp>) b = pin(b, p);
  NovikovLocalSystem<K> sys = cl(b);
  NovikovScalar<K> back = cl_invert(sys);
  std::cout << "monodromy = " << sys.monodromy().str(true) << "\n";
  std::cout << "recovered = " << back.str(true) << "\n";
  std::cout << "round trip: " << (back == b ? "true" : "false") << "\n";
}

void cmd_cl(const std::string& literal, const FieldSpec& field, const std::string& cutoff_flag) {
  Exponent cut = cutoff_flag.empty() ? Exponent::infinity() : Exponent::parse(cutoff_flag);
  if (field.rational)
    cl_report<Rational>(literal, cut, 0);
  else
    cl_report<Fp>(literal, cut, field.p);
}

// --- demos: compact reproductions of the headline computations ---

Rational rand_rational(std::mt19937_64& rng, long lo, long hi, long maxden) {
  long span = hi - lo + 1;
  long num = lo + static_cast<long>(rng() % static_cast<std::uint64_t>(span));
  long den = 1 + static_cast<long>(rng() % static_cast<std::uint64_t>(maxden));
  return Rational(num, den);
}

// Circle function with nonzero slope on every segment: a cyclic walk with
// nonzero steps, resampled until the wrap step is nonzero too.
PLFunction random_generic_circle(std::mt19937_64& rng, long max_bp) {
  for (;;) {
    long n = 2 + static_cast<long>(rng() % static_cast<std::uint64_t>(max_bp - 1));
    std::vector<long> ticks(24);
    std::iota(ticks.begin(), ticks.end(), 0);
    for (long i = 23; i > 0; --i) std::swap(ticks[i], ticks[rng() % static_cast<std::uint64_t>(i + 1)]);
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

PLFunction random_circle(std::mt19937_64& rng, long max_bp) {
  long n = 1 + static_cast<long>(rng() % static_cast<std::uint64_t>(max_bp));
  std::vector<long> ticks(24);
  std::iota(ticks.begin(), ticks.end(), 0);
  for (long i = 23; i > 0; --i) std::swap(ticks[i], ticks[rng() % static_cast<std::uint64_t>(i + 1)]);
  ticks.resize(static_cast<std::size_t>(n));
  std::sort(ticks.begin(), ticks.end());
  std::vector<Rational> xs, vs;
  for (long t : ticks) xs.push_back(Rational(t, 24));
  for (long i = 0; i < n; ++i) vs.push_back(rand_rational(rng, -6, 6, 3));
  return PLFunction::on_circle(xs, vs);
}

int demo_intersection(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::cout << "lhs rhs\n";
  bool all = true;
  auto emit = [&](const GFObject& F, const GFObject& G) {
    auto [lhs, rhs] = intersection_count_check(F, G);
    std::cout << lhs << " " << rhs << "\n";
    if (lhs != rhs) all = false;
  };
  PLFunction quarter = PLFunction::on_circle({Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4)},
                                             {Rational(0), Rational(1), Rational(1, 5), Rational(3, 2)});
  PLFunction zero = PLFunction::on_circle({Rational(0)}, {Rational(0)});
  emit(GFObject{quarter, "F"}, GFObject{zero, "G"});
  for (int k = 0; k < 19; ++k) {
    PLFunction g = random_circle(rng, 4);
    PLFunction h = random_generic_circle(rng, 4);
    emit(GFObject{g + h, "F"}, GFObject{g, "G"});
  }
  std::cout << (all ? "all pairs equal" : "MISMATCH") << "\n";
  return all ? 0 : 1;
}

int demo_dist() {
  EqBarcode e2 = EqBarcode::torsion({Rational(2)});
  EqBarcode e5 = EqBarcode::torsion({Rational(5)});
  std::cout << interleaving_distance<Rational>(e2, e5).str() << "\n";
  EqBarcode a = EqBarcode::torsion({Rational(7, 3)});
  std::cout << interleaving_distance<Rational>(a, EqBarcode::zero()).str() << "\n";
  std::cout << interleaving_distance<Rational>(EqBarcode::unit(), EqBarcode::zero()).str() << "\n";
  return 0;
}

// Three-element algebra <1, x, y> with x*x = y and optionally d(x) = T^c y.
CurvedDGA<Rational> demo_square_dga(const Rational& c, bool flat) {
  CurvedDGA<Rational> a;
  a.cutoff = Exponent::infinity();
  a.gapping = {Rational(0), c};
  a.degrees = {0, 1, 2};
  a.names = {"e", "x", "y"};
  const long n = 3;
  a.mult.assign(n, std::vector<Vec<Rational>>());
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) a.mult[static_cast<std::size_t>(i)].push_back(zero_matrix<Rational>(n, 1, a.cutoff));
  auto unit_row = [&](long i) {
    a.mult[0][static_cast<std::size_t>(i)](i) = NovikovScalar<Rational>::one(a.cutoff);
    a.mult[static_cast<std::size_t>(i)][0](i) = NovikovScalar<Rational>::one(a.cutoff);
  };
  unit_row(0);
  unit_row(1);
  unit_row(2);
  a.mult[1][1](2) = NovikovScalar<Rational>::one(a.cutoff);
  a.diff = zero_matrix<Rational>(n, n, a.cutoff);
  if (!flat) a.diff(2, 1) = tpow<Rational>(c, a.cutoff);
  a.curvature = zero_matrix<Rational>(n, 1, a.cutoff);
  a.unit = a.basis_elem(0);
  a.validate();
  return a;
}

// Two-element algebra <1, y> with zero differential and curvature T^c y:
// nothing can cancel the curvature, so the class survives to the residue.
CurvedDGA<Rational> demo_obstructed_dga(const Rational& c) {
  CurvedDGA<Rational> a;
  a.cutoff = Exponent::infinity();
  a.gapping = {Rational(0), c};
  a.degrees = {0, 2};
  a.names = {"e", "y"};
  a.mult.assign(2, std::vector<Vec<Rational>>());
  for (long i = 0; i < 2; ++i)
    for (long j = 0; j < 2; ++j) a.mult[static_cast<std::size_t>(i)].push_back(zero_matrix<Rational>(2, 1, a.cutoff));
  a.mult[0][0](0) = NovikovScalar<Rational>::one(a.cutoff);
  a.mult[0][1](1) = NovikovScalar<Rational>::one(a.cutoff);
  a.mult[1][0](1) = NovikovScalar<Rational>::one(a.cutoff);
  a.diff = zero_matrix<Rational>(2, 2, a.cutoff);
  a.curvature = zero_matrix<Rational>(2, 1, a.cutoff);
  a.curvature(1) = tpow<Rational>(c, a.cutoff);
  a.unit = a.basis_elem(0);
  a.validate();
  return a;
}

// Curvature T^c y against d(x) = y: the solver must output exactly -T^c x.
CurvedDGA<Rational> demo_curved_line_dga(const Rational& c) {
  CurvedDGA<Rational> a = demo_square_dga(c, true);
  a.cutoff = Exponent(c + c);
  a.gapping = {Rational(0), c};
  for (auto& row : a.mult)
    for (auto& v : row) v = Mat<Rational>(v.unaryExpr([&](const NovikovScalar<Rational>& s) { return s.truncated(a.cutoff); }));
  a.mult[1][1] = zero_matrix<Rational>(3, 1, a.cutoff);  // x*x = 0 here; y only tracks the curvature
  a.diff = zero_matrix<Rational>(3, 3, a.cutoff);
  a.diff(2, 1) = NovikovScalar<Rational>::one(a.cutoff);
  a.curvature = zero_matrix<Rational>(3, 1, a.cutoff);
  a.curvature(2) = tpow<Rational>(c, a.cutoff);
  a.unit = a.basis_elem(0);
  a.validate();
  return a;
}

int demo_mc() {
  mc_report(demo_square_dga(Rational(1), false), false);
  mc_report(demo_curved_line_dga(Rational(1)), false);
  mc_report(demo_obstructed_dga(Rational(1)), false);
  return 0;
}

int demo_stability(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  bool all = true;
  for (int k = 0; k < 10; ++k) {
    PLFunction f = random_circle(rng, 5);
    PLFunction g = random_circle(rng, 5);
    PLFunction h = random_circle(rng, 4);
    StabilityReport rep = stability_check(GFObject{f, "F"}, GFObject{g, "G"}, h);
    std::cout << "bound=" << rep.dist_bound.str() << " osc=" << rep.osc.str() << "\n";
    if (Exponent(rep.osc) < rep.dist_bound) all = false;
  }
  std::cout << (all ? "all bounds within oscillation" : "BOUND EXCEEDED") << "\n";
  return all ? 0 : 1;
}

int cmd_demo(const std::string& name, std::uint64_t seed) {
  if (name == "intersection") return demo_intersection(seed);
  if (name == "dist") return demo_dist();
  if (name == "mc") return demo_mc();
  if (name == "stability") return demo_stability(seed);
  throw ParseError("unknown demo: '" + name + "' (intersection, dist, mc, stability)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact Novikov-ring algebra: normal forms, interleaving distances, Maurer-Cartan solving, 1-D generating functions"};
  app.require_subcommand(1);

  std::string field = "q", cutoff_flag;
  bool witness = false;
  std::uint64_t seed = 0;

  std::string nf_path;
  CLI::App* nf = app.add_subcommand("nf", "normal form of the module presented by a relation matrix");
  nf->add_option("matrix", nf_path, "matrix file")->required();
  nf->add_option("--field", field, "coefficient field: q or fp:<p>");
  nf->add_option("--cutoff", cutoff_flag, "truncate entries to this cutoff");

  std::string dist_e, dist_f;
  CLI::App* dist = app.add_subcommand("dist", "interleaving distance between equivariant barcodes");
  dist->add_option("E", dist_e, "first barcode file")->required();
  dist->add_option("F", dist_f, "second barcode file")->required();
  dist->add_flag("--witness", witness, "dump the interleaving maps at the upper bound");

  std::string hom_f, hom_g;
  CLI::App* hom = app.add_subcommand("hom", "graded Hom module of two generating functions");
  hom->add_option("F", hom_f, "first PL function file")->required();
  hom->add_option("G", hom_g, "second PL function file")->required();
  hom->add_option("--cutoff", cutoff_flag, "compute modulo this cutoff");

  std::string mc_path;
  CLI::App* mc = app.add_subcommand("mc", "solve the Maurer-Cartan equation of a curved dga");
  mc->add_option("dga", mc_path, "curved dga file")->required();
  mc->add_option("--field", field, "coefficient field: q or fp:<p>");
  mc->add_flag("--witness", witness, "print the residual at the solution");

  std::string tc_path;
  CLI::App* tc = app.add_subcommand("tc", "totalize a twisted complex and report its residual");
  tc->add_option("complex", tc_path, "twisted complex file")->required();
  tc->add_option("--field", field, "coefficient field: q or fp:<p>");

  std::string persist_mode;
  std::vector<std::string> persist_paths;
  CLI::App* persist = app.add_subcommand("persist", "sublevel persistence, intersection counts, stability");
  persist->add_option("mode", persist_mode, "sublevel | intersection | stability")->required();
  persist->add_option("inputs", persist_paths, "PL function files")->expected(1, 3);
  persist->add_option("--cutoff", cutoff_flag, "compute modulo this cutoff");

  std::string cl_literal;
  CLI::App* cl_cmd = app.add_subcommand("cl", "classify a rank-one local system from its Novikov element");
  cl_cmd->add_option("b", cl_literal, "scalar literal, e.g. 'T^(1/3) @cutoff 1'")->required();
  cl_cmd->add_option("--field", field, "coefficient field: q or fp:<p>");
  cl_cmd->add_option("--cutoff", cutoff_flag, "default cutoff when the literal has no annotation");

  std::string demo_name;
  CLI::App* demo = app.add_subcommand("demo", "reproduce the headline computations");
  demo->add_option("name", demo_name, "intersection | dist | mc | stability")->required();
  demo->add_option("--seed", seed, "seed for the randomized tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    FieldSpec fs = parse_field(field);
    if (nf->parsed()) {
      cmd_nf(nf_path, fs, cutoff_flag);
    } else if (dist->parsed()) {
      cmd_dist(dist_e, dist_f, witness);
    } else if (hom->parsed()) {
      cmd_hom(hom_f, hom_g, cutoff_flag);
    } else if (mc->parsed()) {
      cmd_mc(mc_path, fs, witness);
    } else if (tc->parsed()) {
      cmd_tc(tc_path, fs);
    } else if (persist->parsed()) {
      cmd_persist(persist_mode, persist_paths, cutoff_flag);
    } else if (cl_cmd->parsed()) {
      cmd_cl(cl_literal, fs, cutoff_flag);
    } else if (demo->parsed()) {
      return cmd_demo(demo_name, seed);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
