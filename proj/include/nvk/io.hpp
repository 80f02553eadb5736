#pragma once

#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nvk/barcode.hpp"
#include "nvk/curved.hpp"
#include "nvk/error.hpp"
#include "nvk/module.hpp"
#include "nvk/novikov.hpp"
#include "nvk/persist1d.hpp"

namespace nvk {
namespace io {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// Comment-stripped, blank-dropped lines; the unit all parsers consume.
inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

inline std::vector<std::string> tokens_of(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string t;
  while (in >> t) out.push_back(t);
  return out;
}

inline Exponent parse_cutoff_token(const std::string& t) { return Exponent::parse(t); }

// --- matrices: header `rows cols cutoff`, then row-major scalar literals ---

template <class K>
std::string format_matrix(const Mat<K>& m) {
  Exponent cut = Exponent::infinity();
  for (long i = 0; i < m.rows() && cut.is_infinite(); ++i)
    for (long j = 0; j < m.cols(); ++j)
      if (m(i, j).cutoff().is_finite()) {
        cut = m(i, j).cutoff();
        break;
      }
  std::string out =
      std::to_string(m.rows()) + " " + std::to_string(m.cols()) + " " + cut.str() + "\n";
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) out += m(i, j).str(false) + "\n";
  return out;
}

template <class K>
Mat<K> parse_matrix(const std::string& text) {
  std::vector<std::string> ls = lines_of(text);
  if (ls.empty()) throw ParseError("empty matrix file");
  std::vector<std::string> head = tokens_of(ls[0]);
  if (head.size() != 3) throw ParseError("matrix header must be `rows cols cutoff`");
  long rows = 0, cols = 0;
  try {
    rows = std::stol(head[0]);
    cols = std::stol(head[1]);
  } catch (const std::exception&) {
    throw ParseError("bad matrix dimensions");
  }
  if (rows < 0 || cols < 0) throw ParseError("bad matrix dimensions");
  Exponent cut = parse_cutoff_token(head[2]);
  if (static_cast<long>(ls.size()) != 1 + rows * cols)
    throw ParseError("matrix body must hold rows*cols scalar literals");
  Mat<K> m = zero_matrix<K>(rows, cols, cut);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      m(i, j) = NovikovScalar<K>::parse(ls[static_cast<std::size_t>(1 + i * cols + j)], cut);
  return m;
}

// --- normal forms and equivariant barcodes ---

inline NormalForm parse_normal_form(const std::string& line) {
  auto tpos = line.find("torsion:");
  auto lb = line.find('[', tpos == std::string::npos ? 0 : tpos);
  auto rb = line.find(']', lb == std::string::npos ? 0 : lb);
  auto fpos = line.find("free:");
  if (tpos == std::string::npos || lb == std::string::npos || rb == std::string::npos ||
      fpos == std::string::npos || fpos < rb)
    throw ParseError("normal form must read `torsion: [...], free: r`");
  NormalForm nf;
  std::string body = line.substr(lb + 1, rb - lb - 1);
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto comma = body.find(',', pos);
    std::string piece = trim(body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    if (!piece.empty()) nf.torsion.push_back(Rational::parse(piece));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  std::string fr = trim(line.substr(fpos + 5));
  try {
    nf.free = std::stol(fr);
  } catch (const std::exception&) {
    throw ParseError("bad free rank: '" + fr + "'");
  }
  if (nf.free < 0) throw ParseError("bad free rank: '" + fr + "'");
  nf.canonicalize();
  return nf;
}

inline std::string format_eq(const EqBarcode& e) {
  return e.nf.str() + "\ncutoff " + e.cutoff.str() + "\n";
}

inline EqBarcode parse_eq(const std::string& text) {
  std::vector<std::string> ls = lines_of(text);
  if (ls.empty() || ls.size() > 2) throw ParseError("equivariant barcode file: normal form line, optional cutoff line");
  EqBarcode e{parse_normal_form(ls[0]), Exponent::infinity()};
  if (ls.size() == 2) {
    std::vector<std::string> ts = tokens_of(ls[1]);
    if (ts.size() != 2 || ts[0] != "cutoff") throw ParseError("second line must read `cutoff <p/q|inf>`");
    e.cutoff = parse_cutoff_token(ts[1]);
  }
  for (const Rational& c : e.nf.torsion)
    if (c.sign() <= 0) throw ParseError("torsion lengths must be positive");
  return e;
}

// --- plain barcodes: one bar per line `birth length [degree]` ---

inline std::string format_plain(const PlainBarcode& p) {
  std::string out;
  for (const Bar& b : p.bars) {
    out += b.birth.str() + " " + b.length.str();
    if (b.degree != 0) out += " " + std::to_string(b.degree);
    out += "\n";
  }
  return out;
}

inline PlainBarcode parse_plain(const std::string& text) {
  PlainBarcode p;
  for (const std::string& line : lines_of(text)) {
    std::vector<std::string> ts = tokens_of(line);
    if (ts.size() != 2 && ts.size() != 3) throw ParseError("bar line must read `birth length [degree]`");
    Bar b{Rational::parse(ts[0]), Exponent::parse(ts[1]), 0};
    if (ts.size() == 3) {
      try {
        b.degree = std::stoi(ts[2]);
      } catch (const std::exception&) {
        throw ParseError("bad bar degree: '" + ts[2] + "'");
      }
    }
    p.bars.push_back(b);
  }
  p.canonicalize();
  return p;
}

// --- PL functions: `base pt|interval x0 x1|circle`, then `x v` lines ---

inline std::string format_pl(const PLFunction& f) {
  std::string out = "base ";
  switch (f.base) {
    case BaseKind::pt: out += "pt"; break;
    case BaseKind::interval: out += "interval " + f.x0.str() + " " + f.x1.str(); break;
    case BaseKind::circle: out += "circle"; break;
  }
  out += "\n";
  for (long i = 0; i < f.size(); ++i)
    out += f.xs[static_cast<std::size_t>(i)].str() + " " + f.vs[static_cast<std::size_t>(i)].str() + "\n";
  return out;
}

inline PLFunction parse_pl(const std::string& text) {
  std::vector<std::string> ls = lines_of(text);
  if (ls.empty()) throw ParseError("empty PL function file");
  std::vector<std::string> head = tokens_of(ls[0]);
  if (head.size() < 2 || head[0] != "base") throw ParseError("first line must read `base pt|interval x0 x1|circle`");
  PLFunction f;
  if (head[1] == "pt") {
    if (head.size() != 2) throw ParseError("pt base takes no endpoints");
    f.base = BaseKind::pt;
  } else if (head[1] == "interval") {
    if (head.size() != 4) throw ParseError("interval base needs two endpoints");
    f.base = BaseKind::interval;
    f.x0 = Rational::parse(head[2]);
    f.x1 = Rational::parse(head[3]);
  } else if (head[1] == "circle") {
    if (head.size() != 2) throw ParseError("circle base takes no endpoints");
    f.base = BaseKind::circle;
  } else {
    throw ParseError("unknown base kind: '" + head[1] + "'");
  }
  for (std::size_t i = 1; i < ls.size(); ++i) {
    std::vector<std::string> ts = tokens_of(ls[i]);
    if (ts.size() != 2) throw ParseError("breakpoint line must read `x v`");
    f.xs.push_back(Rational::parse(ts[0]));
    f.vs.push_back(Rational::parse(ts[1]));
  }
  f.validate();
  return f;
}

// --- linear combinations over a named basis: `(scalar)*name + ...` or `0` ---

template <class K>
std::string format_combo(const Vec<K>& v, const std::vector<std::string>& names) {
  std::string out;
  for (long i = 0; i < v.rows(); ++i) {
    if (v(i).is_zero()) continue;
    if (!out.empty()) out += " + ";
    out += "(" + v(i).str(false) + ")*" + names[static_cast<std::size_t>(i)];
  }
  return out.empty() ? "0" : out;
}

template <class K>
Vec<K> parse_combo(const std::string& s, const std::map<std::string, long>& index, long dim, Exponent cutoff) {
  Vec<K> v = zero_matrix<K>(dim, 1, cutoff);
  std::string body = trim(s);
  if (body == "0") return v;
  std::size_t pos = 0;
  int depth = 0;
  std::size_t start = 0;
  std::vector<std::string> pieces;
  for (; pos <= body.size(); ++pos) {
    if (pos == body.size() || (body[pos] == '+' && depth == 0)) {
      pieces.push_back(trim(body.substr(start, pos - start)));
      start = pos + 1;
      continue;
    }
    if (body[pos] == '(') ++depth;
    if (body[pos] == ')') --depth;
  }
  for (const std::string& piece : pieces) {
    if (piece.empty() || piece.front() != '(') throw ParseError("combination term must read `(scalar)*name`");
    auto close = piece.rfind(')');
    auto star = piece.find('*', close == std::string::npos ? 0 : close);
    if (close == std::string::npos || star == std::string::npos)
      throw ParseError("combination term must read `(scalar)*name`");
    std::string lit = piece.substr(1, close - 1);
    std::string name = trim(piece.substr(star + 1));
    auto it = index.find(name);
    if (it == index.end()) throw ParseError("unknown basis name: '" + name + "'");
    v(it->second) = v(it->second) + NovikovScalar<K>::parse(lit, cutoff);
  }
  return v;
}

// --- curved dgas ---

inline void check_basis_name(const std::string& name) {
  if (name.empty() || (!std::isalpha(static_cast<unsigned char>(name[0])) && name[0] != '_'))
    throw ParseError("basis name must start with a letter: '" + name + "'");
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_')
      throw ParseError("basis name must be alphanumeric: '" + name + "'");
}

template <class K>
std::string format_dga(const CurvedDGA<K>& a) {
  std::vector<std::string> names = a.names;
  if (names.empty())
    for (long i = 0; i < a.dim(); ++i) names.push_back("g" + std::to_string(i));
  std::string out = "dga\ncutoff " + a.cutoff.str() + "\ngapping";
  for (const Rational& c : a.gapping) out += " " + c.str();
  out += "\n";
  for (long i = 0; i < a.dim(); ++i)
    out += "basis " + names[static_cast<std::size_t>(i)] + " " +
           std::to_string(a.degrees[static_cast<std::size_t>(i)]) + "\n";
  out += "unit " + format_combo(a.unit, names) + "\n";
  out += "curvature " + format_combo(a.curvature, names) + "\n";
  for (long i = 0; i < a.dim(); ++i)
    for (long j = 0; j < a.dim(); ++j) {
      const Vec<K>& p = a.mult[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      bool zero = true;
      for (long k = 0; k < p.rows(); ++k)
        if (!p(k).is_zero()) zero = false;
      if (!zero)
        out += "mult " + names[static_cast<std::size_t>(i)] + "*" + names[static_cast<std::size_t>(j)] +
               " = " + format_combo(p, names) + "\n";
    }
  for (long j = 0; j < a.dim(); ++j) {
    Vec<K> col = a.diff.col(j);
    bool zero = true;
    for (long k = 0; k < col.rows(); ++k)
      if (!col(k).is_zero()) zero = false;
    if (!zero) out += "diff " + names[static_cast<std::size_t>(j)] + " = " + format_combo(col, names) + "\n";
  }
  out += "end\n";
  return out;
}

template <class K>
CurvedDGA<K> parse_dga(const std::string& text) {
  std::vector<std::string> ls = lines_of(text);
  if (ls.empty() || ls[0] != "dga") throw ParseError("curved dga file must open with `dga`");
  CurvedDGA<K> a;
  a.gapping.clear();
  std::map<std::string, long> index;
  std::vector<std::pair<std::string, std::string>> mult_lines, diff_lines;
  std::string unit_line, curvature_line;
  bool have_cutoff = false, have_gapping = false;
  for (std::size_t li = 1; li < ls.size(); ++li) {
    const std::string& line = ls[li];
    if (line == "end") break;
    std::vector<std::string> ts = tokens_of(line);
    if (ts[0] == "cutoff") {
      if (ts.size() != 2 || have_cutoff) throw ParseError("cutoff line must read `cutoff <p/q|inf>` once");
      a.cutoff = parse_cutoff_token(ts[1]);
      have_cutoff = true;
    } else if (ts[0] == "gapping") {
      if (ts.size() < 2 || have_gapping) throw ParseError("gapping line must list the generators once");
      for (std::size_t i = 1; i < ts.size(); ++i) a.gapping.push_back(Rational::parse(ts[i]));
      have_gapping = true;
    } else if (ts[0] == "basis") {
      if (ts.size() != 3) throw ParseError("basis line must read `basis name degree`");
      check_basis_name(ts[1]);
      if (index.count(ts[1])) throw ParseError("duplicate basis name: '" + ts[1] + "'");
      index[ts[1]] = a.dim();
      a.names.push_back(ts[1]);
      try {
        a.degrees.push_back(std::stoi(ts[2]));
      } catch (const std::exception&) {
        throw ParseError("bad basis degree: '" + ts[2] + "'");
      }
    } else if (ts[0] == "unit") {
      unit_line = trim(line.substr(4));
    } else if (ts[0] == "curvature") {
      curvature_line = trim(line.substr(9));
    } else if (ts[0] == "mult") {
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("mult line must read `mult gi*gj = combination`");
      std::string lhs = trim(line.substr(4, eq - 4));
      mult_lines.emplace_back(lhs, trim(line.substr(eq + 1)));
    } else if (ts[0] == "diff") {
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("diff line must read `diff gj = combination`");
      diff_lines.emplace_back(trim(line.substr(4, eq - 4)), trim(line.substr(eq + 1)));
    } else {
      throw ParseError("unknown dga directive: '" + ts[0] + "'");
    }
  }
  const long n = a.dim();
  if (n == 0) throw ParseError("dga needs at least one basis element");
  if (!have_gapping) a.gapping = {Rational(0)};
  if (unit_line.empty()) throw ParseError("dga needs a unit line");
  a.unit = parse_combo<K>(unit_line, index, n, a.cutoff);
  if (curvature_line.empty())
    a.curvature = zero_matrix<K>(n, 1, a.cutoff);
  else
    a.curvature = parse_combo<K>(curvature_line, index, n, a.cutoff);
  a.mult.assign(static_cast<std::size_t>(n), std::vector<Vec<K>>());
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) a.mult[static_cast<std::size_t>(i)].push_back(zero_matrix<K>(n, 1, a.cutoff));
  for (const auto& [lhs, rhs] : mult_lines) {
    auto star = lhs.find('*');
    if (star == std::string::npos) throw ParseError("mult left side must read `gi*gj`");
    std::string ni = trim(lhs.substr(0, star)), nj = trim(lhs.substr(star + 1));
    if (!index.count(ni) || !index.count(nj)) throw ParseError("unknown basis name in mult: '" + lhs + "'");
    a.mult[static_cast<std::size_t>(index[ni])][static_cast<std::size_t>(index[nj])] =
        parse_combo<K>(rhs, index, n, a.cutoff);
  }
  a.diff = zero_matrix<K>(n, n, a.cutoff);
  for (const auto& [name, rhs] : diff_lines) {
    if (!index.count(name)) throw ParseError("unknown basis name in diff: '" + name + "'");
    Vec<K> col = parse_combo<K>(rhs, index, n, a.cutoff);
    for (long r = 0; r < n; ++r) a.diff(r, index[name]) = col(r);
  }
  a.validate();
  return a;
}

// --- twisted complexes ---

template <class K>
std::string format_tc(const TwistedComplex<K>& t) {
  std::string out = "tc\ncutoff " + t.cutoff.str() + "\n";
  for (long i = 0; i < t.slots(); ++i) {
    const TCObject<K>& o = t.objects[static_cast<std::size_t>(i)];
    out += "object " + o.offset.str() + " :";
    for (int d : o.degrees) out += " " + std::to_string(d);
    out += "\n";
  }
  for (long i = 0; i < t.slots(); ++i) {
    const TCObject<K>& o = t.objects[static_cast<std::size_t>(i)];
    out += "diff " + std::to_string(i) + "\n";
    for (long r = 0; r < o.dim(); ++r)
      for (long c = 0; c < o.dim(); ++c) out += o.diff(r, c).str(false) + "\n";
  }
  for (long i = 0; i < t.slots(); ++i)
    for (long j = 0; j < i; ++j) {
      const Mat<K>& f = t.maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      out += "map " + std::to_string(i) + " " + std::to_string(j) + "\n";
      for (long r = 0; r < f.rows(); ++r)
        for (long c = 0; c < f.cols(); ++c) out += f(r, c).str(false) + "\n";
    }
  out += "end\n";
  return out;
}

template <class K>
TwistedComplex<K> parse_tc(const std::string& text) {
  std::vector<std::string> ls = lines_of(text);
  if (ls.empty() || ls[0] != "tc") throw ParseError("twisted complex file must open with `tc`");
  TwistedComplex<K> t;
  std::size_t li = 1;
  if (li < ls.size()) {
    std::vector<std::string> ts = tokens_of(ls[li]);
    if (ts.size() == 2 && ts[0] == "cutoff") {
      t.cutoff = parse_cutoff_token(ts[1]);
      ++li;
    }
  }
  while (li < ls.size()) {
    std::vector<std::string> ts = tokens_of(ls[li]);
    if (ts[0] != "object") break;
    if (ts.size() < 3 || ts[2] != ":") throw ParseError("object line must read `object offset : degrees...`");
    TCObject<K> o;
    o.offset = Rational::parse(ts[1]);
    for (std::size_t k = 3; k < ts.size(); ++k) {
      try {
        o.degrees.push_back(std::stoi(ts[k]));
      } catch (const std::exception&) {
        throw ParseError("bad object degree: '" + ts[k] + "'");
      }
    }
    if (o.degrees.empty()) throw ParseError("object needs at least one generator");
    o.diff = zero_matrix<K>(o.dim(), o.dim(), t.cutoff);
    t.objects.push_back(std::move(o));
    ++li;
  }
  const long n = t.slots();
  if (n == 0) throw ParseError("twisted complex needs at least one object");
  t.maps.assign(static_cast<std::size_t>(n), std::vector<Mat<K>>());
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < i; ++j)
      t.maps[static_cast<std::size_t>(i)].push_back(
          zero_matrix<K>(t.objects[static_cast<std::size_t>(j)].dim(),
                         t.objects[static_cast<std::size_t>(i)].dim(), t.cutoff));
  auto read_block = [&](long rows, long cols, Mat<K>& into) {
    if (li + static_cast<std::size_t>(rows * cols) > ls.size())
      throw ParseError("matrix block cut short");
    for (long r = 0; r < rows; ++r)
      for (long c = 0; c < cols; ++c)
        into(r, c) = NovikovScalar<K>::parse(ls[li++], t.cutoff);
  };
  while (li < ls.size() && ls[li] != "end") {
    std::vector<std::string> ts = tokens_of(ls[li]);
    auto slot = [&](const std::string& s) {
      try {
        return std::stol(s);
      } catch (const std::exception&) {
        throw ParseError("bad slot index: '" + s + "'");
      }
    };
    if (ts[0] == "diff") {
      if (ts.size() != 2) throw ParseError("diff block must read `diff i`");
      long i = slot(ts[1]);
      if (i < 0 || i >= n) throw ParseError("diff block slot out of range");
      ++li;
      read_block(t.objects[static_cast<std::size_t>(i)].dim(), t.objects[static_cast<std::size_t>(i)].dim(),
                 t.objects[static_cast<std::size_t>(i)].diff);
    } else if (ts[0] == "map") {
      if (ts.size() != 3) throw ParseError("map block must read `map i j`");
      long i = slot(ts[1]), j = slot(ts[2]);
      if (j < 0 || j >= i || i >= n) throw ParseError("map block slots out of range");
      ++li;
      read_block(t.objects[static_cast<std::size_t>(j)].dim(), t.objects[static_cast<std::size_t>(i)].dim(),
                 t.maps[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
    } else {
      throw ParseError("unknown twisted complex directive: '" + ts[0] + "'");
    }
  }
  t.validate();
  return t;
}

}  // namespace io
}  // namespace nvk
