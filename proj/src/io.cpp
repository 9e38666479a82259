#include "pim/io.hpp"

#include <fstream>
#include <sstream>

namespace pim {

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

// value of "key=value" or throw
std::string kv(const std::string& token, const std::string& key, std::size_t line_no) {
  std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0)
    throw ParseError(line_no, "expected " + key + "=..., got '" + token + "'");
  return token.substr(prefix.size());
}

Rational parse_rat_at(const std::string& text, std::size_t line_no) {
  try {
    return parse_rational(text);
  } catch (const std::exception& e) {
    throw ParseError(line_no, e.what());
  }
}

Interval parse_iv_at(const std::string& text, std::size_t line_no) {
  auto dots = text.find("..");
  if (dots == std::string::npos) throw ParseError(line_no, "expected <lo>..<hi>, got '" + text + "'");
  Rational lo = parse_rat_at(text.substr(0, dots), line_no);
  Rational hi = parse_rat_at(text.substr(dots + 2), line_no);
  if (!(lo < hi)) throw ParseError(line_no, "interval needs lo < hi in '" + text + "'");
  return open_iv(lo, hi);
}

bool skip_line(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  return in;
}

}  // namespace

Interval parse_interval(const std::string& text) { return parse_iv_at(text, 0); }

PiecewiseMap load_map(std::istream& in) {
  std::optional<Interval> ambient;
  std::vector<Branch> branches;
  ArithmeticMode mode = ArithmeticMode::exact;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    auto toks = tokens_of(line);
    if (toks.size() >= 2 && toks[1] == "=") {
      if (toks[0] == "ambient" && toks.size() == 3) {
        ambient = parse_iv_at(toks[2], line_no);
        continue;
      }
      if (toks[0] == "branch" && toks.size() == 6) {
        Rational lo = parse_rat_at(toks[2], line_no);
        Rational hi = parse_rat_at(toks[3], line_no);
        Rational slope = parse_rat_at(toks[4], line_no);
        Rational offset = parse_rat_at(toks[5], line_no);
        if (!(lo < hi)) throw ParseError(line_no, "branch domain needs lo < hi");
        if (slope == 0) throw ParseError(line_no, "branch slope must be nonzero");
        branches.push_back({open_iv(lo, hi), AffineMap{slope, offset}});
        continue;
      }
      if (toks[0] == "mode" && toks.size() == 3) {
        if (toks[2] == "exact")
          mode = ArithmeticMode::exact;
        else if (toks[2] == "numeric")
          mode = ArithmeticMode::numeric;
        else
          throw ParseError(line_no, "mode must be exact or numeric");
        continue;
      }
    }
    throw ParseError(line_no, "unrecognized map line: '" + line + "'");
  }
  if (!ambient) throw ParseError(line_no, "missing ambient interval");
  if (branches.empty()) throw ParseError(line_no, "missing branches");
  try {
    return PiecewiseMap(*ambient, std::move(branches), mode);
  } catch (const std::exception& e) {
    throw ParseError(line_no, e.what());
  }
}

PiecewiseMap load_map_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_map(in);
}

void dump_map(std::ostream& out, const PiecewiseMap& map) {
  out << "ambient = " << iv_str(map.ambient()) << "\n";
  for (const Branch& b : map.branches())
    out << "branch = " << rat_str(b.domain.lo) << " " << rat_str(b.domain.hi) << " "
        << rat_str(b.map.slope) << " " << rat_str(b.map.offset) << "\n";
  out << "mode = " << (map.exact() ? "exact" : "numeric") << "\n";
}

void dump_tower(std::ostream& out, const Tower& tower) {
  out << "depth=" << tower.depth << " saturated=" << (tower.saturated ? 1 : 0) << "\n";
  for (const TowerElement& e : tower.elements)
    out << "elem " << e.id << " level=" << e.level << " interval=" << iv_str(e.interval) << "\n";
  for (const TowerTransition& t : tower.transitions)
    out << "edge " << t.from << " " << t.branch << " " << t.to << "\n";
}

void dump_scheme(std::ostream& out, const InducingScheme& scheme) {
  out << "base=" << iv_str(scheme.base) << " tau_max=" << scheme.tau_max
      << " covered=" << rat_str(scheme.covered_length)
      << " deficit=" << rat_str(scheme.mass_deficit);
  if (scheme.extended_base) out << " extended=" << iv_str(*scheme.extended_base);
  out << "\n";
  for (const BasicElement& e : scheme.elements) {
    out << "J " << iv_str(e.interval) << " tau=" << e.tau << " word=";
    for (std::size_t i = 0; i < e.branch_word.size(); ++i)
      out << (i ? "," : "") << e.branch_word[i];
    out << " host=" << iv_str(e.host);
    if (e.extended_host) out << " hostplus=" << iv_str(*e.extended_host);
    out << "\n";
  }
}

InducingScheme load_scheme(std::istream& in) {
  InducingScheme scheme;
  scheme.covered_length = rat(0);
  scheme.mass_deficit = rat(0);
  bool have_header = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    auto toks = tokens_of(line);
    if (!have_header) {
      if (toks.size() < 4) throw ParseError(line_no, "scheme header needs base/tau_max/covered/deficit");
      scheme.base = parse_iv_at(kv(toks[0], "base", line_no), line_no);
      scheme.tau_max = static_cast<unsigned>(std::stoul(kv(toks[1], "tau_max", line_no)));
      scheme.covered_length = parse_rat_at(kv(toks[2], "covered", line_no), line_no);
      scheme.mass_deficit = parse_rat_at(kv(toks[3], "deficit", line_no), line_no);
      if (toks.size() >= 5)
        scheme.extended_base = parse_iv_at(kv(toks[4], "extended", line_no), line_no);
      have_header = true;
      continue;
    }
    if (toks.empty() || toks[0] != "J" || toks.size() < 5)
      throw ParseError(line_no, "expected element record 'J <lo>..<hi> tau=.. word=.. host=..'");
    BasicElement e;
    e.interval = parse_iv_at(toks[1], line_no);
    e.tau = static_cast<unsigned>(std::stoul(kv(toks[2], "tau", line_no)));
    if (e.tau == 0) throw ParseError(line_no, "tau must be >= 1");
    std::string word = kv(toks[3], "word", line_no);
    std::istringstream ws(word);
    std::string part;
    while (std::getline(ws, part, ','))
      if (!part.empty()) e.branch_word.push_back(std::stoul(part));
    if (e.branch_word.size() != e.tau)
      throw ParseError(line_no, "word length does not match tau");
    e.host = parse_iv_at(kv(toks[4], "host", line_no), line_no);
    if (toks.size() >= 6) e.extended_host = parse_iv_at(kv(toks[5], "hostplus", line_no), line_no);
    scheme.elements.push_back(std::move(e));
  }
  if (!have_header) throw ParseError(line_no, "missing scheme header");
  // recompute the ledger so loaded schemes are internally consistent
  Rational covered = rat(0);
  for (const BasicElement& e : scheme.elements) covered += length(e.interval);
  if (covered != scheme.covered_length)
    throw ParseError(line_no, "covered length does not match the elements");
  if (scheme.mass_deficit != length(scheme.base) - covered)
    throw ParseError(line_no, "deficit does not match base length minus covered");
  return scheme;
}

InducingScheme load_scheme_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_scheme(in);
}

void dump_measure(std::ostream& out, const RationalMeasure& measure) {
  out << "total=" << rat_str(measure.total_mass) << "\n";
  for (const DensityPiece& p : measure.pieces)
    out << "piece " << iv_str(p.support) << " height=" << rat_str(p.height) << "\n";
  for (const Atom& a : measure.atoms)
    out << "atom " << rat_str(a.point) << " mass=" << rat_str(a.mass) << "\n";
}

RationalMeasure load_measure(std::istream& in) {
  std::vector<DensityPiece> pieces;
  std::vector<Atom> atoms;
  std::optional<Rational> total;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    auto toks = tokens_of(line);
    if (toks.size() == 1 && toks[0].rfind("total=", 0) == 0) {
      total = parse_rat_at(kv(toks[0], "total", line_no), line_no);
      continue;
    }
    if (toks.size() == 3 && toks[0] == "piece") {
      Interval support = parse_iv_at(toks[1], line_no);
      Rational height = parse_rat_at(kv(toks[2], "height", line_no), line_no);
      if (height < 0) throw ParseError(line_no, "negative height");
      pieces.push_back({support, height});
      continue;
    }
    if (toks.size() == 3 && toks[0] == "atom") {
      Rational point = parse_rat_at(toks[1], line_no);
      Rational mass = parse_rat_at(kv(toks[2], "mass", line_no), line_no);
      if (mass < 0) throw ParseError(line_no, "negative mass");
      atoms.push_back({point, mass});
      continue;
    }
    throw ParseError(line_no, "unrecognized measure line: '" + line + "'");
  }
  RationalMeasure m = make_measure(std::move(pieces), std::move(atoms));
  if (total && *total != m.total_mass)
    throw ParseError(line_no, "total does not match pieces and atoms");
  return m;
}

RationalMeasure load_measure_file(const std::string& path) {
  auto in = open_or_throw(path);
  return load_measure(in);
}

}  // namespace pim
