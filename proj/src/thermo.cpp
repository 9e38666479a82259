#include "pim/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace pim {

namespace {

AffineMap composite_of(const PiecewiseMap& map, const std::vector<std::size_t>& word) {
  AffineMap g = AffineMap::identity();
  for (std::size_t s : word) g = map.branches().at(s).map.after(g);
  return g;
}

Interval closure_of(const Interval& iv) { return Interval{iv.lo, iv.hi, false, false}; }

enum class CylState { nonempty, degenerate, empty };

// closed intersection that distinguishes a single shared point from nothing
std::pair<CylState, std::optional<Interval>> intersect_closed(const Interval& a,
                                                              const Interval& b) {
  Rational lo = std::max(a.lo, b.lo);
  Rational hi = std::min(a.hi, b.hi);
  if (lo < hi) return {CylState::nonempty, Interval{lo, hi, false, false}};
  if (lo == hi) return {CylState::degenerate, std::nullopt};
  return {CylState::empty, std::nullopt};
}

}  // namespace

Cylinder cylinder(const InducingScheme& scheme, const PiecewiseMap& map,
                  const std::vector<std::size_t>& word) {
  if (word.empty()) throw std::invalid_argument("cylinder needs a nonempty word");
  for (std::size_t b : word)
    if (b >= scheme.elements.size())
      throw std::invalid_argument("cylinder word index out of range");

  Interval t = closure_of(scheme.elements[word.back()].interval);
  for (std::size_t k = word.size() - 1; k-- > 0;) {
    const BasicElement& e = scheme.elements[word[k]];
    AffineMap g = composite_of(map, e.branch_word);
    auto [state, cut] = intersect_closed(g.preimage(t), closure_of(e.interval));
    if (state != CylState::nonempty) return {word, std::nullopt, rat(0)};
    t = *cut;
  }
  auto final_cut = intersect(t, scheme.elements[word.front()].interval);
  if (!final_cut) return {word, std::nullopt, rat(0)};
  return {word, final_cut, length(*final_cut)};
}

namespace {

// Depth-first enumeration of cylinders by itinerary. The visitor sees every
// word together with its state; nonempty cylinders carry their interval (in
// first-element coordinates) and are extended further.
void for_each_cylinder(
    const InducingScheme& scheme, const PiecewiseMap& map, unsigned n_max,
    std::size_t word_budget, bool& budget_hit,
    const std::function<void(const std::vector<std::size_t>&, CylState, const Interval*)>&
        visit) {
  budget_hit = false;
  if (n_max == 0) return;
  std::vector<AffineMap> block;
  for (const BasicElement& e : scheme.elements) block.push_back(composite_of(map, e.branch_word));

  std::size_t seen = 0;
  std::vector<std::size_t> word;
  // cyl = cylinder of the current word, h = induced-map composite along it
  std::function<void(const Interval&, const AffineMap&)> rec = [&](const Interval& cyl,
                                                                   const AffineMap& h) {
    if (word.size() == n_max || budget_hit) return;
    for (std::size_t j = 0; j < scheme.elements.size() && !budget_hit; ++j) {
      if (++seen > word_budget) {
        budget_hit = true;
        return;
      }
      word.push_back(j);
      CylState state;
      std::optional<Interval> next;
      if (word.size() == 1) {
        state = CylState::nonempty;
        next = closure_of(scheme.elements[j].interval);
      } else {
        std::tie(state, next) =
            intersect_closed(cyl, h.preimage(closure_of(scheme.elements[j].interval)));
      }
      visit(word, state, next ? &*next : nullptr);
      if (state == CylState::nonempty) rec(*next, block[j].after(h));
      word.pop_back();
    }
  };
  rec(closure_of(scheme.base), AffineMap::identity());
}

}  // namespace

ConditionReport check_H2(const InducingScheme& scheme, const PiecewiseMap& map, unsigned n_max,
                         std::size_t word_budget) {
  ConditionReport report{"H2", Verdict::inconclusive, n_max, "", {}, ""};
  if (scheme.elements.empty()) {
    report.note = "empty scheme";
    return report;
  }
  std::vector<Rational> max_diam(n_max + 1, rat(0));
  bool budget_hit = false;
  bool found_empty = false;
  std::vector<std::size_t> empty_word;
  for_each_cylinder(scheme, map, n_max, word_budget, budget_hit,
                    [&](const std::vector<std::size_t>& word, CylState state,
                        const Interval* iv) {
                      if (state == CylState::empty && !found_empty) {
                        found_empty = true;
                        empty_word = word;
                      }
                      if (state == CylState::nonempty)
                        max_diam[word.size()] = std::max(max_diam[word.size()], length(*iv));
                    });

  for (unsigned n = 1; n <= n_max; ++n) report.numeric_data.push_back(to_double(max_diam[n]));

  if (found_empty) {
    report.verdict = Verdict::fail;
    report.witness = "word=";
    for (std::size_t i = 0; i < empty_word.size(); ++i)
      report.witness += (i ? "," : "") + std::to_string(empty_word[i]);
    return report;
  }
  Rational threshold = length(scheme.base) / rat_pow(rat(2), n_max);
  if (budget_hit) {
    report.note = "sampled (word budget hit); cannot certify all itineraries";
    return report;
  }
  if (max_diam[n_max] <= threshold) {
    report.verdict = Verdict::pass_at_depth;
    report.note = "max-diameter=" + rat_str(max_diam[n_max]) +
                  " threshold=" + rat_str(threshold);
  } else {
    report.note = "no contraction certificate: max-diameter=" + rat_str(max_diam[n_max]) +
                  " above threshold=" + rat_str(threshold);
  }
  if (!map.exact()) {
    report.verdict = Verdict::inconclusive;
    report.note += "; inconclusive-numeric";
  }
  return report;
}

Potential Potential::constant_fn(Rational c) {
  Potential p;
  p.kind = Kind::constant;
  p.constant = std::move(c);
  return p;
}

Potential Potential::identity_fn(const PiecewiseMap& map) {
  Potential p;
  p.kind = Kind::piecewise_affine;
  p.per_branch.assign(map.branches().size(), AffineMap::identity());
  return p;
}

Potential Potential::piecewise(std::vector<AffineMap> per_branch) {
  Potential p;
  p.kind = Kind::piecewise_affine;
  p.per_branch = std::move(per_branch);
  return p;
}

Potential Potential::neg_log_deriv(Rational t) {
  Potential p;
  p.kind = Kind::neg_t_log_deriv;
  p.t = std::move(t);
  return p;
}

double SymbolicValue::to_double() const {
  double v = pim::to_double(rational_part);
  for (const auto& [base, coeff] : log_terms)
    v += pim::to_double(coeff) * std::log(pim::to_double(base));
  return v;
}

SymbolicValue& SymbolicValue::operator+=(const SymbolicValue& other) {
  rational_part += other.rational_part;
  for (const auto& [base, coeff] : other.log_terms) {
    auto it = log_terms.find(base);
    if (it == log_terms.end()) {
      log_terms.emplace(base, coeff);
    } else {
      it->second += coeff;
      if (it->second == 0) log_terms.erase(it);
    }
  }
  return *this;
}

SymbolicValue sym_rat(Rational q) { return SymbolicValue{std::move(q), {}}; }

namespace {

// accumulate coeff * log(n) for an integer n > 1, split into prime bases so
// that log 4 and 2 log 2 coincide structurally
void add_integer_log(std::map<Rational, Rational>& terms, mpz_class n, const Rational& coeff) {
  mpz_class p = 2;
  while (n > 1 && p * p <= n && p < 1'000'000) {
    unsigned long e = 0;
    while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
      n /= p;
      ++e;
    }
    if (e > 0) {
      Rational base(p);
      terms[base] += coeff * Rational(static_cast<long>(e));
    }
    p += (p == 2) ? 1 : 2;
  }
  if (n > 1) terms[Rational(n)] += coeff;  // leftover prime (or large composite)
}

}  // namespace

SymbolicValue sym_log(Rational base, Rational coeff) {
  if (base <= 0) throw std::invalid_argument("logarithm of a nonpositive rational");
  SymbolicValue v{rat(0), {}};
  if (coeff == 0 || base == 1) return v;
  add_integer_log(v.log_terms, base.get_num(), coeff);
  add_integer_log(v.log_terms, base.get_den(), -coeff);
  for (auto it = v.log_terms.begin(); it != v.log_terms.end();)
    it = it->second == 0 ? v.log_terms.erase(it) : std::next(it);
  return v;
}

std::string sym_str(const SymbolicValue& v) {
  std::string s = rat_str(v.rational_part);
  for (const auto& [base, coeff] : v.log_terms)
    s += "+(" + rat_str(coeff) + ")log(" + rat_str(base) + ")";
  return s;
}

SymbolicValue induced_potential(const InducingScheme& scheme, const PiecewiseMap& map,
                                const Potential& phi, std::size_t element_index,
                                const Rational& x) {
  const BasicElement& e = scheme.elements.at(element_index);
  if (!contains(e.interval, x))
    throw std::invalid_argument("point " + rat_str(x) + " is not in element " +
                                iv_str(e.interval));
  SymbolicValue v{rat(0), {}};
  Rational cur = x;
  for (unsigned k = 0; k < e.tau; ++k) {
    switch (phi.kind) {
      case Potential::Kind::constant: v.rational_part += phi.constant; break;
      case Potential::Kind::piecewise_affine: {
        auto i = map.branch_at(cur);
        if (!i) throw BoundaryHit(k);
        v.rational_part += phi.per_branch.at(*i)(cur);
        break;
      }
      case Potential::Kind::neg_t_log_deriv: {
        auto i = map.branch_at(cur);
        if (!i) throw BoundaryHit(k);
        v += sym_log(rat_abs(map.branches()[*i].map.slope), -phi.t);
        break;
      }
    }
    if (k + 1 < e.tau) {
      auto i = map.branch_at(cur);
      if (!i) throw BoundaryHit(k);
      cur = map.branches()[*i].map(cur);
    }
  }
  return v;
}

namespace {

// slope of the induced potential on an element; the induced sum is affine in x
// for the supported potential class
Rational phibar_slope(const PiecewiseMap& map, const Potential& phi, const BasicElement& e) {
  if (phi.kind != Potential::Kind::piecewise_affine) return rat(0);
  Rational a = rat(0);
  AffineMap g = AffineMap::identity();
  for (std::size_t s : e.branch_word) {
    a += phi.per_branch.at(s).slope * g.slope;
    g = map.branches().at(s).map.after(g);
  }
  return a;
}

// affine form (a, b) of the induced potential on an element, rational kinds only
std::pair<Rational, Rational> phibar_affine(const PiecewiseMap& map, const Potential& phi,
                                            const BasicElement& e) {
  Rational a = rat(0), b = rat(0);
  AffineMap g = AffineMap::identity();
  for (std::size_t s : e.branch_word) {
    if (phi.kind == Potential::Kind::constant) {
      b += phi.constant;
    } else {
      b += phi.per_branch.at(s).slope * g.offset + phi.per_branch.at(s).offset;
      a += phi.per_branch.at(s).slope * g.slope;
    }
    g = map.branches().at(s).map.after(g);
  }
  return {a, b};
}

}  // namespace

VnValue variation_Vn(const InducingScheme& scheme, const PiecewiseMap& map, const Potential& phi,
                     unsigned n, std::size_t word_budget) {
  if (n == 0) throw std::invalid_argument("variation needs n >= 1");
  std::vector<Rational> slopes;
  for (const BasicElement& e : scheme.elements) slopes.push_back(rat_abs(phibar_slope(map, phi, e)));

  VnValue out{n, rat(0), false, 0};
  bool budget_hit = false;
  for_each_cylinder(scheme, map, n, word_budget, budget_hit,
                    [&](const std::vector<std::size_t>& word, CylState state, const Interval* iv) {
                      if (word.size() != n || state != CylState::nonempty) return;
                      ++out.cylinders_seen;
                      out.value = std::max(out.value, Rational(slopes[word.front()] * length(*iv)));
                    });
  out.lower_bound_only = budget_hit;
  return out;
}

HolderFit fit_holder(const InducingScheme& scheme, const PiecewiseMap& map, const Potential& phi,
                     unsigned n_lo, unsigned n_hi, std::size_t word_budget) {
  HolderFit fit;
  for (unsigned n = n_lo; n <= n_hi; ++n)
    fit.variations.push_back(variation_Vn(scheme, map, phi, n, word_budget));

  std::vector<std::pair<double, double>> points;  // (n, log Vn)
  bool all_zero = true;
  for (const VnValue& v : fit.variations) {
    if (v.value > 0) {
      all_zero = false;
      points.emplace_back(static_cast<double>(v.n), std::log(to_double(v.value)));
    }
  }
  if (all_zero) {
    fit.fitted_A = 0.0;
    fit.fitted_gamma = 0.5;
    fit.verdict = HolderFit::Verdict::consistent;
    fit.note = "variations identically zero on the computed range";
    return fit;
  }
  if (points.size() < 2) {
    fit.verdict = HolderFit::Verdict::inconclusive;
    fit.note = "fewer than two nonzero variations";
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double m = points.size() * sxx - sx * sx;
  double slope = (points.size() * sxy - sx * sy) / m;
  fit.fitted_gamma = std::exp(slope);
  if (fit.fitted_gamma >= 1.0) {
    fit.verdict = HolderFit::Verdict::inconclusive;
    fit.note = "variations do not decay on the computed range";
    return fit;
  }
  // inflate A to the exact envelope so the bound holds on every computed n
  double A = 0.0;
  for (const VnValue& v : fit.variations)
    if (v.value > 0)
      A = std::max(A, to_double(v.value) / std::pow(fit.fitted_gamma, v.n));
  fit.fitted_A = A;
  fit.verdict = HolderFit::Verdict::consistent;
  return fit;
}

SummabilityReport recc_summability(const InducingScheme& scheme, const PiecewiseMap& map,
                                   const Potential& phi, const Rational& epsilon,
                                   double P_L_bound, unsigned N) {
  SummabilityReport report;
  report.truncation = N;
  report.sum1_partial_exact = rat(0);

  // per-level sums of sup exp(induced potential)
  std::map<unsigned, SummabilityLevel> levels;
  for (const BasicElement& e : scheme.elements) {
    if (e.tau > N) continue;
    bool exact = false;
    Rational value_exact = rat(0);
    double value = 0.0;
    switch (phi.kind) {
      case Potential::Kind::constant: {
        Rational r = Rational(static_cast<long>(e.tau)) * phi.constant;
        if (r == 0) {
          exact = true;
          value_exact = rat(1);
          value = 1.0;
        } else {
          value = std::exp(to_double(r));
        }
        break;
      }
      case Potential::Kind::neg_t_log_deriv: {
        Rational prod = rat(1);
        for (std::size_t s : e.branch_word) prod *= rat_abs(map.branches().at(s).map.slope);
        if (is_integer(phi.t)) {
          exact = true;
          value_exact = rat_pow(prod, -phi.t.get_num().get_si());
          value = to_double(value_exact);
        } else {
          value = std::pow(to_double(prod), -to_double(phi.t));
        }
        break;
      }
      case Potential::Kind::piecewise_affine: {
        auto [a, b] = phibar_affine(map, phi, e);
        Rational sup = std::max(a * e.interval.lo + b, a * e.interval.hi + b);
        if (sup == 0) {
          exact = true;
          value_exact = rat(1);
          value = 1.0;
        } else {
          value = std::exp(to_double(sup));
        }
        break;
      }
    }
    auto& level = levels[e.tau];
    if (level.count == 0) {
      level.tau = e.tau;
      level.sup_exact = rat(0);
      level.sup_numeric = 0.0;
      level.exact = true;
    }
    level.count++;
    level.exact = level.exact && exact;
    if (exact) level.sup_exact += value_exact;
    level.sup_numeric += exact ? to_double(value_exact) : value;
  }
  for (const auto& [tau, level] : levels) report.levels.push_back(level);

  bool all_exact = true, consecutive = true;
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    all_exact = all_exact && report.levels[i].exact;
    if (i > 0 && report.levels[i].tau != report.levels[i - 1].tau + 1) consecutive = false;
  }
  report.sum1_exact = all_exact;
  for (const SummabilityLevel& level : report.levels) {
    report.sum1_partial += level.sup_numeric;
    if (all_exact) report.sum1_partial_exact += level.sup_exact;
  }

  bool growing = report.levels.size() >= 2;
  for (std::size_t i = 0; i + 1 < report.levels.size(); ++i)
    growing = growing && report.levels[i + 1].sup_numeric >= report.levels[i].sup_numeric;

  if (scheme.mass_deficit == 0) {
    // the stored elements are the whole scheme
    report.sum1_tail = rat(0);
    report.sum1_verdict = Verdict::pass;
    report.sum1_note = "scheme complete at this truncation";
  } else if (growing) {
    report.sum1_verdict = Verdict::fail;
    report.sum1_note = "per-level sums are not decaying (partial sums grow)";
  } else if (all_exact && consecutive && report.levels.size() >= 3) {
    std::vector<std::pair<unsigned, Rational>> series;
    for (const SummabilityLevel& level : report.levels)
      series.emplace_back(level.tau, level.sup_exact);
    if (auto cert = geometric_tail(series)) {
      report.sum1_tail = cert->tail_sum;
      report.sum1_verdict = Verdict::pass;
      report.sum1_note = "exact geometric tail, ratio=" + rat_str(cert->ratio);
    } else {
      // fall back to a geometric upper bound from the worst consecutive ratio
      Rational rmax = rat(0);
      for (std::size_t i = 0; i + 1 < report.levels.size(); ++i)
        rmax = std::max(rmax, Rational(report.levels[i + 1].sup_exact / report.levels[i].sup_exact));
      if (rmax > 0 && rmax < 1) {
        report.sum1_tail = report.levels.back().sup_exact * rmax / (1 - rmax);
        report.sum1_verdict = Verdict::pass;
        report.sum1_note = "exact geometric tail bound, ratio<=" + rat_str(rmax);
      } else {
        report.sum1_verdict = Verdict::inconclusive;
        report.sum1_note = "no geometric structure detected";
      }
    }
  } else {
    report.sum1_verdict = Verdict::inconclusive;
    report.sum1_note = "partial sums only";
  }

  // second series: tau * sup exp(induced phi - (P_L - eps) * tau)
  double shift = P_L_bound - to_double(epsilon);
  std::vector<double> level2;
  for (const SummabilityLevel& level : report.levels)
    level2.push_back(level.tau * level.sup_numeric * std::exp(-shift * level.tau));
  for (double v : level2) report.sum2_partial += v;

  if (scheme.mass_deficit == 0) {
    report.sum2_tail = 0.0;
    report.sum2_verdict = Verdict::pass;
    report.sum2_note = "scheme complete at this truncation";
  } else if (level2.size() >= 2) {
    bool growing2 = true;
    double rmax = 0.0;
    for (std::size_t i = 0; i + 1 < level2.size(); ++i) {
      growing2 = growing2 && level2[i + 1] >= level2[i];
      if (level2[i] > 0) rmax = std::max(rmax, level2[i + 1] / level2[i]);
    }
    if (growing2) {
      report.sum2_verdict = Verdict::fail;
      report.sum2_note = "per-level sums are not decaying";
    } else if (consecutive && rmax > 0 && rmax < 1) {
      report.sum2_tail = level2.back() * rmax / (1.0 - rmax);
      report.sum2_verdict = Verdict::pass;
      report.sum2_note = "floating geometric tail bound, ratio<=" + std::to_string(rmax);
    } else {
      report.sum2_verdict = Verdict::inconclusive;
      report.sum2_note = "partial sums only";
    }
  } else {
    report.sum2_verdict = Verdict::inconclusive;
    report.sum2_note = "too few levels";
  }

  if (!map.exact()) {
    report.sum1_verdict = Verdict::inconclusive;
    report.sum2_verdict = Verdict::inconclusive;
    report.sum1_note += "; inconclusive-numeric";
    report.sum2_note += "; inconclusive-numeric";
  }
  return report;
}

}  // namespace pim
