#pragma once

#include "pim/inducing.hpp"
#include "pim/series.hpp"

#include <map>
#include <optional>
#include <vector>

namespace pim {

// Cylinder over the symbolic coding of the induced map: the maximal subset of
// the first element following the prescribed element itinerary. Empty
// itineraries carry no interval and diameter zero.
struct Cylinder {
  std::vector<std::size_t> word;  // element indices into the scheme
  std::optional<Interval> interval;
  Rational diameter;
};

Cylinder cylinder(const InducingScheme& scheme, const PiecewiseMap& map,
                  const std::vector<std::size_t>& word);

// Bernoulli-generating diagnostics: enumerates itineraries up to n_max,
// requires every cylinder nonempty and the maximal diameter at n_max below
// length(base)/2^n_max. Budget exhaustion downgrades the claim to sampled.
ConditionReport check_H2(const InducingScheme& scheme, const PiecewiseMap& map, unsigned n_max,
                         std::size_t word_budget);

// Potentials with exactly evaluable induced sums: constant, affine per branch
// domain, or -t*log|f'|.
struct Potential {
  enum class Kind { constant, piecewise_affine, neg_t_log_deriv };
  Kind kind = Kind::constant;
  Rational constant;                  // Kind::constant
  std::vector<AffineMap> per_branch;  // Kind::piecewise_affine, one per branch
  Rational t;                         // Kind::neg_t_log_deriv

  static Potential constant_fn(Rational c);
  static Potential identity_fn(const PiecewiseMap& map);  // phi(x) = x
  static Potential piecewise(std::vector<AffineMap> per_branch);
  static Potential neg_log_deriv(Rational t);
};

// Exact value of the form rational + sum of coeff*log(base) over rational
// bases > 1. Transcendental parts stay symbolic until numeric rendering.
struct SymbolicValue {
  Rational rational_part;
  std::map<Rational, Rational> log_terms;  // base -> coefficient, bases > 1

  bool is_rational() const { return log_terms.empty(); }
  bool is_zero() const { return rational_part == 0 && log_terms.empty(); }
  double to_double() const;

  SymbolicValue& operator+=(const SymbolicValue& other);
  friend SymbolicValue operator+(SymbolicValue a, const SymbolicValue& b) { return a += b; }
  friend bool operator==(const SymbolicValue& a, const SymbolicValue& b) {
    return a.rational_part == b.rational_part && a.log_terms == b.log_terms;
  }
};

SymbolicValue sym_rat(Rational q);
SymbolicValue sym_log(Rational base, Rational coeff);  // coeff * log(base), base > 0
std::string sym_str(const SymbolicValue& v);

// Birkhoff sum of the potential along the inducing block of the element
// containing x. Throws BoundaryHit when the orbit touches the partition
// boundary before time tau.
SymbolicValue induced_potential(const InducingScheme& scheme, const PiecewiseMap& map,
                                const Potential& phi, std::size_t element_index,
                                const Rational& x);

// n-variation of the induced potential over enumerated cylinders. For the
// supported potential class the induced sum is affine on each element, so the
// oscillation over a cylinder is |slope| * diameter, attained at endpoints.
struct VnValue {
  unsigned n;
  Rational value;
  bool lower_bound_only;  // word budget was hit; enumeration sampled
  std::size_t cylinders_seen;
};

VnValue variation_Vn(const InducingScheme& scheme, const PiecewiseMap& map, const Potential& phi,
                     unsigned n, std::size_t word_budget);

struct HolderFit {
  std::vector<VnValue> variations;
  double fitted_A = 0.0;
  double fitted_gamma = 0.0;
  enum class Verdict { consistent, violated, inconclusive } verdict = Verdict::inconclusive;
  std::string note;
};

// Least-squares fit of log V_n over the nonzero variations; the bound
// V_n <= A*gamma^n is then re-verified against every computed value with A
// inflated to the exact envelope. Violated requires a certified growth pair.
HolderFit fit_holder(const InducingScheme& scheme, const PiecewiseMap& map, const Potential& phi,
                     unsigned n_lo, unsigned n_hi, std::size_t word_budget);

struct SummabilityLevel {
  unsigned tau;
  std::size_t count;
  Rational sup_exact;  // per-level sum of sup exp(induced phi), when rational
  double sup_numeric;
  bool exact;
};

// Truncated checks of the two summability hypotheses over the stored
// elements: partial sums, an exact geometric tail bound when the per-level
// structure certifies one, and growth flags otherwise.
struct SummabilityReport {
  unsigned truncation;
  std::vector<SummabilityLevel> levels;

  bool sum1_exact = false;
  Rational sum1_partial_exact;
  double sum1_partial = 0.0;
  std::optional<Rational> sum1_tail;
  Verdict sum1_verdict = Verdict::inconclusive;
  std::string sum1_note;

  double sum2_partial = 0.0;
  std::optional<double> sum2_tail;
  Verdict sum2_verdict = Verdict::inconclusive;
  std::string sum2_note;
};

SummabilityReport recc_summability(const InducingScheme& scheme, const PiecewiseMap& map,
                                   const Potential& phi, const Rational& epsilon,
                                   double P_L_bound, unsigned N);

}  // namespace pim
