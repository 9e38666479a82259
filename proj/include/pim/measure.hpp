#pragma once

#include "pim/inducing.hpp"
#include "pim/series.hpp"

#include <optional>
#include <vector>

namespace pim {

struct DensityPiece {
  Interval support;
  Rational height;
};

struct Atom {
  Rational point;
  Rational mass;
};

// Exact measure: piecewise-constant density plus finitely many atoms. The
// class is closed under affine pushforward, restriction and finite sums,
// which is everything the lift operator needs for affine branches. Pieces may
// overlap; their heights add.
struct RationalMeasure {
  std::vector<DensityPiece> pieces;
  std::vector<Atom> atoms;
  Rational total_mass;
};

RationalMeasure make_measure(std::vector<DensityPiece> pieces, std::vector<Atom> atoms = {});
RationalMeasure lebesgue_on(const Interval& iv);
RationalMeasure uniform_atoms(const std::vector<Rational>& points);
RationalMeasure dirac(const Rational& point);

// Exact mass of a finite union of intervals; overlapping query intervals are
// counted once. Atoms on endpoints count according to the query's flags.
Rational measure_of_set(const RationalMeasure& m, const std::vector<Interval>& set);

RationalMeasure restrict_measure(const RationalMeasure& m, const Interval& window);
RationalMeasure pushforward(const RationalMeasure& m, const AffineMap& g);
RationalMeasure scale(const RationalMeasure& m, const Rational& factor);
RationalMeasure add(const RationalMeasure& a, const RationalMeasure& b);

// Canonical form: disjoint pieces split at every breakpoint, adjacent equal
// heights merged, atoms merged per point. Measures are equal as set functions
// iff their flattened forms coincide.
RationalMeasure flatten(const RationalMeasure& m);
bool measures_equal(const RationalMeasure& a, const RationalMeasure& b);

// Exact stationary piecewise-constant probability density of a map that is
// Markov over its branch partition (each branch image is a union of branch
// domains). Throws NotMarkov or NoStationaryDensity.
RationalMeasure markov_invariant_density(const PiecewiseMap& map);

// Exact invariance test on the open cells of the depth-test_depth
// monotonicity partition: compares the mass of each cell with the mass of its
// full preimage. Atoms sitting on cell boundaries are invisible to this
// comparison; the report notes the convention.
ConditionReport check_invariance(const PiecewiseMap& map, const RationalMeasure& mu,
                                 unsigned test_depth);

struct LiftResult {
  RationalMeasure measure;          // normalized by the partial Q
  Rational Q;                       // partial sum over stored elements
  std::optional<Rational> Q_tail;   // exact geometric completion when certified
  bool Q_is_complete;               // true when nu puts no mass beyond stored elements
  std::vector<Interval> support_X;  // truncated union of the inducing blocks
  Rational mass_deficit;            // carried from the scheme
  Rational captured_mass;           // nu-mass on stored elements
};

// The lift operator: spreads nu restricted to each element along its inducing
// block and normalizes by Q. Q is the partial sum over stored elements; when
// nu charges the base beyond them the result carries the deficit flag, plus
// an exact geometric tail completion whenever the per-level nu-masses certify
// one. The map supplies the branch dynamics of the words.
LiftResult lift_measure(const InducingScheme& scheme, const PiecewiseMap& map,
                        const RationalMeasure& nu);

// Induced measure of mu through the tower embedding: the normalized
// restriction of the lifted measure mu-check to the swept base copies,
// projected back to the base. Exact for finite saturated towers when the
// breakpoint orbit closes and the lift is unique; otherwise throws
// PreconditionUnverified. Requires passing M and C reports.
RationalMeasure induce_measure(const InducingScheme& scheme, const Tower& tower,
                               const PiecewiseMap& map, const RationalMeasure& mu,
                               const std::vector<ConditionReport>& prior_reports);

// Round trip: nu = induce(mu), back through the lift. Passes when the Kac
// product Q_nu * mu(base) equals 1 within the exact truncation accounting and
// the lifted measure agrees with mu on the test partition within the
// deficit-derived total-variation bound.
ConditionReport kac_roundtrip_check(const InducingScheme& scheme, const Tower& tower,
                                    const PiecewiseMap& map, const RationalMeasure& mu,
                                    unsigned test_depth,
                                    const std::vector<ConditionReport>& prior_reports);

}  // namespace pim
