#pragma once

#include "pim/tower.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace pim {

enum class NiceVerdict { nice, not_nice, inconclusive };
enum class OrbitClass { eventually_periodic, open_ended };

struct NiceWitness {
  Rational boundary_point;
  unsigned hit_time;  // n with f^n(boundary_point) inside the open candidate
};

// Certificate that the forward orbit of the candidate's boundary never enters
// the open candidate. Exact (non-truncated) when both boundary orbits close
// into cycles; otherwise the claim is stamped with the horizon.
struct NiceCertificate {
  Interval candidate;
  unsigned horizon;
  NiceVerdict verdict;
  std::optional<NiceWitness> witness;  // present iff not_nice
  OrbitClass boundary_orbit_class;
};

// Iterates both boundary points of V. A boundary orbit landing on the
// partition boundary continues through the one-sided limit branch on the side
// from which V's interior approaches; sides are transported through
// orientation-reversing branches exactly, so the continuation is always
// determined.
NiceCertificate certify_nice(const PiecewiseMap& map, const Interval& V, unsigned horizon);

// One basic element J of an inducing scheme. The branch word realizes
// f^tau(J) = base; the host is the monotonicity neighborhood mapping
// homeomorphically over the base.
struct BasicElement {
  Interval interval;  // J
  unsigned tau;
  Interval host;                          // U_J
  std::optional<Interval> extended_host;  // J+ in extended schemes
  std::vector<std::size_t> branch_word;   // length tau
};

// Canonical inducing scheme over a nice base. The inducing domain W differs
// from the base by a zero-length residual which is never enumerated; the
// mass_deficit ledger accounts for the part of the base not covered by stored
// elements at this truncation.
struct InducingScheme {
  Interval base;                          // V
  std::optional<Interval> extended_base;  // V+
  std::vector<BasicElement> elements;     // sorted by (tau, left endpoint)
  unsigned tau_max;
  Rational covered_length;
  Rational mass_deficit;
};

const BasicElement* element_containing(const InducingScheme& scheme, const Rational& x);

// Enumerates homeomorphic pullbacks of the base lying strictly inside it with
// word length <= tau_max and keeps the minimal-time (outermost) ones. With an
// extended base, only pullbacks whose host also covers the extended base are
// admitted, and each element records its extended host.
InducingScheme build_canonical_scheme(const PiecewiseMap& map, const NiceCertificate& cert,
                                      unsigned tau_max,
                                      std::optional<Interval> extended_base = std::nullopt,
                                      std::size_t element_budget = kDefaultElementBudget);

// Pairwise check of the nested-or-disjoint dichotomy over all homeomorphic
// pullbacks of the base (not only minimal ones): two pullbacks either have
// disjoint interiors or the later one lies inside the earlier one with
// strictly larger time.
ConditionReport check_nested_or_disjoint(const PiecewiseMap& map, const NiceCertificate& cert,
                                         unsigned tau_max,
                                         std::size_t element_budget = kDefaultElementBudget);

enum class Cond { H1, H2, M, C, Mplus, Cplus };

std::string cond_name(Cond c);

// Replay and search checks for the named conditions:
//   H1  every element's word maps its host homeomorphically with image over
//       the base and its interval exactly onto the base
//   C   the host orbit avoids the partition boundary before time tau
//   M   no homeomorphic pullback of the base with shorter time meets an
//       element (searched over all monotone pieces of f^m, m <= m_max)
//   M+/C+ the extended-host variants
//   H2  here only element disjointness; cylinder diagnostics live elsewhere
std::vector<ConditionReport> check_conditions(const PiecewiseMap& map,
                                              const InducingScheme& scheme, unsigned m_max,
                                              const std::vector<Cond>& which);

// Surrogate for the full-relative-measure hypothesis on the inducing domain:
// the uncovered part of the base must vanish as the truncation grows. Exact
// pass when the stored elements already cover the base; pass-at-depth when
// the deficit strictly decreased over the last truncation step.
ConditionReport check_H3_surrogate(const PiecewiseMap& map, const NiceCertificate& cert,
                                   unsigned tau_max,
                                   std::size_t element_budget = kDefaultElementBudget);

// Truncated orbit of inc(base) under blocks of the induced map on the tower:
// the pairs (element, interval) swept out, with a closure flag.
struct WCheckSet {
  std::vector<std::pair<std::size_t, Interval>> parts;
  bool closed;
};

WCheckSet build_w_check(const InducingScheme& scheme, const Tower& tower,
                        const PiecewiseMap& map, std::size_t part_budget = 10'000);

bool w_check_contains(const WCheckSet& w, std::size_t element, const Rational& x);

// First-return verification on the tower: samples points of the swept base
// copies and checks that the block of the induced map is exactly the first
// return to the swept set, and that every tower element met by the sweep
// projects over the base. Requires passing M and C reports among
// prior_reports and a saturated tower, else PreconditionUnverified.
ConditionReport embed_in_tower(const InducingScheme& scheme, const Tower& tower,
                               const PiecewiseMap& map, std::size_t sample_budget,
                               const std::vector<ConditionReport>& prior_reports);

}  // namespace pim
