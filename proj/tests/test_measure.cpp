#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pim/measure.hpp"
#include "test_util.hpp"

using namespace pim;
using namespace pim::testutil;

namespace {

InducingScheme canonical_scheme(const PiecewiseMap& d, unsigned tau_max) {
  auto cert = certify_nice(d, open_iv(rat(1, 3), rat(2, 3)), 10);
  return build_canonical_scheme(d, cert, tau_max);
}

std::vector<ConditionReport> mc_reports(const PiecewiseMap& map, const InducingScheme& s,
                                        unsigned m_max) {
  return check_conditions(map, s, m_max, {Cond::M, Cond::C});
}

}  // namespace

TEST_CASE("measure_of_set") {
  RationalMeasure leb = lebesgue_on(open_iv(rat(0), rat(1)));
  CHECK(measure_of_set(leb, {open_iv(rat(1, 3), rat(2, 3))}) == rat(1, 3));
  // overlapping query intervals count once
  CHECK(measure_of_set(leb, {open_iv(rat(0), rat(1, 2)), open_iv(rat(1, 4), rat(3, 4))}) ==
        rat(3, 4));

  RationalMeasure m = make_measure({DensityPiece{open_iv(rat(0), rat(1, 2)), rat(4, 3)},
                                    DensityPiece{open_iv(rat(1, 2), rat(1)), rat(2, 3)}});
  CHECK(measure_of_set(m, {open_iv(rat(0), rat(1, 2))}) == rat(2, 3));

  RationalMeasure atoms = uniform_atoms({rat(1, 3), rat(2, 3)});
  CHECK(measure_of_set(atoms, {open_iv(rat(1, 3), rat(2, 3))}) == rat(0));
  CHECK(measure_of_set(atoms, {closed_iv(rat(1, 3), rat(2, 3))}) == rat(1));
}

TEST_CASE("flatten and equality") {
  RationalMeasure a = make_measure({DensityPiece{open_iv(rat(0), rat(1, 2)), rat(1)},
                                    DensityPiece{open_iv(rat(0), rat(1)), rat(1)}});
  RationalMeasure b = make_measure({DensityPiece{open_iv(rat(0), rat(1, 2)), rat(2)},
                                    DensityPiece{open_iv(rat(1, 2), rat(1)), rat(1)}});
  CHECK(measures_equal(a, b));
  CHECK(!measures_equal(a, lebesgue_on(open_iv(rat(0), rat(1)))));
  RationalMeasure c = add(dirac(rat(1, 3)), dirac(rat(1, 3)));
  CHECK(flatten(c).atoms.size() == 1);
  CHECK(flatten(c).atoms[0].mass == rat(2));
}

TEST_CASE("markov invariant densities") {
  RationalMeasure leb = markov_invariant_density(doubling());
  CHECK(measures_equal(leb, lebesgue_on(open_iv(rat(0), rat(1)))));

  RationalMeasure stat = markov_invariant_density(markov_m());
  RationalMeasure expected = make_measure({DensityPiece{open_iv(rat(0), rat(1, 2)), rat(4, 3)},
                                           DensityPiece{open_iv(rat(1, 2), rat(1)), rat(2, 3)}});
  CHECK(measures_equal(stat, expected));
  CHECK(measure_of_set(stat, {open_iv(rat(0), rat(1, 2))}) == rat(2, 3));

  // the degenerate single slope-1 branch has no distinguished stationary density
  CHECK_THROWS_AS(markov_invariant_density(identity_like()), NoStationaryDensity);

  // non-aligned branch image
  PiecewiseMap bad(open_iv(rat(0), rat(1)),
                   {Branch{open_iv(rat(0), rat(1, 2)), AffineMap{rat(3, 2), rat(0)}},
                    Branch{open_iv(rat(1, 2), rat(1)), AffineMap{rat(2), rat(-1)}}});
  CHECK_THROWS_AS(markov_invariant_density(bad), NotMarkov);
}

TEST_CASE("invariance check") {
  PiecewiseMap d = doubling();
  CHECK(passing(check_invariance(d, lebesgue_on(open_iv(rat(0), rat(1))), 6)));
  CHECK(passing(check_invariance(d, uniform_atoms({rat(1, 7), rat(2, 7), rat(4, 7)}), 6)));
  CHECK(passing(check_invariance(markov_m(), markov_invariant_density(markov_m()), 6)));

  auto bad = check_invariance(d, dirac(rat(1, 7)), 6);
  CHECK(bad.verdict == Verdict::fail);
  CHECK(!bad.witness.empty());
}

TEST_CASE("lift of a fixed atom through the counterexample scheme") {
  PiecewiseMap d = doubling();
  // J_1 = (1/4,1/2), tau 2, block map 4x-1 fixes 1/3
  InducingScheme s;
  s.base = open_iv(rat(0), rat(1));
  s.tau_max = 2;
  s.elements.push_back({open_iv(rat(1, 2), rat(1)), 1, open_iv(rat(1, 2), rat(1)), std::nullopt,
                        {1}});
  s.elements.push_back({open_iv(rat(1, 4), rat(1, 2)), 2, open_iv(rat(1, 4), rat(1, 2)),
                        std::nullopt, {0, 1}});
  s.covered_length = rat(3, 4);
  s.mass_deficit = rat(1, 4);

  LiftResult lift = lift_measure(s, d, dirac(rat(1, 3)));
  CHECK(lift.Q == rat(2));
  CHECK(lift.Q_is_complete);
  RationalMeasure expected = scale(add(dirac(rat(1, 3)), dirac(rat(2, 3))), rat(1, 2));
  CHECK(measures_equal(lift.measure, expected));
}

TEST_CASE("lift of the periodic atom through the canonical scheme") {
  PiecewiseMap d = doubling();
  InducingScheme s = canonical_scheme(d, 3);
  LiftResult lift = lift_measure(s, d, dirac(rat(4, 7)));
  CHECK(lift.Q == rat(3));
  CHECK(lift.Q_is_complete);
  RationalMeasure expected = uniform_atoms({rat(1, 7), rat(2, 7), rat(4, 7)});
  CHECK(measures_equal(lift.measure, expected));
  CHECK(lift.measure.total_mass == rat(1));
}

TEST_CASE("lift of restricted lebesgue approximates lebesgue") {
  PiecewiseMap d = doubling();
  InducingScheme s = canonical_scheme(d, 12);
  CHECK(s.mass_deficit == rat(1, 3) * rat_pow(rat(1, 2), 11));

  // normalized Lebesgue on the stored elements
  std::vector<DensityPiece> pieces;
  for (const BasicElement& e : s.elements)
    pieces.push_back({e.interval, 1 / s.covered_length});
  RationalMeasure nu = make_measure(std::move(pieces));
  LiftResult lift = lift_measure(s, d, nu);
  CHECK(lift.Q_is_complete);
  CHECK(lift.measure.total_mass == rat(1));

  // total variation against Lebesgue on the depth-6 partition: exactly
  // 15/9808, which clears 2^-9 but not 2^-10
  auto part = refine_partition(d, 6);
  Rational tv = rat(0);
  RationalMeasure leb = lebesgue_on(open_iv(rat(0), rat(1)));
  for (const Interval& cell : part.cells)
    tv += rat_abs(measure_of_set(lift.measure, {cell}) - measure_of_set(leb, {cell}));
  tv /= 2;
  CHECK(tv == rat(15, 9808));
  CHECK(tv <= rat_pow(rat(1, 2), 9));
}

TEST_CASE("lift requires support inside the base") {
  PiecewiseMap d = doubling();
  InducingScheme s = canonical_scheme(d, 3);
  CHECK_THROWS_AS(lift_measure(s, d, dirac(rat(1, 5))), PreconditionUnverified);
}

TEST_CASE("induce lebesgue through the trivial tower") {
  PiecewiseMap d = doubling();
  InducingScheme s = canonical_scheme(d, 3);
  Tower t = build_tower(d, 5);
  auto priors = mc_reports(d, s, 6);
  RationalMeasure nu = induce_measure(s, t, d, lebesgue_on(open_iv(rat(0), rat(1))), priors);
  RationalMeasure expected =
      make_measure({DensityPiece{open_iv(rat(1, 3), rat(2, 3)), rat(3)}});
  CHECK(measures_equal(nu, expected));
}

TEST_CASE("induce the periodic orbit measure") {
  PiecewiseMap d = doubling();
  InducingScheme s = canonical_scheme(d, 3);
  Tower t = build_tower(d, 5);
  auto priors = mc_reports(d, s, 6);
  RationalMeasure mu = uniform_atoms({rat(1, 7), rat(2, 7), rat(4, 7)});
  RationalMeasure nu = induce_measure(s, t, d, mu, priors);
  CHECK(measures_equal(nu, dirac(rat(4, 7))));
}

TEST_CASE("induce rejects boundary-supported and non-invariant measures") {
  PiecewiseMap d = doubling();
  InducingScheme s = canonical_scheme(d, 3);
  Tower t = build_tower(d, 5);
  auto priors = mc_reports(d, s, 6);
  CHECK_THROWS_AS(induce_measure(s, t, d, uniform_atoms({rat(1, 3), rat(2, 3)}), priors),
                  ZeroBaseMass);
  CHECK_THROWS_AS(induce_measure(s, t, d, dirac(rat(1, 5)), priors), PreconditionUnverified);
}

TEST_CASE("kac round trip for the atomic measure is exact") {
  PiecewiseMap d = doubling();
  InducingScheme s = canonical_scheme(d, 12);
  Tower t = build_tower(d, 5);
  auto priors = mc_reports(d, s, 12);
  RationalMeasure mu = uniform_atoms({rat(1, 7), rat(2, 7), rat(4, 7)});
  auto report = kac_roundtrip_check(s, t, d, mu, 6, priors);
  CHECK(report.verdict == Verdict::pass);
  CHECK(report.note.find("product=1/1") != std::string::npos);
  CHECK(report.note.find("tv=0/1") != std::string::npos);
}

TEST_CASE("kac round trip for lebesgue with geometric tail accounting") {
  PiecewiseMap d = doubling();
  InducingScheme s = canonical_scheme(d, 12);
  Tower t = build_tower(d, 5);
  auto priors = mc_reports(d, s, 12);
  auto report = kac_roundtrip_check(s, t, d, lebesgue_on(open_iv(rat(0), rat(1))), 6, priors);
  CHECK(report.verdict == Verdict::pass_at_depth);
  CHECK(report.note.find("Q-partial=3065/1024") != std::string::npos);
  CHECK(report.note.find("Q-effective=3/1") != std::string::npos);
  CHECK(report.note.find("tv=15/9808") != std::string::npos);
}

TEST_CASE("kac round trip on the two-level tower is exact") {
  PiecewiseMap m = markov_m();
  auto cert = certify_nice(m, open_iv(rat(0), rat(1, 2)), 16);
  InducingScheme s = build_canonical_scheme(m, cert, 4);
  Tower t = build_tower(m, 5);
  auto priors = mc_reports(m, s, 6);
  RationalMeasure mu = markov_invariant_density(m);

  RationalMeasure nu = induce_measure(s, t, m, mu, priors);
  RationalMeasure expected =
      make_measure({DensityPiece{open_iv(rat(0), rat(1, 2)), rat(2)}});
  CHECK(measures_equal(nu, expected));

  // Q = 1*nu(J1) + 2*nu(J2) = 3/2 and mu(V) = 2/3: the Kac product is exactly 1
  LiftResult lift = lift_measure(s, m, nu);
  CHECK(lift.Q == rat(3, 2));
  CHECK(lift.Q_is_complete);
  CHECK(measures_equal(lift.measure, mu));

  auto report = kac_roundtrip_check(s, t, m, mu, 6, priors);
  CHECK(report.verdict == Verdict::pass);
}

TEST_CASE("lift support set covers the inducing blocks") {
  PiecewiseMap d = doubling();
  InducingScheme s = canonical_scheme(d, 3);
  RationalMeasure nu = make_measure(
      {DensityPiece{open_iv(rat(1, 3), rat(5, 12)), rat(12)}});  // mass 1 on one element
  LiftResult lift = lift_measure(s, d, nu);
  REQUIRE(!lift.support_X.empty());
  // blocks of (1/3,5/12): itself, then (2/3,5/6)
  CHECK(measure_of_set(lift.measure, {open_iv(rat(2, 3), rat(5, 6))}) == rat(1, 2));
}

TEST_CASE("the induced atomic measure is the unique candidate with that lift") {
  PiecewiseMap d = doubling();
  InducingScheme s = canonical_scheme(d, 3);
  RationalMeasure mu = uniform_atoms({rat(1, 7), rat(2, 7), rat(4, 7)});

  // enumerate atomic F-invariant candidates over the orbit atoms inside the
  // base: uniform measures on block-map cycles of the orbit points
  std::vector<RationalMeasure> candidates;
  for (const Atom& a : mu.atoms) {
    const BasicElement* e = element_containing(s, a.point);
    if (!e) continue;
    std::vector<Rational> cycle{a.point};
    Rational x = a.point;
    bool closes = false;
    for (int k = 0; k < 8; ++k) {
      const BasicElement* cur = element_containing(s, x);
      if (!cur) break;
      x = eval_map(d, x, cur->tau);
      if (x == a.point) {
        closes = true;
        break;
      }
      cycle.push_back(x);
    }
    if (closes) candidates.push_back(uniform_atoms(cycle));
  }
  REQUIRE(candidates.size() == 1);  // only 4/7 lies in the base

  RationalMeasure expected = uniform_atoms({rat(1, 7), rat(2, 7), rat(4, 7)});
  int matching = 0;
  for (const RationalMeasure& nu : candidates)
    if (measures_equal(lift_measure(s, d, nu).measure, expected)) ++matching;
  CHECK(matching == 1);
  CHECK(measures_equal(candidates[0], dirac(rat(4, 7))));
}

TEST_CASE("kac round trip on the tent map (orientation-reversing branch)") {
  PiecewiseMap tent(open_iv(rat(0), rat(1)),
                    {Branch{open_iv(rat(0), rat(1, 2)), AffineMap{rat(2), rat(0)}},
                     Branch{open_iv(rat(1, 2), rat(1)), AffineMap{rat(-2), rat(2)}}});
  CHECK(measures_equal(markov_invariant_density(tent), lebesgue_on(open_iv(rat(0), rat(1)))));

  auto cert = certify_nice(tent, open_iv(rat(1, 3), rat(2, 3)), 10);
  REQUIRE(cert.verdict == NiceVerdict::nice);
  InducingScheme s = build_canonical_scheme(tent, cert, 12);
  Tower t = build_tower(tent, 5);
  CHECK(t.elements.size() == 1);
  auto priors = check_conditions(tent, s, 12, {Cond::M, Cond::C});
  REQUIRE(passing(priors[0]));
  REQUIRE(passing(priors[1]));
  auto report = kac_roundtrip_check(s, t, tent, lebesgue_on(open_iv(rat(0), rat(1))), 6, priors);
  CHECK(passing(report));
  CHECK(report.note.find("product=1/1") != std::string::npos);
}

TEST_CASE("atomic kac round trip across tower levels") {
  // the ambient 3-cycle {1/6, 1/3, 2/3} of m climbs to the second tower level
  PiecewiseMap m = markov_m();
  CHECK(eval_map(m, rat(1, 6), 3) == rat(1, 6));
  auto cert = certify_nice(m, open_iv(rat(0), rat(1, 2)), 16);
  InducingScheme s = build_canonical_scheme(m, cert, 4);
  Tower t = build_tower(m, 5);
  auto priors = check_conditions(m, s, 6, {Cond::M, Cond::C});

  RationalMeasure mu = uniform_atoms({rat(1, 6), rat(1, 3), rat(2, 3)});
  RationalMeasure nu = induce_measure(s, t, m, mu, priors);
  RationalMeasure expected = scale(add(dirac(rat(1, 6)), dirac(rat(1, 3))), rat(1, 2));
  CHECK(measures_equal(nu, expected));

  LiftResult lift = lift_measure(s, m, nu);
  CHECK(lift.Q == rat(3, 2));
  CHECK(measures_equal(lift.measure, mu));
  auto report = kac_roundtrip_check(s, t, m, mu, 6, priors);
  CHECK(report.verdict == Verdict::pass);
}

TEST_CASE("atomic kac round trip on the four-level staircase tower") {
  PiecewiseMap stair(open_iv(rat(0), rat(1)),
                     {Branch{open_iv(rat(0), rat(1, 4)), AffineMap{rat(4), rat(0)}},
                      Branch{open_iv(rat(1, 4), rat(1)), AffineMap{rat(1), rat(-1, 4)}}});
  // period-2 orbit 1/12 -> 1/3 -> 1/12
  CHECK(eval_map(stair, rat(1, 12), 2) == rat(1, 12));

  Interval V = open_iv(rat(0), rat(1, 4));
  auto cert = certify_nice(stair, V, 16);
  REQUIRE(cert.verdict == NiceVerdict::nice);
  REQUIRE(cert.boundary_orbit_class == OrbitClass::eventually_periodic);
  InducingScheme s = build_canonical_scheme(stair, cert, 4);
  REQUIRE(s.elements.size() == 4);
  CHECK(s.mass_deficit == 0);  // one element per time 1..4 covers the base
  for (unsigned k = 0; k < 4; ++k) CHECK(s.elements[k].tau == k + 1);

  Tower t = build_tower(stair, 6);
  auto priors = check_conditions(stair, s, 6, {Cond::M, Cond::C});
  REQUIRE(passing(priors[0]));
  REQUIRE(passing(priors[1]));
  auto embedded = embed_in_tower(s, t, stair, 128, priors);
  CHECK(embedded.verdict == Verdict::pass);

  RationalMeasure mu = uniform_atoms({rat(1, 12), rat(1, 3)});
  RationalMeasure nu = induce_measure(s, t, stair, mu, priors);
  CHECK(measures_equal(nu, dirac(rat(1, 12))));
  LiftResult lift = lift_measure(s, stair, nu);
  CHECK(lift.Q == rat(2));
  CHECK(measures_equal(lift.measure, mu));
  auto report = kac_roundtrip_check(s, t, stair, mu, 6, priors);
  CHECK(report.verdict == Verdict::pass);
}
