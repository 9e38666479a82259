// Acceptance suite: one line per criterion, zero exit only when all pass.

#include "pim/io.hpp"
#include "pim/measure.hpp"
#include "pim/thermo.hpp"
#include "test_util.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace pim;
using namespace pim::testutil;

namespace {

int g_failed = 0;
std::vector<std::string> g_notes;

#define EXPECT(cond)                                                      \
  do {                                                                    \
    if (!(cond)) g_notes.push_back(std::string("line ") +                 \
                                   std::to_string(__LINE__) + ": " #cond); \
  } while (0)

void criterion(int number, const char* name, const std::function<void()>& body) {
  g_notes.clear();
  try {
    body();
  } catch (const std::exception& e) {
    g_notes.push_back(std::string("exception: ") + e.what());
  }
  bool ok = g_notes.empty();
  std::printf("criterion %d %-28s %s\n", number, name, ok ? "PASS" : "FAIL");
  if (!ok) {
    ++g_failed;
    for (const std::string& note : g_notes) std::printf("    %s\n", note.c_str());
  }
}

InducingScheme canonical(const PiecewiseMap& d, unsigned tau_max) {
  auto cert = certify_nice(d, open_iv(rat(1, 3), rat(2, 3)), 10);
  return build_canonical_scheme(d, cert, tau_max);
}

InducingScheme counterexample_scheme(unsigned levels) {
  std::ostringstream text;
  Rational covered = rat(0);
  for (unsigned n = 0; n < levels; ++n) covered += rat_pow(rat(1, 2), n + 1);
  text << "base=0/1..1/1 tau_max=" << levels << " covered=" << rat_str(covered)
       << " deficit=" << rat_str(1 - covered) << "\n";
  for (unsigned n = 0; n < levels; ++n) {
    Rational lo = rat_pow(rat(1, 2), n + 1), hi = rat_pow(rat(1, 2), n);
    text << "J " << rat_str(lo) << ".." << rat_str(hi) << " tau=" << n + 1 << " word=";
    for (unsigned k = 0; k < n; ++k) text << "0,";
    text << "1 host=" << rat_str(lo) << ".." << rat_str(hi) << "\n";
  }
  std::istringstream in(text.str());
  return load_scheme(in);
}

}  // namespace

int main() {
  PiecewiseMap d = doubling();
  PiecewiseMap m = markov_m();

  criterion(1, "tower finiteness", [&] {
    Tower td = build_tower(d, 5);
    EXPECT(td.elements.size() == 1);
    EXPECT(td.saturated);
    Tower tm = build_tower(m, 5);
    EXPECT(tm.elements.size() == 2);
    EXPECT(tm.saturated);
    EXPECT(same_closure(tm.elements[0].interval, open_iv(rat(0), rat(1))));
    EXPECT(same_closure(tm.elements[1].interval, open_iv(rat(0), rat(1, 2))));
    EXPECT(check_markov(tm, m, 4).verdict == Verdict::pass);
  });

  criterion(2, "nice certification", [&] {
    auto good = certify_nice(d, open_iv(rat(1, 3), rat(2, 3)), 10);
    EXPECT(good.verdict == NiceVerdict::nice);
    EXPECT(good.boundary_orbit_class == OrbitClass::eventually_periodic);
    auto bad = certify_nice(d, open_iv(rat(1, 4), rat(3, 4)), 10);
    EXPECT(bad.verdict == NiceVerdict::not_nice);
    EXPECT(bad.witness && bad.witness->boundary_point == rat(1, 4));
    EXPECT(bad.witness && bad.witness->hit_time == 1);
  });

  criterion(3, "canonical scheme exactness", [&] {
    InducingScheme s = canonical(d, 3);
    EXPECT(s.elements.size() == 4);
    EXPECT(same_closure(s.elements[0].interval, open_iv(rat(1, 3), rat(5, 12))));
    EXPECT(s.elements[0].tau == 2);
    EXPECT(same_closure(s.elements[1].interval, open_iv(rat(7, 12), rat(2, 3))));
    EXPECT(s.elements[1].tau == 2);
    EXPECT(same_closure(s.elements[2].interval, open_iv(rat(5, 12), rat(11, 24))));
    EXPECT(s.elements[2].tau == 3);
    EXPECT(same_closure(s.elements[3].interval, open_iv(rat(13, 24), rat(7, 12))));
    EXPECT(s.elements[3].tau == 3);
    EXPECT(s.mass_deficit == rat(1, 12));
    // independent brute-force oracle over all branch words of length <= 3
    auto expected = oracle_minimal(oracle_pullbacks(d, open_iv(rat(1, 3), rat(2, 3)), 3));
    EXPECT(expected.size() == s.elements.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      EXPECT(s.elements[i].interval.lo == expected[i].lo);
      EXPECT(s.elements[i].interval.hi == expected[i].hi);
      EXPECT(s.elements[i].tau == expected[i].tau);
    }
  });

  criterion(4, "condition suite", [&] {
    InducingScheme s = canonical(d, 3);
    auto reports = check_conditions(d, s, 6, {Cond::H1, Cond::C, Cond::M});
    EXPECT(reports[0].verdict == Verdict::pass);
    EXPECT(reports[1].verdict == Verdict::pass);
    EXPECT(reports[2].verdict == Verdict::pass_at_depth);
    auto cert = certify_nice(d, open_iv(rat(1, 3), rat(2, 3)), 10);
    EXPECT(check_nested_or_disjoint(d, cert, 4).verdict == Verdict::pass);
    Tower t = build_tower(d, 5);
    auto embedded = embed_in_tower(s, t, d, 64, reports);
    EXPECT(embedded.verdict == Verdict::pass);

    InducingScheme cx = counterexample_scheme(8);
    auto mcx = check_conditions(d, cx, 3, {Cond::M});
    EXPECT(mcx[0].verdict == Verdict::fail);
    EXPECT(mcx[0].witness.find("L=0/1..1/2") != std::string::npos);
    EXPECT(mcx[0].witness.find("m=1") != std::string::npos);
    EXPECT(mcx[0].witness.find("J=1/4..1/2") != std::string::npos);
    EXPECT(mcx[0].witness.find("tau=2") != std::string::npos);
  });

  criterion(5, "kac round trip, atomic", [&] {
    InducingScheme s = canonical(d, 12);
    Tower t = build_tower(d, 5);
    auto priors = check_conditions(d, s, 12, {Cond::M, Cond::C});
    RationalMeasure mu = uniform_atoms({rat(1, 7), rat(2, 7), rat(4, 7)});
    RationalMeasure nu = induce_measure(s, t, d, mu, priors);
    EXPECT(measures_equal(nu, dirac(rat(4, 7))));
    LiftResult lift = lift_measure(s, d, nu);
    EXPECT(lift.Q == rat(3));
    EXPECT(lift.Q_is_complete);
    EXPECT(measures_equal(lift.measure, mu));
  });

  criterion(6, "kac round trip, lebesgue", [&] {
    InducingScheme s = canonical(d, 12);
    // oracle: the exact geometric tail of the element lengths
    EXPECT(s.mass_deficit == rat(1, 3) * rat_pow(rat(1, 2), 11));
    Tower t = build_tower(d, 5);
    auto priors = check_conditions(d, s, 12, {Cond::M, Cond::C});
    RationalMeasure mu = lebesgue_on(open_iv(rat(0), rat(1)));
    RationalMeasure nu = induce_measure(s, t, d, mu, priors);
    LiftResult lift = lift_measure(s, d, nu);
    Rational q_effective = lift.Q + (lift.Q_tail ? *lift.Q_tail : rat(0));
    EXPECT(bool(lift.Q_tail));
    EXPECT(q_effective >= 3 - rat_pow(rat(1, 2), 10));
    EXPECT(q_effective <= rat(3));
    auto part = refine_partition(d, 6);
    Rational tv = rat(0);
    for (const Interval& cell : part.cells)
      tv += rat_abs(measure_of_set(lift.measure, {cell}) - measure_of_set(mu, {cell}));
    tv /= 2;
    EXPECT(tv <= rat_pow(rat(1, 2), 9));
    auto report = kac_roundtrip_check(s, t, d, mu, 6, priors);
    EXPECT(passing(report));
  });

  criterion(7, "P1 P2 diagnostics", [&] {
    auto [p1, p2] = check_P1_P2(d, 10);
    EXPECT(p1.verdict == Verdict::pass);
    EXPECT(p2.verdict == Verdict::pass);
    auto rows = lap_entropy(d, 10);
    for (const auto& row : rows) {
      EXPECT(row.lap_count == (std::size_t{1} << row.n));
      EXPECT(std::abs(row.quotient - std::log(2.0)) < 1e-12);
    }
    for (unsigned n = 1; n <= 10; ++n)
      EXPECT(refine_partition(d, n).max_diameter == rat_pow(rat(1, 2), n));
  });

  criterion(8, "thermo variations and summability", [&] {
    InducingScheme s = canonical(d, 6);
    for (unsigned n = 1; n <= 4; ++n) {
      EXPECT(variation_Vn(s, d, Potential::neg_log_deriv(rat(1)), n, 100000).value == rat(0));
      EXPECT(variation_Vn(s, d, Potential::neg_log_deriv(rat(2, 3)), n, 100000).value ==
             rat(0));
    }
    for (unsigned N : {6u, 12u}) {
      InducingScheme sn = canonical(d, N);
      auto report =
          recc_summability(sn, d, Potential::neg_log_deriv(rat(1)), rat(1, 10), 0.0, N);
      EXPECT(report.sum1_exact);
      EXPECT(report.sum1_partial_exact == 1 - rat_pow(rat(1, 2), N - 1));
      EXPECT(report.sum1_tail && *report.sum1_tail == rat_pow(rat(1, 2), N - 1));
      EXPECT(report.sum1_verdict == Verdict::pass);
    }
  });

  criterion(9, "randomized invariant suites", [&] {
    std::mt19937_64 rng(4242);
    int cases = 0;
    for (int c = 0; c < 55; ++c) {
      PiecewiseMap full = random_full_branch_map(rng);
      PiecewiseMap markov = random_markov_map(rng);
      for (const PiecewiseMap* map : {&full, &markov}) {
        ++cases;
        // refinement nesting and conservation
        RefinedPartition coarse = refine_partition(*map, 2);
        RefinedPartition fine = refine_partition(*map, 3);
        Rational total = rat(0);
        for (const Interval& cell : fine.cells) {
          total += length(cell);
          int parents = 0;
          for (const Interval& p : coarse.cells)
            if (closure_subset(cell, p)) ++parents;
          EXPECT(parents == 1);
        }
        EXPECT(total == length(map->ambient()));
        // lap submultiplicativity
        auto rows = lap_entropy(*map, 5);
        for (unsigned a = 1; a < 5; ++a)
          for (unsigned b = 1; a + b <= 5; ++b)
            EXPECT(rows[a + b - 1].lap_count <= rows[a - 1].lap_count * rows[b - 1].lap_count);
      }
      // scheme monotonicity, lift normalization, cylinder nesting
      Interval V = full.branches()[c % full.branches().size()].domain;
      auto cert = certify_nice(full, V, 32);
      EXPECT(cert.verdict == NiceVerdict::nice);
      InducingScheme small = build_canonical_scheme(full, cert, 3, std::nullopt, 4000);
      InducingScheme large = build_canonical_scheme(full, cert, 4, std::nullopt, 4000);
      EXPECT(large.mass_deficit <= small.mass_deficit);
      for (const BasicElement& e : small.elements) {
        bool kept = false;
        for (const BasicElement& f : large.elements)
          kept = kept || (same_closure(e.interval, f.interval) && e.tau == f.tau);
        EXPECT(kept);
      }
      if (!large.elements.empty()) {
        std::vector<DensityPiece> pieces;
        for (const BasicElement& e : large.elements)
          pieces.push_back({e.interval, 1 / large.covered_length});
        LiftResult lift = lift_measure(large, full, make_measure(std::move(pieces)));
        EXPECT(lift.measure.total_mass == rat(1));
        std::vector<std::size_t> word(3, 0);
        for (std::size_t& w : word)
          w = std::uniform_int_distribution<std::size_t>(0, large.elements.size() - 1)(rng);
        Cylinder longer = cylinder(large, full, word);
        Cylinder shorter = cylinder(large, full, {word.begin(), word.end() - 1});
        if (longer.interval) {
          EXPECT(shorter.interval && closure_subset(*longer.interval, *shorter.interval));
        }
      }
    }
    EXPECT(cases >= 100);
  });

  if (g_failed == 0) {
    std::printf("acceptance: all criteria passed\n");
    return 0;
  }
  std::printf("acceptance: %d criterion(s) failed\n", g_failed);
  return 1;
}
