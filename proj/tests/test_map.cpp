#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pim/map.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace pim;
using namespace pim::testutil;

TEST_CASE("eval_map orbits") {
  PiecewiseMap d = doubling();
  CHECK(eval_map(d, rat(1, 3), 2) == rat(1, 3));  // 1/3 -> 2/3 -> 1/3
  CHECK(eval_map(d, rat(1, 5), 0) == rat(1, 5));
  try {
    eval_map(d, rat(1, 4), 2);  // 1/4 -> 1/2 which is a boundary point
    CHECK(false);
  } catch (const BoundaryHit& e) {
    CHECK(e.step == 1);
  }
}

TEST_CASE("inverse_branch pullbacks") {
  PiecewiseMap d = doubling();
  Interval target = open_iv(rat(1, 3), rat(2, 3));
  auto left = inverse_branch(d, 0, target);
  REQUIRE(left);
  CHECK(same_closure(*left, open_iv(rat(1, 6), rat(1, 3))));
  auto right = inverse_branch(d, 1, target);
  REQUIRE(right);
  CHECK(same_closure(*right, open_iv(rat(2, 3), rat(5, 6))));
  CHECK(!inverse_branch(d, 0, std::optional<Interval>{}));
  // disjoint target: the second branch of m only reaches (0, 1/2)
  CHECK(!inverse_branch(markov_m(), 1, open_iv(rat(1, 2), rat(1))));
}

TEST_CASE("inverse branch then branch is the identity on its output") {
  PiecewiseMap m = markov_m();
  Interval target = open_iv(rat(1, 8), rat(3, 8));
  for (std::size_t i = 0; i < m.branches().size(); ++i) {
    auto pre = inverse_branch(m, i, target);
    if (!pre) continue;
    Interval back = m.branches()[i].map.image(*pre);
    CHECK(closure_subset(back, target));
  }
}

TEST_CASE("refine_partition doubling") {
  PiecewiseMap d = doubling();
  auto p1 = refine_partition(d, 1);
  REQUIRE(p1.cells.size() == 2);
  CHECK(p1.max_diameter == rat(1, 2));
  auto p2 = refine_partition(d, 2);
  REQUIRE(p2.cells.size() == 4);
  CHECK(same_closure(p2.cells[0], open_iv(rat(0), rat(1, 4))));
  CHECK(same_closure(p2.cells[1], open_iv(rat(1, 4), rat(1, 2))));
  CHECK(same_closure(p2.cells[2], open_iv(rat(1, 2), rat(3, 4))));
  CHECK(same_closure(p2.cells[3], open_iv(rat(3, 4), rat(1))));
  CHECK(p2.max_diameter == rat(1, 4));
}

TEST_CASE("refine_partition markov map") {
  PiecewiseMap m = markov_m();
  auto p2 = refine_partition(m, 2);
  REQUIRE(p2.cells.size() == 3);
  CHECK(same_closure(p2.cells[0], open_iv(rat(0), rat(1, 4))));
  CHECK(same_closure(p2.cells[1], open_iv(rat(1, 4), rat(1, 2))));
  CHECK(same_closure(p2.cells[2], open_iv(rat(1, 2), rat(1))));
  CHECK(p2.max_diameter == rat(1, 2));
  // hand-derived diameters for the first depths
  CHECK(refine_partition(m, 1).max_diameter == rat(1, 2));
  CHECK(refine_partition(m, 3).max_diameter == rat(1, 4));
  CHECK(refine_partition(m, 4).max_diameter == rat(1, 4));
}

TEST_CASE("refine_partition respects the cell budget") {
  PiecewiseMap d = doubling();
  CHECK_THROWS_AS(refine_partition(d, 10, 100), CellBudgetExceeded);
}

TEST_CASE("lap_entropy doubling") {
  PiecewiseMap d = doubling();
  auto rows = lap_entropy(d, 5);
  REQUIRE(rows.size() == 5);
  for (const auto& row : rows) {
    CHECK(row.lap_count == (std::size_t{1} << row.n));
    CHECK(row.quotient == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("lap_entropy markov map tracks the golden ratio") {
  PiecewiseMap m = markov_m();
  auto rows = lap_entropy(m, 8);
  // transition structure [[1,1],[1,0]]: counts follow a Fibonacci recursion
  std::size_t a = 2, b = 3;
  CHECK(rows[0].lap_count == 2);
  CHECK(rows[1].lap_count == 3);
  for (std::size_t k = 2; k < rows.size(); ++k) {
    std::size_t c = a + b;
    CHECK(rows[k].lap_count == c);
    a = b;
    b = c;
  }
  double golden = std::log((1.0 + std::sqrt(5.0)) / 2.0);
  CHECK(std::abs(rows.back().quotient - golden) < 0.1);
}

TEST_CASE("lap_entropy single branch") {
  PiecewiseMap id = identity_like();
  auto rows = lap_entropy(id, 4);
  for (const auto& row : rows) {
    CHECK(row.lap_count == 1);
    CHECK(row.quotient == 0.0);
  }
}

TEST_CASE("P1 and P2 on the doubling map") {
  PiecewiseMap d = doubling();
  auto [p1, p2] = check_P1_P2(d, 10);
  CHECK(p1.verdict == Verdict::pass);
  CHECK(p2.verdict == Verdict::pass);
  // diameter schedule is exactly 2^-n
  auto part = refine_partition(d, 10);
  CHECK(part.max_diameter == rat_pow(rat(1, 2), 10));
}

TEST_CASE("P1 inconclusive without expansion") {
  auto [p1, p2] = check_P1_P2(identity_like(), 6);
  CHECK(p1.verdict == Verdict::inconclusive);
  CHECK(p2.verdict == Verdict::inconclusive);
}

TEST_CASE("P1 and P2 on the markov map") {
  auto [p1, p2] = check_P1_P2(markov_m(), 10);
  CHECK(p1.verdict == Verdict::pass);
  CHECK(p2.verdict == Verdict::pass);
  CHECK(refine_partition(markov_m(), 10).max_diameter <= rat_pow(rat(1, 2), 5));
}

TEST_CASE("numeric mode downgrades the verdicts") {
  PiecewiseMap d(open_iv(rat(0), rat(1)),
                 {Branch{open_iv(rat(0), rat(1, 2)), AffineMap{rat(2), rat(0)}},
                  Branch{open_iv(rat(1, 2), rat(1)), AffineMap{rat(2), rat(-1)}}},
                 ArithmeticMode::numeric);
  auto [p1, p2] = check_P1_P2(d, 6);
  CHECK(p1.verdict == Verdict::inconclusive);
  CHECK(p2.verdict == Verdict::inconclusive);
  CHECK(p1.note.find("numeric") != std::string::npos);
}

TEST_CASE("one sided continuation tracks orientation") {
  PiecewiseMap d = doubling();
  auto step = one_sided_step(d, rat(1, 2), Side::left);
  REQUIRE(step);
  CHECK(step->first == rat(1));  // limit from inside (0,1/2) under 2x
  auto step2 = one_sided_step(d, rat(1, 2), Side::right);
  REQUIRE(step2);
  CHECK(step2->first == rat(0));  // limit from inside (1/2,1) under 2x-1
  CHECK(one_sided_images(d, rat(1, 2)) == std::vector<Rational>{rat(0), rat(1)});
}

TEST_CASE("map construction rejects bad partitions") {
  CHECK_THROWS_AS(PiecewiseMap(open_iv(rat(0), rat(1)),
                               {Branch{open_iv(rat(0), rat(1, 3)), AffineMap{rat(2), rat(0)}},
                                Branch{open_iv(rat(1, 2), rat(1)), AffineMap{rat(2), rat(-1)}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(PiecewiseMap(open_iv(rat(0), rat(1)),
                               {Branch{open_iv(rat(0), rat(1)), AffineMap{rat(0), rat(0)}}}),
                  std::invalid_argument);
}
