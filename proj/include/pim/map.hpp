#pragma once

#include "pim/errors.hpp"
#include "pim/interval.hpp"
#include "pim/report.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace pim {

enum class ArithmeticMode { exact, numeric };

// One invertible piece: an affine map restricted to an open domain interval.
struct Branch {
  Interval domain;
  AffineMap map;  // injective (nonzero slope), image inside the ambient interval
  Interval image() const { return map.image(domain); }
};

inline constexpr std::size_t kDefaultCellBudget = 1'000'000;

// Finite-branch piecewise invertible interval map. Branch domains are pairwise
// disjoint open intervals whose closures cover the ambient interval, so the
// boundary set is finite. In numeric mode the data is identical but every
// downstream condition report is downgraded to inconclusive: only exact
// arithmetic certifies the equality and containment statements the checks
// stand for.
class PiecewiseMap {
 public:
  PiecewiseMap(Interval ambient, std::vector<Branch> branches,
               ArithmeticMode mode = ArithmeticMode::exact);

  const Interval& ambient() const { return ambient_; }
  const std::vector<Branch>& branches() const { return branches_; }
  ArithmeticMode mode() const { return mode_; }
  bool exact() const { return mode_ == ArithmeticMode::exact; }

  // Partition boundary including the ambient endpoints, sorted.
  const std::vector<Rational>& boundary_points() const { return boundary_; }
  bool on_boundary(const Rational& x) const;

  // Index of the open branch domain containing x; nullopt on the boundary.
  std::optional<std::size_t> branch_at(const Rational& x) const;

 private:
  Interval ambient_;
  std::vector<Branch> branches_;
  ArithmeticMode mode_;
  std::vector<Rational> boundary_;
};

// f^steps(x), exact. Throws BoundaryHit(k) if f^k(x) lands on the partition
// boundary for some k < steps.
Rational eval_map(const PiecewiseMap& map, Rational x, unsigned steps);

// Exact preimage of the target under one branch, intersected with the branch
// domain; nullopt when the interior of the result is empty.
std::optional<Interval> inverse_branch(const PiecewiseMap& map, std::size_t branch_index,
                                       const Interval& target);
std::optional<Interval> inverse_branch(const PiecewiseMap& map, std::size_t branch_index,
                                       const std::optional<Interval>& target);

// Side from which a one-sided limit approaches a point.
enum class Side { left, right };

// One-sided continuation of the map at x: applies the branch whose closed
// domain is adjacent to x on the given side, and transports the side through
// the branch (orientation-reversing branches flip it). Returns nullopt when no
// branch is adjacent on that side (can only happen at ambient endpoints).
std::optional<std::pair<Rational, Side>> one_sided_step(const PiecewiseMap& map,
                                                        const Rational& x, Side side);

// All one-sided images of x: one value at interior points, up to two at
// partition boundary points.
std::vector<Rational> one_sided_images(const PiecewiseMap& map, const Rational& x);

// Cells of the depth-n monotonicity partition, i.e. the connected components
// on which f^n is injective.
struct RefinedPartition {
  unsigned depth;
  std::vector<Interval> cells;  // sorted by left endpoint
  Rational max_diameter;
};

RefinedPartition refine_partition(const PiecewiseMap& map, unsigned n,
                                  std::size_t cell_budget = kDefaultCellBudget);

struct LapEntropyRow {
  unsigned n;
  std::size_t lap_count;
  double quotient;  // log(lap_count)/n, an entropy estimate
};

std::vector<LapEntropyRow> lap_entropy(const PiecewiseMap& map, unsigned n_max,
                                       std::size_t cell_budget = kDefaultCellBudget);

struct P1P2Config {
  // positivity floor for the entropy estimate, in nats
  double entropy_floor = 0.05;
  // the P2 surrogate requires max_diameter(n) <= |I| * ratio^floor(n/2)
  Rational p2_ratio = rat(1, 2);
  std::size_t cell_budget = kDefaultCellBudget;
  std::size_t orbit_budget = 4096;
};

// Finite-depth surrogates for the boundary-entropy and generation conditions:
// P1 passes when the forward orbit set of f(boundary) closes into a finite set
// within n_max steps while the lap-entropy estimate clears the floor; P2
// passes when the monotonicity partition diameter meets the threshold
// schedule. Truncation obstructions yield inconclusive, never fail.
std::pair<ConditionReport, ConditionReport> check_P1_P2(const PiecewiseMap& map, unsigned n_max,
                                                        const P1P2Config& config = {});

// Depth-first walk over monotonicity pieces. Visits every piece of every depth
// 1..max_depth (parents before children, branches in index order) along with
// the composite affine map and the branch word; returning false prunes the
// subtree. Throws CellBudgetExceeded past the budget.
void for_each_monotone_piece(
    const PiecewiseMap& map, unsigned max_depth, std::size_t cell_budget,
    const std::function<bool(const Interval& piece, const AffineMap& composite,
                             const std::vector<std::size_t>& word)>& visit);

}  // namespace pim
