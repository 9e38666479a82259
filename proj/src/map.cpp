#include "pim/map.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace pim {

PiecewiseMap::PiecewiseMap(Interval ambient, std::vector<Branch> branches, ArithmeticMode mode)
    : ambient_(std::move(ambient)), branches_(std::move(branches)), mode_(mode) {
  if (branches_.empty()) throw std::invalid_argument("map needs at least one branch");
  std::sort(branches_.begin(), branches_.end(),
            [](const Branch& a, const Branch& b) { return a.domain.lo < b.domain.lo; });
  // closures of the branch domains must tile the ambient interval
  if (branches_.front().domain.lo != ambient_.lo)
    throw std::invalid_argument("branch domains do not start at the ambient left endpoint");
  for (std::size_t i = 0; i + 1 < branches_.size(); ++i) {
    if (branches_[i].domain.hi != branches_[i + 1].domain.lo)
      throw std::invalid_argument("branch domains leave a gap or overlap near " +
                                  rat_str(branches_[i].domain.hi));
  }
  if (branches_.back().domain.hi != ambient_.hi)
    throw std::invalid_argument("branch domains do not end at the ambient right endpoint");
  for (const Branch& b : branches_) {
    if (b.map.slope == 0) throw std::invalid_argument("branch slope must be nonzero");
    if (!closure_subset(b.image(), ambient_))
      throw std::invalid_argument("branch image escapes the ambient interval: " +
                                  iv_str(b.image()));
  }
  boundary_.push_back(ambient_.lo);
  for (const Branch& b : branches_) boundary_.push_back(b.domain.hi);
}

bool PiecewiseMap::on_boundary(const Rational& x) const {
  return std::binary_search(boundary_.begin(), boundary_.end(), x);
}

std::optional<std::size_t> PiecewiseMap::branch_at(const Rational& x) const {
  for (std::size_t i = 0; i < branches_.size(); ++i)
    if (interior_contains(branches_[i].domain, x)) return i;
  return std::nullopt;
}

Rational eval_map(const PiecewiseMap& map, Rational x, unsigned steps) {
  for (unsigned k = 0; k < steps; ++k) {
    auto i = map.branch_at(x);
    if (!i) throw BoundaryHit(k);
    x = map.branches()[*i].map(x);
  }
  return x;
}

std::optional<Interval> inverse_branch(const PiecewiseMap& map, std::size_t branch_index,
                                       const Interval& target) {
  const Branch& b = map.branches().at(branch_index);
  Interval pre = b.map.preimage(target);
  return intersect(pre, b.domain);
}

std::optional<Interval> inverse_branch(const PiecewiseMap& map, std::size_t branch_index,
                                       const std::optional<Interval>& target) {
  if (!target) return std::nullopt;
  return inverse_branch(map, branch_index, *target);
}

std::optional<std::pair<Rational, Side>> one_sided_step(const PiecewiseMap& map,
                                                        const Rational& x, Side side) {
  const Branch* chosen = nullptr;
  if (auto i = map.branch_at(x)) {
    chosen = &map.branches()[*i];
  } else {
    for (const Branch& b : map.branches()) {
      if (side == Side::right && b.domain.lo == x) chosen = &b;
      if (side == Side::left && b.domain.hi == x) chosen = &b;
      if (chosen) break;
    }
  }
  if (!chosen) return std::nullopt;
  Side out = chosen->map.slope > 0 ? side : (side == Side::left ? Side::right : Side::left);
  return std::make_pair(chosen->map(x), out);
}

std::vector<Rational> one_sided_images(const PiecewiseMap& map, const Rational& x) {
  std::vector<Rational> out;
  for (const Branch& b : map.branches())
    if (closure_contains(b.domain, x)) out.push_back(b.map(x));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void for_each_monotone_piece(
    const PiecewiseMap& map, unsigned max_depth, std::size_t cell_budget,
    const std::function<bool(const Interval&, const AffineMap&, const std::vector<std::size_t>&)>&
        visit) {
  std::size_t seen = 0;
  std::vector<std::size_t> word;
  // piece = current cell, g = composite map of the word on that cell
  std::function<void(const Interval&, const AffineMap&, unsigned)> rec =
      [&](const Interval& piece, const AffineMap& g, unsigned depth) {
        if (depth == max_depth) return;
        for (std::size_t i = 0; i < map.branches().size(); ++i) {
          // sub-piece of `piece` whose image under g lies in branch i
          auto cut = intersect_interior(g.image(piece), map.branches()[i].domain);
          if (!cut) continue;
          Interval sub = g.preimage(*cut);
          AffineMap next = map.branches()[i].map.after(g);
          if (++seen > cell_budget) throw CellBudgetExceeded(cell_budget);
          word.push_back(i);
          if (visit(sub, next, word)) rec(sub, next, depth + 1);
          word.pop_back();
        }
      };
  Interval whole = open_iv(map.ambient().lo, map.ambient().hi);
  rec(whole, AffineMap::identity(), 0);
}

RefinedPartition refine_partition(const PiecewiseMap& map, unsigned n, std::size_t cell_budget) {
  if (n == 0) throw std::invalid_argument("refine_partition needs n >= 1");
  RefinedPartition out;
  out.depth = n;
  for_each_monotone_piece(map, n, cell_budget,
                          [&](const Interval& piece, const AffineMap&,
                              const std::vector<std::size_t>& word) {
                            if (word.size() == n) out.cells.push_back(piece);
                            return true;
                          });
  std::sort(out.cells.begin(), out.cells.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  out.max_diameter = rat(0);
  for (const Interval& c : out.cells) out.max_diameter = std::max(out.max_diameter, length(c));
  return out;
}

std::vector<LapEntropyRow> lap_entropy(const PiecewiseMap& map, unsigned n_max,
                                       std::size_t cell_budget) {
  if (n_max == 0) throw std::invalid_argument("lap_entropy needs n_max >= 1");
  std::vector<std::size_t> counts(n_max, 0);
  for_each_monotone_piece(map, n_max, cell_budget,
                          [&](const Interval&, const AffineMap&,
                              const std::vector<std::size_t>& word) {
                            counts[word.size() - 1]++;
                            return true;
                          });
  std::vector<LapEntropyRow> rows;
  for (unsigned n = 1; n <= n_max; ++n) {
    double q = std::log(static_cast<double>(counts[n - 1])) / n;
    rows.push_back({n, counts[n - 1], q});
  }
  return rows;
}

std::pair<ConditionReport, ConditionReport> check_P1_P2(const PiecewiseMap& map, unsigned n_max,
                                                        const P1P2Config& config) {
  ConditionReport p1{"P1", Verdict::inconclusive, n_max, "", {}, ""};
  ConditionReport p2{"P2", Verdict::inconclusive, n_max, "", {}, ""};

  // P1 part one: does the forward orbit set of f(boundary) close into a finite
  // set? Boundary points are continued through every adjacent branch.
  std::set<Rational> orbit;
  std::vector<Rational> frontier;
  for (const Rational& p : map.boundary_points())
    for (const Rational& y : one_sided_images(map, p))
      if (orbit.insert(y).second) frontier.push_back(y);
  bool closed = false;
  for (unsigned step = 0; step < n_max && !closed; ++step) {
    std::vector<Rational> next;
    for (const Rational& p : frontier)
      for (const Rational& y : one_sided_images(map, p))
        if (orbit.insert(y).second) next.push_back(y);
    if (orbit.size() > config.orbit_budget) break;
    closed = next.empty();
    frontier = std::move(next);
  }

  auto laps = lap_entropy(map, n_max, config.cell_budget);
  double estimate = laps.back().quotient;
  for (const auto& row : laps) p1.numeric_data.push_back(row.quotient);

  if (closed && estimate > config.entropy_floor) {
    p1.verdict = Verdict::pass;
    p1.note = "boundary-image-orbit-size=" + std::to_string(orbit.size());
  } else if (!closed) {
    p1.note = "boundary image orbit still open after " + std::to_string(n_max) + " steps";
  } else {
    p1.note = "entropy estimate below floor";
  }

  // P2 surrogate: partition diameters against the threshold schedule.
  auto part = refine_partition(map, n_max, config.cell_budget);
  Rational threshold = length(map.ambient()) * rat_pow(config.p2_ratio, n_max / 2);
  p2.numeric_data.push_back(to_double(part.max_diameter));
  p2.numeric_data.push_back(to_double(threshold));
  if (part.max_diameter <= threshold) {
    p2.verdict = Verdict::pass;
    p2.note = "max-diameter=" + rat_str(part.max_diameter);
  } else {
    p2.note = "max-diameter=" + rat_str(part.max_diameter) +
              " above threshold=" + rat_str(threshold);
  }

  if (!map.exact()) {
    for (auto* r : {&p1, &p2}) {
      r->verdict = Verdict::inconclusive;
      r->note += (r->note.empty() ? "" : "; ");
      r->note += "inconclusive-numeric (numeric mode, double tolerance 1e-12)";
    }
  }
  return {p1, p2};
}

}  // namespace pim
