#include "pim/measure.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace pim {

namespace {

constexpr unsigned kInvarianceDepth = 6;
constexpr std::size_t kBreakpointBudget = 4096;

Rational total_of(const std::vector<DensityPiece>& pieces, const std::vector<Atom>& atoms) {
  Rational total = rat(0);
  for (const DensityPiece& p : pieces) total += p.height * length(p.support);
  for (const Atom& a : atoms) total += a.mass;
  return total;
}

}  // namespace

RationalMeasure make_measure(std::vector<DensityPiece> pieces, std::vector<Atom> atoms) {
  for (const DensityPiece& p : pieces)
    if (p.height < 0) throw std::invalid_argument("negative density height");
  for (const Atom& a : atoms)
    if (a.mass < 0) throw std::invalid_argument("negative atom mass");
  RationalMeasure m{std::move(pieces), std::move(atoms), rat(0)};
  m.total_mass = total_of(m.pieces, m.atoms);
  return m;
}

RationalMeasure lebesgue_on(const Interval& iv) {
  return make_measure({DensityPiece{iv, rat(1)}});
}

RationalMeasure uniform_atoms(const std::vector<Rational>& points) {
  if (points.empty()) throw std::invalid_argument("uniform_atoms needs points");
  std::vector<Atom> atoms;
  Rational mass = Rational(1) / Rational(static_cast<long>(points.size()));
  for (const Rational& p : points) atoms.push_back({p, mass});
  return make_measure({}, std::move(atoms));
}

RationalMeasure dirac(const Rational& point) { return make_measure({}, {Atom{point, rat(1)}}); }

Rational measure_of_set(const RationalMeasure& m, const std::vector<Interval>& set) {
  if (set.empty()) return rat(0);
  // merge closures for the density part; endpoint flags carry no density mass
  std::vector<std::pair<Rational, Rational>> spans;
  for (const Interval& iv : set) spans.emplace_back(iv.lo, iv.hi);
  std::sort(spans.begin(), spans.end());
  std::vector<std::pair<Rational, Rational>> merged;
  for (auto& s : spans) {
    if (!merged.empty() && s.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, s.second);
    else
      merged.push_back(s);
  }
  Rational total = rat(0);
  for (const DensityPiece& p : m.pieces)
    for (const auto& [lo, hi] : merged) {
      Rational a = std::max(p.support.lo, lo), b = std::min(p.support.hi, hi);
      if (a < b) total += p.height * (b - a);
    }
  for (const Atom& atom : m.atoms)
    for (const Interval& iv : set)
      if (contains(iv, atom.point)) {
        total += atom.mass;
        break;
      }
  return total;
}

RationalMeasure restrict_measure(const RationalMeasure& m, const Interval& window) {
  std::vector<DensityPiece> pieces;
  for (const DensityPiece& p : m.pieces)
    if (auto cut = intersect(p.support, window)) pieces.push_back({*cut, p.height});
  std::vector<Atom> atoms;
  for (const Atom& a : m.atoms)
    if (contains(window, a.point)) atoms.push_back(a);
  return make_measure(std::move(pieces), std::move(atoms));
}

RationalMeasure pushforward(const RationalMeasure& m, const AffineMap& g) {
  std::vector<DensityPiece> pieces;
  Rational stretch = rat_abs(g.slope);
  for (const DensityPiece& p : m.pieces) pieces.push_back({g.image(p.support), p.height / stretch});
  std::vector<Atom> atoms;
  for (const Atom& a : m.atoms) atoms.push_back({g(a.point), a.mass});
  return make_measure(std::move(pieces), std::move(atoms));
}

RationalMeasure scale(const RationalMeasure& m, const Rational& factor) {
  if (factor < 0) throw std::invalid_argument("negative scale factor");
  std::vector<DensityPiece> pieces = m.pieces;
  for (DensityPiece& p : pieces) p.height *= factor;
  std::vector<Atom> atoms = m.atoms;
  for (Atom& a : atoms) a.mass *= factor;
  return make_measure(std::move(pieces), std::move(atoms));
}

RationalMeasure add(const RationalMeasure& a, const RationalMeasure& b) {
  std::vector<DensityPiece> pieces = a.pieces;
  pieces.insert(pieces.end(), b.pieces.begin(), b.pieces.end());
  std::vector<Atom> atoms = a.atoms;
  atoms.insert(atoms.end(), b.atoms.begin(), b.atoms.end());
  return make_measure(std::move(pieces), std::move(atoms));
}

RationalMeasure flatten(const RationalMeasure& m) {
  std::set<Rational> cuts;
  for (const DensityPiece& p : m.pieces) {
    cuts.insert(p.support.lo);
    cuts.insert(p.support.hi);
  }
  std::vector<DensityPiece> flat;
  if (!cuts.empty()) {
    std::vector<Rational> points(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
      Interval cell = open_iv(points[i], points[i + 1]);
      Rational height = rat(0);
      for (const DensityPiece& p : m.pieces)
        if (closure_subset(cell, p.support)) height += p.height;
      if (height != 0) {
        if (!flat.empty() && flat.back().support.hi == cell.lo && flat.back().height == height)
          flat.back().support.hi = cell.hi;
        else
          flat.push_back({cell, height});
      }
    }
  }
  std::map<Rational, Rational> atom_mass;
  for (const Atom& a : m.atoms) atom_mass[a.point] += a.mass;
  std::vector<Atom> atoms;
  for (const auto& [p, mass] : atom_mass)
    if (mass != 0) atoms.push_back({p, mass});
  return make_measure(std::move(flat), std::move(atoms));
}

bool measures_equal(const RationalMeasure& a, const RationalMeasure& b) {
  RationalMeasure fa = flatten(a), fb = flatten(b);
  if (fa.pieces.size() != fb.pieces.size() || fa.atoms.size() != fb.atoms.size()) return false;
  for (std::size_t i = 0; i < fa.pieces.size(); ++i) {
    if (!same_closure(fa.pieces[i].support, fb.pieces[i].support)) return false;
    if (fa.pieces[i].height != fb.pieces[i].height) return false;
  }
  for (std::size_t i = 0; i < fa.atoms.size(); ++i) {
    if (fa.atoms[i].point != fb.atoms[i].point) return false;
    if (fa.atoms[i].mass != fb.atoms[i].mass) return false;
  }
  return true;
}

namespace {

// Exact Gaussian elimination for A x = b, rows augmented with the rhs.
// nullopt when inconsistent or underdetermined.
std::optional<std::vector<Rational>> solve_unique(std::vector<std::vector<Rational>> rows,
                                                  std::size_t cols) {
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_of_col(cols, SIZE_MAX);
  for (std::size_t col = 0; col < cols && rank < rows.size(); ++col) {
    std::size_t pivot = SIZE_MAX;
    for (std::size_t r = rank; r < rows.size(); ++r)
      if (rows[r][col] != 0) {
        pivot = r;
        break;
      }
    if (pivot == SIZE_MAX) continue;
    std::swap(rows[rank], rows[pivot]);
    Rational inv = 1 / rows[rank][col];
    for (Rational& v : rows[rank]) v *= inv;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][col] == 0) continue;
      Rational factor = rows[r][col];
      for (std::size_t c = 0; c <= cols; ++c) rows[r][c] -= factor * rows[rank][c];
    }
    pivot_of_col[col] = rank;
    ++rank;
  }
  for (std::size_t r = rank; r < rows.size(); ++r)
    if (rows[r][cols] != 0) return std::nullopt;
  for (std::size_t col = 0; col < cols; ++col)
    if (pivot_of_col[col] == SIZE_MAX) return std::nullopt;
  std::vector<Rational> x(cols, rat(0));
  for (std::size_t col = 0; col < cols; ++col) x[col] = rows[pivot_of_col[col]][cols];
  return x;
}

// kernel basis of a homogeneous system
std::vector<std::vector<Rational>> kernel_basis(std::vector<std::vector<Rational>> rows,
                                                std::size_t cols) {
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_col_of_row;
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t col = 0; col < cols && rank < rows.size(); ++col) {
    std::size_t pivot = SIZE_MAX;
    for (std::size_t r = rank; r < rows.size(); ++r)
      if (rows[r][col] != 0) {
        pivot = r;
        break;
      }
    if (pivot == SIZE_MAX) continue;
    std::swap(rows[rank], rows[pivot]);
    Rational inv = 1 / rows[rank][col];
    for (Rational& v : rows[rank]) v *= inv;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank || rows[r][col] == 0) continue;
      Rational factor = rows[r][col];
      for (std::size_t c = 0; c < cols; ++c) rows[r][c] -= factor * rows[rank][c];
    }
    pivot_col_of_row.push_back(col);
    is_pivot[col] = true;
    ++rank;
  }
  std::vector<std::vector<Rational>> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(cols, rat(0));
    v[free] = rat(1);
    for (std::size_t r = 0; r < rank; ++r) v[pivot_col_of_row[r]] = -rows[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace

RationalMeasure markov_invariant_density(const PiecewiseMap& map) {
  const auto& branches = map.branches();
  std::size_t s = branches.size();

  for (const Branch& b : branches) {
    Interval img = b.image();
    if (!map.on_boundary(img.lo) || !map.on_boundary(img.hi))
      throw NotMarkov("branch image " + iv_str(img) + " does not align with the partition");
  }

  // stationarity of the transfer relations:
  // c_j = sum over branches i whose image covers A_j of c_i / |slope_i|
  std::vector<std::vector<Rational>> rows(s, std::vector<Rational>(s, rat(0)));
  for (std::size_t j = 0; j < s; ++j) {
    for (std::size_t i = 0; i < s; ++i)
      if (closure_subset(branches[j].domain, branches[i].image()))
        rows[j][i] += 1 / rat_abs(branches[i].map.slope);
    rows[j][j] -= 1;
  }
  auto basis = kernel_basis(std::move(rows), s);
  if (basis.size() == s)
    throw NoStationaryDensity(
        "transfer relations are vacuous; no distinguished stationary density");
  if (basis.size() != 1)
    throw NoStationaryDensity("stationary density is not unique (kernel dimension " +
                              std::to_string(basis.size()) + ")");
  std::vector<Rational>& c = basis.front();
  bool nonneg = true, nonpos = true;
  for (const Rational& v : c) {
    if (v < 0) nonneg = false;
    if (v > 0) nonpos = false;
  }
  if (!nonneg && !nonpos) throw NoStationaryDensity("stationary solution changes sign");
  Rational norm = rat(0);
  for (std::size_t j = 0; j < s; ++j) norm += c[j] * length(branches[j].domain);
  if (norm == 0) throw NoStationaryDensity("stationary solution has zero mass");
  std::vector<DensityPiece> pieces;
  for (std::size_t j = 0; j < s; ++j) pieces.push_back({branches[j].domain, c[j] / norm});
  return make_measure(std::move(pieces));
}

ConditionReport check_invariance(const PiecewiseMap& map, const RationalMeasure& mu,
                                 unsigned test_depth) {
  ConditionReport report{"Invariance", Verdict::pass, test_depth, "", {}, ""};
  auto part = refine_partition(map, test_depth);
  for (const Interval& cell : part.cells) {
    std::vector<Interval> preimage;
    for (std::size_t i = 0; i < map.branches().size(); ++i)
      if (auto pre = inverse_branch(map, i, cell)) preimage.push_back(*pre);
    Rational lhs = measure_of_set(mu, preimage);
    Rational rhs = measure_of_set(mu, {cell});
    if (lhs != rhs) {
      report.verdict = Verdict::fail;
      report.witness =
          "cell=" + iv_str(cell) + " mass=" + rat_str(rhs) + " preimage-mass=" + rat_str(lhs);
      return report;
    }
  }
  report.note = "open cells; atoms on the cell skeleton are invisible here";
  return report;
}

namespace {

std::vector<std::pair<unsigned, Rational>> level_masses(const InducingScheme& scheme,
                                                        const RationalMeasure& nu) {
  std::map<unsigned, Rational> by_level;
  for (const BasicElement& e : scheme.elements)
    by_level[e.tau] += measure_of_set(nu, {e.interval});
  return {by_level.begin(), by_level.end()};
}

}  // namespace

LiftResult lift_measure(const InducingScheme& scheme, const PiecewiseMap& map,
                        const RationalMeasure& nu) {
  Interval closed_base = closed_iv(scheme.base.lo, scheme.base.hi);
  if (measure_of_set(nu, {closed_base}) != nu.total_mass)
    throw PreconditionUnverified("measure to lift carries mass outside the base");

  LiftResult out;
  out.mass_deficit = scheme.mass_deficit;
  out.Q = rat(0);
  out.captured_mass = rat(0);
  out.Q_is_complete = false;

  RationalMeasure sum = make_measure({});
  std::vector<Interval> blocks;
  for (const BasicElement& e : scheme.elements) {
    RationalMeasure part = restrict_measure(nu, e.interval);
    if (part.pieces.empty() && part.atoms.empty()) continue;
    out.Q += Rational(static_cast<long>(e.tau)) * part.total_mass;
    out.captured_mass += part.total_mass;
    Interval block = e.interval;
    sum = add(sum, part);
    blocks.push_back(block);
    for (unsigned k = 1; k < e.tau; ++k) {
      const AffineMap& g = map.branches().at(e.branch_word[k - 1]).map;
      part = pushforward(part, g);
      block = g.image(block);
      sum = add(sum, part);
      blocks.push_back(block);
    }
  }

  out.measure = out.Q > 0 ? scale(sum, 1 / out.Q) : sum;
  out.Q_is_complete = out.captured_mass == nu.total_mass;
  if (!out.Q_is_complete) {
    // try an exact geometric completion; accept it only when the extrapolated
    // mass closes the books with the uncaptured part exactly
    auto tail = geometric_tail(level_masses(scheme, nu));
    if (tail && tail->tail_sum == nu.total_mass - out.captured_mass)
      out.Q_tail = tail->tail_weighted;
  }

  std::sort(blocks.begin(), blocks.end(), [](const Interval& a, const Interval& b) {
    return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
  });
  for (const Interval& b : blocks) {
    if (!out.support_X.empty() && b.lo <= out.support_X.back().hi) {
      if (b.hi > out.support_X.back().hi) out.support_X.back().hi = b.hi;
    } else {
      out.support_X.push_back(b);
    }
  }
  return out;
}

namespace {

// ------- the density part of the tower lift, solved exactly -------

struct TowerCells {
  std::vector<Interval> ambient_cells;               // refinement of the ambient interval
  std::vector<std::vector<std::size_t>> cell_of;     // element -> ambient cell indices
  std::vector<std::vector<std::size_t>> column_of;   // element -> column per local cell
  std::size_t columns = 0;
};

// forward closure of the breakpoint set; throws when it fails to close
std::set<Rational> close_breakpoints(const PiecewiseMap& map, std::set<Rational> points) {
  std::vector<Rational> frontier(points.begin(), points.end());
  while (!frontier.empty()) {
    if (points.size() > kBreakpointBudget)
      throw PreconditionUnverified(
          "breakpoint orbit does not close; exact inducing unsupported for this input");
    std::vector<Rational> next;
    for (const Rational& p : frontier)
      for (const Rational& q : one_sided_images(map, p))
        if (points.insert(q).second) next.push_back(q);
    frontier = std::move(next);
  }
  return points;
}

TowerCells make_tower_cells(const PiecewiseMap& map, const Tower& tower,
                            const std::set<Rational>& breakpoints) {
  TowerCells tc;
  std::vector<Rational> pts;
  for (const Rational& p : breakpoints)
    if (closure_contains(map.ambient(), p)) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    tc.ambient_cells.push_back(open_iv(pts[i], pts[i + 1]));

  tc.cell_of.resize(tower.elements.size());
  tc.column_of.resize(tower.elements.size());
  for (const TowerElement& e : tower.elements) {
    for (std::size_t c = 0; c < tc.ambient_cells.size(); ++c) {
      if (closure_subset(tc.ambient_cells[c], e.interval)) {
        tc.cell_of[e.id].push_back(c);
        tc.column_of[e.id].push_back(tc.columns++);
      }
    }
  }
  return tc;
}

std::optional<std::size_t> local_index(const TowerCells& tc, std::size_t element,
                                       std::size_t ambient_cell) {
  const auto& cells = tc.cell_of[element];
  auto it = std::lower_bound(cells.begin(), cells.end(), ambient_cell);
  if (it == cells.end() || *it != ambient_cell) return std::nullopt;
  return static_cast<std::size_t>(it - cells.begin());
}

// density of mu on an ambient cell that does not straddle any mu breakpoint
Rational mu_height_on(const RationalMeasure& mu, const Interval& cell) {
  Rational h = rat(0);
  for (const DensityPiece& p : mu.pieces)
    if (closure_subset(cell, p.support)) h += p.height;
  return h;
}

std::vector<Rational> solve_tower_density(const PiecewiseMap& map, const Tower& tower,
                                          const TowerCells& tc, const RationalMeasure& mu) {
  std::vector<std::vector<Rational>> rows;
  std::size_t cols = tc.columns;

  // stationarity: the density of each (element, cell) equals the inflow over
  // all branch transitions whose image covers the cell
  for (const TowerElement& to : tower.elements) {
    for (std::size_t lc = 0; lc < tc.cell_of[to.id].size(); ++lc) {
      const Interval& target = tc.ambient_cells[tc.cell_of[to.id][lc]];
      std::vector<Rational> row(cols + 1, rat(0));
      row[tc.column_of[to.id][lc]] -= 1;
      for (const TowerElement& from : tower.elements) {
        for (std::size_t i = 0; i < map.branches().size(); ++i) {
          auto component = intersect_interior(from.interval, map.branches()[i].domain);
          if (!component) continue;
          Interval img = map.branches()[i].map.image(*component);
          auto dest = tower.find_element(img);
          if (!dest)
            throw PreconditionUnverified("tower transition leaves the built region");
          if (*dest != to.id) continue;
          for (std::size_t fc = 0; fc < tc.cell_of[from.id].size(); ++fc) {
            const Interval& source = tc.ambient_cells[tc.cell_of[from.id][fc]];
            if (!closure_subset(source, *component)) continue;
            if (!closure_subset(target, map.branches()[i].map.image(source))) continue;
            row[tc.column_of[from.id][fc]] += 1 / rat_abs(map.branches()[i].map.slope);
          }
        }
      }
      rows.push_back(std::move(row));
    }
  }

  // projection: the element densities over each ambient cell sum to mu's height
  for (std::size_t c = 0; c < tc.ambient_cells.size(); ++c) {
    std::vector<Rational> row(cols + 1, rat(0));
    bool any = false;
    for (const TowerElement& e : tower.elements)
      if (auto lc = local_index(tc, e.id, c)) {
        row[tc.column_of[e.id][*lc]] += 1;
        any = true;
      }
    row[cols] = mu_height_on(mu, tc.ambient_cells[c]);
    if (any || row[cols] != 0) rows.push_back(std::move(row));
  }

  auto solution = solve_unique(std::move(rows), cols);
  if (!solution)
    throw PreconditionUnverified(
        "no unique invariant lift of the density part on the built tower");
  for (const Rational& v : *solution)
    if (v < 0) throw PreconditionUnverified("invariant lift has negative density");
  return *solution;
}

}  // namespace

RationalMeasure induce_measure(const InducingScheme& scheme, const Tower& tower,
                               const PiecewiseMap& map, const RationalMeasure& mu,
                               const std::vector<ConditionReport>& prior_reports) {
  auto has_passing = [&](const std::string& name) {
    for (const ConditionReport& r : prior_reports)
      if (r.condition == name && passing(r)) return true;
    return false;
  };
  if (!has_passing("M") || !has_passing("C"))
    throw PreconditionUnverified("inducing needs passing M and C reports");
  if (!tower.saturated) throw PreconditionUnverified("inducing needs a saturated tower");

  ConditionReport inv = check_invariance(map, mu, kInvarianceDepth);
  if (!passing(inv))
    throw PreconditionUnverified("measure is not invariant: " + inv.witness);

  if (measure_of_set(mu, {scheme.base}) == 0) throw ZeroBaseMass();

  WCheckSet w = build_w_check(scheme, tower, map);
  if (!w.closed)
    throw PreconditionUnverified("swept base set did not close on the built tower");

  std::vector<DensityPiece> nu_pieces;
  std::vector<Atom> nu_atoms;

  // ---- atomic part: lift periodic orbits onto tower cycles ----
  {
    std::vector<Atom> pool = mu.atoms;
    while (!pool.empty()) {
      Atom seed = pool.front();
      std::vector<Rational> orbit{seed.point};
      Rational x = seed.point;
      for (std::size_t n = 0; n <= pool.size(); ++n) {
        try {
          x = eval_map(map, x, 1);
        } catch (const BoundaryHit&) {
          throw PreconditionUnverified("atom orbit at " + rat_str(seed.point) +
                                       " hits the partition boundary");
        }
        if (x == seed.point) break;
        orbit.push_back(x);
      }
      if (x != seed.point)
        throw PreconditionUnverified("atom at " + rat_str(seed.point) + " is not periodic");
      Rational orbit_mass = rat(0);
      for (const Rational& p : orbit) {
        auto it = std::find_if(pool.begin(), pool.end(),
                               [&](const Atom& a) { return a.point == p; });
        if (it == pool.end() || it->mass != seed.mass)
          throw PreconditionUnverified("atoms are not uniform along the orbit of " +
                                       rat_str(seed.point));
        orbit_mass += it->mass;
        pool.erase(it);
      }
      // tower orbit of (x0, base element): the invariant lift sits on its cycle
      std::vector<TowerState> path{{seed.point, 0}};
      std::size_t cycle_start = SIZE_MAX;
      while (cycle_start == SIZE_MAX) {
        TowerState next = tower_step(tower, map, path.back());
        for (std::size_t k = 0; k < path.size(); ++k)
          if (path[k].x == next.x && path[k].element == next.element) {
            cycle_start = k;
            break;
          }
        path.push_back(next);
        if (path.size() > tower.elements.size() * orbit.size() + 2)
          throw PreconditionUnverified("tower orbit of " + rat_str(seed.point) +
                                       " failed to cycle");
      }
      std::size_t cycle_len = path.size() - 1 - cycle_start;
      Rational per_pair = orbit_mass / Rational(static_cast<long>(cycle_len));
      for (std::size_t k = cycle_start; k + 1 < path.size(); ++k)
        if (w_check_contains(w, path[k].element, path[k].x))
          nu_atoms.push_back({path[k].x, per_pair});
    }
  }

  // ---- density part: exact stationary solve on the refined tower cells ----
  if (!mu.pieces.empty()) {
    std::set<Rational> breakpoints(map.boundary_points().begin(), map.boundary_points().end());
    breakpoints.insert(scheme.base.lo);
    breakpoints.insert(scheme.base.hi);
    for (const DensityPiece& p : mu.pieces) {
      breakpoints.insert(p.support.lo);
      breakpoints.insert(p.support.hi);
    }
    for (const TowerElement& e : tower.elements) {
      breakpoints.insert(e.interval.lo);
      breakpoints.insert(e.interval.hi);
    }
    for (const auto& [elem, span] : w.parts) {
      (void)elem;
      breakpoints.insert(span.lo);
      breakpoints.insert(span.hi);
    }
    breakpoints = close_breakpoints(map, std::move(breakpoints));
    TowerCells tc = make_tower_cells(map, tower, breakpoints);
    std::vector<Rational> density = solve_tower_density(map, tower, tc, mu);

    // restrict the lifted density to the swept base copies and project
    std::map<std::size_t, Rational> cell_height;
    for (const auto& [elem, span] : w.parts) {
      for (std::size_t lc = 0; lc < tc.cell_of[elem].size(); ++lc) {
        std::size_t c = tc.cell_of[elem][lc];
        if (!closure_subset(tc.ambient_cells[c], span)) continue;
        Rational v = density[tc.column_of[elem][lc]];
        if (v != 0) cell_height[c] += v;
      }
    }
    for (const auto& [c, h] : cell_height) nu_pieces.push_back({tc.ambient_cells[c], h});
  }

  RationalMeasure raw = make_measure(std::move(nu_pieces), std::move(nu_atoms));
  if (raw.total_mass == 0) throw ZeroBaseMass();
  return flatten(scale(raw, 1 / raw.total_mass));
}

ConditionReport kac_roundtrip_check(const InducingScheme& scheme, const Tower& tower,
                                    const PiecewiseMap& map, const RationalMeasure& mu,
                                    unsigned test_depth,
                                    const std::vector<ConditionReport>& prior_reports) {
  ConditionReport report{"Kac", Verdict::inconclusive, static_cast<long>(scheme.tau_max),
                         "", {}, ""};

  RationalMeasure nu = induce_measure(scheme, tower, map, mu, prior_reports);
  LiftResult lift = lift_measure(scheme, map, nu);
  Rational mu_base = measure_of_set(mu, {scheme.base});

  Rational q_eff = lift.Q;
  bool exact_q = lift.Q_is_complete;
  std::string accounting = "complete";
  if (!lift.Q_is_complete) {
    if (lift.Q_tail) {
      q_eff = lift.Q + *lift.Q_tail;
      exact_q = true;
      accounting = "geometric-tail";
    } else {
      accounting = "partial-only";
    }
  }
  Rational product = q_eff * mu_base;

  // total variation against mu on the test partition
  auto part = refine_partition(map, test_depth);
  Rational tv = rat(0);
  for (const Interval& cell : part.cells)
    tv += rat_abs(measure_of_set(lift.measure, {cell}) - measure_of_set(mu, {cell}));
  tv /= 2;
  Rational tv_bound = exact_q ? (q_eff - lift.Q) / q_eff : rat(0);

  report.numeric_data = {to_double(lift.Q), to_double(q_eff), to_double(product), to_double(tv),
                         to_double(tv_bound)};
  report.note = "accounting=" + accounting + " Q-partial=" + rat_str(lift.Q) +
                " Q-effective=" + rat_str(q_eff) + " product=" + rat_str(product) +
                " tv=" + rat_str(tv) + " tv-bound=" + rat_str(tv_bound) +
                " deficit=" + rat_str(lift.mass_deficit);

  if (!exact_q) {
    report.verdict = Verdict::inconclusive;
    report.note += "; no exact tail accounting at this truncation";
    return report;
  }
  bool kac_ok = product == 1;
  bool tv_ok = tv <= tv_bound;
  if (kac_ok && tv_ok) {
    report.verdict = accounting == "complete" ? Verdict::pass : Verdict::pass_at_depth;
  } else {
    report.verdict = Verdict::fail;
    report.witness = std::string(kac_ok ? "" : "kac-product=" + rat_str(product) + " ") +
                     (tv_ok ? "" : "tv=" + rat_str(tv) + " bound=" + rat_str(tv_bound));
  }
  if (!map.exact()) {
    report.verdict = Verdict::inconclusive;
    report.note += "; inconclusive-numeric";
  }
  return report;
}

}  // namespace pim
