#include "pim/inducing.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace pim {

namespace {

struct Candidate {
  Interval interval;
  unsigned tau;
  Interval host;
  std::vector<std::size_t> word;
};

// All homeomorphic pullbacks of `target` with word length <= tau_max lying
// strictly inside `inside` (the collection Q when target == inside == V). When
// `cover` is set, the piece must additionally map over it (Q+ membership).
std::vector<Candidate> enumerate_pullbacks(const PiecewiseMap& map, const Interval& target,
                                           const std::optional<Interval>& cover,
                                           unsigned tau_max, std::size_t budget) {
  std::vector<Candidate> out;
  for_each_monotone_piece(
      map, tau_max, kDefaultCellBudget,
      [&](const Interval& piece, const AffineMap& g, const std::vector<std::size_t>& word) {
        Interval img = g.image(piece);
        if (!subset(target, img)) return true;
        if (cover && !subset(*cover, img)) return true;
        Interval pulled = g.preimage(target);
        if (subset(pulled, target) && !same_closure(pulled, target)) {
          if (out.size() >= budget) throw ElementBudgetExceeded(budget);
          out.push_back({pulled, static_cast<unsigned>(word.size()), piece, word});
        }
        return true;
      });
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.tau != b.tau) return a.tau < b.tau;
    return a.interval.lo < b.interval.lo;
  });
  return out;
}

bool verdicts_require_exact(const PiecewiseMap& map, ConditionReport& r) {
  if (map.exact()) return false;
  r.verdict = Verdict::inconclusive;
  r.note += (r.note.empty() ? "" : "; ");
  r.note += "inconclusive-numeric";
  return true;
}

}  // namespace

NiceCertificate certify_nice(const PiecewiseMap& map, const Interval& V, unsigned horizon) {
  if (!closure_subset(V, map.ambient()))
    throw std::invalid_argument("nice candidate escapes the ambient interval");
  if (!V.lo_open || !V.hi_open)
    throw std::invalid_argument("nice candidate must be an open interval");

  NiceCertificate cert{V, horizon, NiceVerdict::nice, std::nullopt,
                       OrbitClass::eventually_periodic};

  // the interior of V approaches lo from the right and hi from the left
  const std::pair<Rational, Side> starts[2] = {{V.lo, Side::right}, {V.hi, Side::left}};
  bool all_cyclic = true;
  for (const auto& [start, side0] : starts) {
    std::set<std::pair<Rational, int>> visited;
    Rational x = start;
    Side side = side0;
    bool cyclic = false;
    for (unsigned n = 0; n <= horizon; ++n) {
      if (interior_contains(V, x)) {
        cert.verdict = NiceVerdict::not_nice;
        cert.witness = NiceWitness{start, n};
        cert.boundary_orbit_class =
            OrbitClass::eventually_periodic;  // the witness is exact regardless
        return cert;
      }
      if (!visited.insert({x, side == Side::left ? 0 : 1}).second) {
        cyclic = true;
        break;
      }
      auto next = one_sided_step(map, x, side);
      if (!next) {
        // no adjacent branch on this side; the one-sided orbit terminates
        cyclic = true;
        break;
      }
      x = next->first;
      side = next->second;
    }
    if (!cyclic) all_cyclic = false;
  }
  cert.boundary_orbit_class =
      all_cyclic ? OrbitClass::eventually_periodic : OrbitClass::open_ended;
  return cert;
}

const BasicElement* element_containing(const InducingScheme& scheme, const Rational& x) {
  for (const BasicElement& e : scheme.elements)
    if (interior_contains(e.interval, x)) return &e;
  return nullptr;
}

InducingScheme build_canonical_scheme(const PiecewiseMap& map, const NiceCertificate& cert,
                                      unsigned tau_max, std::optional<Interval> extended_base,
                                      std::size_t element_budget) {
  if (cert.verdict != NiceVerdict::nice)
    throw PreconditionUnverified("canonical scheme needs a nice base certificate");
  const Interval& V = cert.candidate;
  if (extended_base) {
    if (!(extended_base->lo < V.lo) || !(V.hi < extended_base->hi))
      throw std::invalid_argument("extended base must strictly contain the base closure");
  }

  auto candidates = enumerate_pullbacks(map, V, extended_base, tau_max, element_budget);

  InducingScheme scheme;
  scheme.base = V;
  scheme.extended_base = extended_base;
  scheme.tau_max = tau_max;

  // Keep minimal-time elements: anything inside an accepted element is a
  // deeper pullback of it. Overlapping candidates of equal time would
  // contradict the nested-or-disjoint dichotomy for a nice base, so they
  // abort the build as an arithmetic or niceness bug.
  for (const Candidate& c : candidates) {
    bool covered = false;
    for (const BasicElement& kept : scheme.elements) {
      if (closure_subset(c.interval, kept.interval)) {
        covered = true;
        break;
      }
      if (kept.tau == c.tau && interiors_intersect(kept.interval, c.interval))
        throw Error("equal-time overlapping pullbacks of " + iv_str(V) +
                    "; base is not nice or the build is broken");
    }
    if (covered) continue;
    BasicElement elem{c.interval, c.tau, c.host, std::nullopt, c.word};
    if (extended_base) {
      AffineMap g = AffineMap::identity();
      for (std::size_t s : c.word) g = map.branches()[s].map.after(g);
      elem.extended_host = g.preimage(*extended_base);
    }
    scheme.elements.push_back(std::move(elem));
  }

  scheme.covered_length = rat(0);
  for (const BasicElement& e : scheme.elements) scheme.covered_length += length(e.interval);
  scheme.mass_deficit = length(V) - scheme.covered_length;
  return scheme;
}

ConditionReport check_nested_or_disjoint(const PiecewiseMap& map, const NiceCertificate& cert,
                                         unsigned tau_max, std::size_t element_budget) {
  ConditionReport report{"NestedOrDisjoint", Verdict::pass, tau_max, "", {}, ""};
  auto pulls = enumerate_pullbacks(map, cert.candidate, std::nullopt, tau_max, element_budget);
  for (std::size_t a = 0; a < pulls.size(); ++a) {
    for (std::size_t b = a + 1; b < pulls.size(); ++b) {
      const Candidate &outer = pulls[a], &inner = pulls[b];  // tau sorted: outer.tau <= inner.tau
      if (!interiors_intersect(outer.interval, inner.interval)) continue;
      bool nested = closure_subset(inner.interval, outer.interval);
      if (!nested || outer.tau >= inner.tau) {
        report.verdict = Verdict::fail;
        report.witness = "J=" + iv_str(outer.interval) + " n=" + std::to_string(outer.tau) +
                         " J'=" + iv_str(inner.interval) + " m=" + std::to_string(inner.tau);
        return report;
      }
    }
  }
  report.note = "pullbacks=" + std::to_string(pulls.size());
  if (pulls.empty()) report.note += " (vacuous)";
  verdicts_require_exact(map, report);
  return report;
}

namespace {

ConditionReport check_H1(const PiecewiseMap& map, const InducingScheme& scheme) {
  ConditionReport r{"H1", Verdict::pass, static_cast<long>(scheme.tau_max), "", {}, ""};
  for (const BasicElement& e : scheme.elements) {
    Interval host = e.host;
    Interval img = e.interval;
    for (std::size_t k = 0; k < e.branch_word.size(); ++k) {
      const Branch& b = map.branches().at(e.branch_word[k]);
      if (!closure_subset(host, b.domain)) {
        r.verdict = Verdict::fail;
        r.witness = "J=" + iv_str(e.interval) + " step=" + std::to_string(k) +
                    " reason=host-leaves-branch";
        return r;
      }
      host = b.map.image(host);
      img = b.map.image(img);
    }
    if (!same_closure(img, scheme.base) || !closure_subset(scheme.base, host)) {
      r.verdict = Verdict::fail;
      r.witness = "J=" + iv_str(e.interval) + " image=" + iv_str(img) +
                  " host-image=" + iv_str(host);
      return r;
    }
  }
  r.note = "elements=" + std::to_string(scheme.elements.size());
  return r;
}

ConditionReport check_C(const PiecewiseMap& map, const InducingScheme& scheme, bool extended) {
  ConditionReport r{extended ? "C+" : "C", Verdict::pass, static_cast<long>(scheme.tau_max),
                    "", {}, ""};
  for (const BasicElement& e : scheme.elements) {
    if (extended && !e.extended_host) {
      r.verdict = Verdict::inconclusive;
      r.note = "no extended host stored";
      return r;
    }
    Interval cur = extended ? *e.extended_host : e.host;
    for (unsigned i = 0; i < e.tau; ++i) {
      for (const Rational& p : map.boundary_points()) {
        if (interior_contains(cur, p)) {
          r.verdict = Verdict::fail;
          r.witness = "J=" + iv_str(e.interval) + " i=" + std::to_string(i) +
                      " boundary=" + rat_str(p);
          return r;
        }
      }
      if (i + 1 < e.tau) {
        const Branch& b = map.branches().at(e.branch_word[i]);
        if (!closure_subset(cur, b.domain)) {
          r.verdict = Verdict::fail;
          r.witness = "J=" + iv_str(e.interval) + " i=" + std::to_string(i) +
                      " reason=host-leaves-branch";
          return r;
        }
        cur = b.map.image(cur);
      }
    }
  }
  return r;
}

ConditionReport check_M(const PiecewiseMap& map, const InducingScheme& scheme, unsigned m_max,
                        bool extended) {
  ConditionReport r{extended ? "M+" : "M", Verdict::pass_at_depth, m_max, "", {}, ""};
  if (scheme.elements.empty()) {
    r.verdict = Verdict::inconclusive;
    r.note = "empty scheme";
    return r;
  }
  if (extended && !scheme.extended_base) {
    r.verdict = Verdict::inconclusive;
    r.note = "no extended base";
    return r;
  }
  const Interval& cover = extended ? *scheme.extended_base : scheme.base;
  for_each_monotone_piece(
      map, m_max, kDefaultCellBudget,
      [&](const Interval& piece, const AffineMap& g, const std::vector<std::size_t>& word) {
        if (r.verdict == Verdict::fail) return false;
        Interval img = g.image(piece);
        if (!subset(cover, img)) return true;
        Interval L = g.preimage(scheme.base);
        unsigned m = static_cast<unsigned>(word.size());
        for (const BasicElement& e : scheme.elements) {
          if (e.tau > m && interiors_intersect(L, e.interval)) {
            r.verdict = Verdict::fail;
            r.witness = "L=" + iv_str(L) + " m=" + std::to_string(m) +
                        " J=" + iv_str(e.interval) + " tau=" + std::to_string(e.tau);
            return false;
          }
        }
        return true;
      });
  if (r.verdict == Verdict::fail) return r;
  if (m_max < scheme.tau_max) {
    r.verdict = Verdict::inconclusive;
    r.note = "m_max below the scheme truncation";
  }
  return r;
}

ConditionReport check_H2_disjoint(const InducingScheme& scheme) {
  ConditionReport r{"H2", Verdict::pass, static_cast<long>(scheme.tau_max), "", {}, ""};
  for (std::size_t a = 0; a < scheme.elements.size(); ++a)
    for (std::size_t b = a + 1; b < scheme.elements.size(); ++b)
      if (interiors_intersect(scheme.elements[a].interval, scheme.elements[b].interval)) {
        r.verdict = Verdict::fail;
        r.witness = "J=" + iv_str(scheme.elements[a].interval) +
                    " J'=" + iv_str(scheme.elements[b].interval);
        return r;
      }
  r.note = "element disjointness only; cylinder diagnostics carry the generating part";
  return r;
}

}  // namespace

std::string cond_name(Cond c) {
  switch (c) {
    case Cond::H1: return "H1";
    case Cond::H2: return "H2";
    case Cond::M: return "M";
    case Cond::C: return "C";
    case Cond::Mplus: return "M+";
    case Cond::Cplus: return "C+";
  }
  return "?";
}

std::vector<ConditionReport> check_conditions(const PiecewiseMap& map,
                                              const InducingScheme& scheme, unsigned m_max,
                                              const std::vector<Cond>& which) {
  std::vector<ConditionReport> out;
  for (Cond c : which) {
    ConditionReport r;
    switch (c) {
      case Cond::H1: r = check_H1(map, scheme); break;
      case Cond::H2: r = check_H2_disjoint(scheme); break;
      case Cond::M: r = check_M(map, scheme, m_max, false); break;
      case Cond::Mplus: r = check_M(map, scheme, m_max, true); break;
      case Cond::C: r = check_C(map, scheme, false); break;
      case Cond::Cplus: r = check_C(map, scheme, true); break;
    }
    verdicts_require_exact(map, r);
    out.push_back(std::move(r));
  }
  return out;
}

ConditionReport check_H3_surrogate(const PiecewiseMap& map, const NiceCertificate& cert,
                                   unsigned tau_max, std::size_t element_budget) {
  ConditionReport r{"H3-surrogate", Verdict::inconclusive, tau_max, "", {}, ""};
  InducingScheme now = build_canonical_scheme(map, cert, tau_max, std::nullopt, element_budget);
  r.numeric_data.push_back(to_double(now.mass_deficit));
  r.note = "deficit=" + rat_str(now.mass_deficit);
  if (now.mass_deficit == 0) {
    r.verdict = Verdict::pass;
    r.note += " (base fully covered)";
  } else if (tau_max > 1) {
    InducingScheme prev =
        build_canonical_scheme(map, cert, tau_max - 1, std::nullopt, element_budget);
    r.numeric_data.push_back(to_double(prev.mass_deficit));
    if (now.mass_deficit < prev.mass_deficit) {
      r.verdict = Verdict::pass_at_depth;
      r.note += " down-from=" + rat_str(prev.mass_deficit);
    } else {
      r.note += " stalled-at=" + rat_str(prev.mass_deficit);
    }
  }
  verdicts_require_exact(map, r);
  return r;
}

WCheckSet build_w_check(const InducingScheme& scheme, const Tower& tower,
                        const PiecewiseMap& map, std::size_t part_budget) {
  WCheckSet w;
  w.closed = true;
  std::map<std::pair<std::size_t, std::pair<Rational, Rational>>, bool> seen;
  std::vector<std::pair<std::size_t, Interval>> queue;

  auto push = [&](std::size_t elem, const Interval& iv) {
    auto key = std::make_pair(elem, std::make_pair(iv.lo, iv.hi));
    if (seen.emplace(key, true).second) {
      w.parts.emplace_back(elem, iv);
      queue.emplace_back(elem, iv);
    }
  };
  push(0, scheme.base);

  while (!queue.empty()) {
    if (w.parts.size() > part_budget) {
      w.closed = false;
      break;
    }
    auto [elem, span] = queue.back();
    queue.pop_back();
    for (const BasicElement& e : scheme.elements) {
      auto start = intersect_interior(span, e.interval);
      if (!start) continue;
      // one block of the induced map on the tower
      std::size_t cur_elem = elem;
      Interval cur = *start;
      bool ok = true;
      for (std::size_t s : e.branch_word) {
        auto to = tower.transition(cur_elem, s);
        if (!to) {
          auto component = intersect_interior(tower.elements[cur_elem].interval,
                                              map.branches()[s].domain);
          if (component) to = tower.find_element(map.branches()[s].map.image(*component));
        }
        if (!to) {
          w.closed = false;
          ok = false;
          break;
        }
        cur = map.branches()[s].map.image(cur);
        cur_elem = *to;
      }
      if (ok) push(cur_elem, cur);
    }
  }
  std::sort(w.parts.begin(), w.parts.end(), [](const auto& a, const auto& b) {
    return std::make_tuple(a.first, a.second.lo, a.second.hi) <
           std::make_tuple(b.first, b.second.lo, b.second.hi);
  });
  return w;
}

bool w_check_contains(const WCheckSet& w, std::size_t element, const Rational& x) {
  for (const auto& [elem, span] : w.parts)
    if (elem == element && interior_contains(span, x)) return true;
  return false;
}

ConditionReport embed_in_tower(const InducingScheme& scheme, const Tower& tower,
                               const PiecewiseMap& map, std::size_t sample_budget,
                               const std::vector<ConditionReport>& prior_reports) {
  auto find_passing = [&](const std::string& name) {
    for (const ConditionReport& r : prior_reports)
      if (r.condition == name && passing(r)) return true;
    return false;
  };
  if (!find_passing("M") || !find_passing("C"))
    throw PreconditionUnverified("first-return embedding needs passing M and C reports");
  if (!tower.saturated)
    throw PreconditionUnverified("first-return embedding needs a saturated tower");

  ConditionReport report{"FirstReturn", Verdict::pass, static_cast<long>(scheme.tau_max),
                         "", {}, ""};

  WCheckSet w = build_w_check(scheme, tower, map);
  if (!w.closed) report.note = "swept set truncated; ";

  // coverage: every tower element met by the sweep must project over the
  // whole base, otherwise the sweep cannot carry full base copies
  for (const auto& [elem, span] : w.parts) {
    (void)span;
    if (!closure_subset(scheme.base, tower.elements[elem].interval)) {
      report.verdict = Verdict::fail;
      report.witness = "element=" + std::to_string(elem) +
                       " interval=" + iv_str(tower.elements[elem].interval) +
                       " base=" + iv_str(scheme.base);
      return report;
    }
  }

  // Sample the sweep: midpoint and the two quartile points of each
  // (part, element) slice, capped by the budget.
  std::size_t samples = 0, skipped = 0;
  for (const auto& [elem, span] : w.parts) {
    for (const BasicElement& e : scheme.elements) {
      auto slice = intersect_interior(span, e.interval);
      if (!slice) continue;
      const Rational points[3] = {midpoint(*slice), (3 * slice->lo + slice->hi) / 4,
                                  (slice->lo + 3 * slice->hi) / 4};
      for (const Rational& x : points) {
        if (samples >= sample_budget) break;
        ++samples;
        TowerState state{x, elem};
        bool boundary = false;
        for (unsigned i = 1; i <= e.tau && !boundary; ++i) {
          try {
            state = tower_step(tower, map, state);
          } catch (const BoundaryHit&) {
            ++skipped;
            boundary = true;
            break;
          }
          bool inside = w_check_contains(w, state.element, state.x);
          if (i < e.tau && inside) {
            report.verdict = Verdict::fail;
            report.witness = "J=" + iv_str(e.interval) + " x=" + rat_str(x) +
                             " premature-return-at=" + std::to_string(i);
            return report;
          }
          if (i == e.tau && !inside) {
            report.verdict = Verdict::fail;
            report.witness = "J=" + iv_str(e.interval) + " x=" + rat_str(x) +
                             " no-return-at-tau=" + std::to_string(e.tau);
            return report;
          }
        }
      }
    }
  }
  report.note += "samples=" + std::to_string(samples) +
                 " skipped-boundary=" + std::to_string(skipped) +
                 " parts=" + std::to_string(w.parts.size());
  verdicts_require_exact(map, report);
  return report;
}

}  // namespace pim
