#pragma once

#include "pim/map.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace pim {

inline constexpr std::size_t kDefaultElementBudget = 100'000;

// One deduplicated element of the connected Markov extension. The interval is
// identified by its closure; the level is the first construction depth at
// which the set appears.
struct TowerElement {
  std::size_t id;
  Interval interval;
  unsigned level;
  unsigned first_seen_depth;
};

// f applied to the component of element `from` inside branch `branch` yields
// element `to`, covering it entirely.
struct TowerTransition {
  std::size_t from;
  std::size_t branch;
  std::size_t to;
};

// Connected Markov extension truncated at a construction depth. Element 0 is
// the ambient interval. Ids are canonical: sorted by (level, left endpoint),
// so rebuilding at the same depth reproduces the structure exactly.
struct Tower {
  std::vector<TowerElement> elements;
  std::vector<TowerTransition> transitions;  // sorted by (from, branch)
  unsigned depth = 0;
  bool saturated = false;

  std::optional<std::size_t> transition(std::size_t from, std::size_t branch) const;
  std::optional<std::size_t> find_element(const Interval& closure_key) const;
};

// Breadth-first construction of the element collections up to `depth`, with a
// one-level look-ahead to detect saturation (no new closure keys). Transitions
// whose destination was not built are omitted.
Tower build_tower(const PiecewiseMap& map, unsigned depth,
                  std::size_t element_budget = kDefaultElementBudget);

struct TowerState {
  Rational x;
  std::size_t element;
};

// One step of the tower dynamics: (x, D) -> (f(x), f(E)) where E is the
// component of D meeting the branch domain of x. Throws BoundaryHit when x is
// on the partition boundary and Unsaturated when the destination lies beyond
// the built depth.
TowerState tower_step(const Tower& tower, const PiecewiseMap& map, const TowerState& state);

// Verifies the Markov property on the built region: each recorded transition
// must map its source component exactly onto the destination element, and each
// (element, branch) pair with a nonempty component must carry a transition
// (except look-ahead pairs of an unsaturated tower). Any violation yields a
// fail with a (from, to, k) witness, reachability-checked up to k_max.
ConditionReport check_markov(const Tower& tower, const PiecewiseMap& map, unsigned k_max);

// A set mapped homeomorphically onto the given element by following the word
// from the tower base, witnessing the element's level.
struct LiftPath {
  Interval source;
  std::vector<std::size_t> word;
};

LiftPath homeomorphic_lift_path(const Tower& tower, const PiecewiseMap& map,
                                std::size_t element_id);

}  // namespace pim
