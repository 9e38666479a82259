#pragma once

#include "pim/rational.hpp"

#include <optional>
#include <string>

namespace pim {

// Rational interval with nonempty interior (lo < hi) and endpoint openness
// flags. Identity throughout the toolkit compares closures only: sets that
// differ by finitely many endpoints are the same object. The flags matter for
// point membership (measure atoms, cylinder ends).
struct Interval {
  Rational lo, hi;
  bool lo_open = true, hi_open = true;
};

Interval open_iv(Rational lo, Rational hi);
Interval closed_iv(Rational lo, Rational hi);

Rational length(const Interval& iv);
Rational midpoint(const Interval& iv);

bool contains(const Interval& iv, const Rational& x);           // honors flags
bool interior_contains(const Interval& iv, const Rational& x);  // lo < x < hi
bool closure_contains(const Interval& iv, const Rational& x);   // lo <= x <= hi

bool same_closure(const Interval& a, const Interval& b);
bool closure_subset(const Interval& a, const Interval& b);  // cl(a) within cl(b)
bool subset(const Interval& a, const Interval& b);          // as point sets
bool interiors_intersect(const Interval& a, const Interval& b);

// Intersection of interiors; nullopt when it has empty interior.
std::optional<Interval> intersect_interior(const Interval& a, const Interval& b);
// Set intersection with merged flags; nullopt when the interior is empty
// (single shared endpoints are dropped, consistent with closure identity).
std::optional<Interval> intersect(const Interval& a, const Interval& b);

std::string iv_str(const Interval& iv);  // "lo..hi" with p/q endpoints

// x -> slope*x + offset, slope nonzero.
struct AffineMap {
  Rational slope, offset;

  Rational operator()(const Rational& x) const { return slope * x + offset; }
  Rational inverse(const Rational& y) const { return (y - offset) / slope; }
  Interval image(const Interval& iv) const;
  Interval preimage(const Interval& iv) const;
  // composition: (this->after(g))(x) == (*this)(g(x))
  AffineMap after(const AffineMap& g) const;
  static AffineMap identity();
};

}  // namespace pim
