#include "pim/interval.hpp"

#include <stdexcept>

namespace pim {

Interval open_iv(Rational lo, Rational hi) {
  if (!(lo < hi)) throw std::invalid_argument("interval needs lo < hi");
  return Interval{std::move(lo), std::move(hi), true, true};
}

Interval closed_iv(Rational lo, Rational hi) {
  if (!(lo < hi)) throw std::invalid_argument("interval needs lo < hi");
  return Interval{std::move(lo), std::move(hi), false, false};
}

Rational length(const Interval& iv) { return iv.hi - iv.lo; }

Rational midpoint(const Interval& iv) { return (iv.lo + iv.hi) / 2; }

bool contains(const Interval& iv, const Rational& x) {
  if (x < iv.lo || x > iv.hi) return false;
  if (x == iv.lo) return !iv.lo_open;
  if (x == iv.hi) return !iv.hi_open;
  return true;
}

bool interior_contains(const Interval& iv, const Rational& x) {
  return iv.lo < x && x < iv.hi;
}

bool closure_contains(const Interval& iv, const Rational& x) {
  return iv.lo <= x && x <= iv.hi;
}

bool same_closure(const Interval& a, const Interval& b) {
  return a.lo == b.lo && a.hi == b.hi;
}

bool closure_subset(const Interval& a, const Interval& b) {
  return b.lo <= a.lo && a.hi <= b.hi;
}

bool subset(const Interval& a, const Interval& b) {
  if (a.lo < b.lo || a.hi > b.hi) return false;
  if (a.lo == b.lo && !a.lo_open && b.lo_open) return false;
  if (a.hi == b.hi && !a.hi_open && b.hi_open) return false;
  return true;
}

bool interiors_intersect(const Interval& a, const Interval& b) {
  return std::max(a.lo, b.lo) < std::min(a.hi, b.hi);
}

std::optional<Interval> intersect_interior(const Interval& a, const Interval& b) {
  Rational lo = std::max(a.lo, b.lo);
  Rational hi = std::min(a.hi, b.hi);
  if (!(lo < hi)) return std::nullopt;
  return Interval{std::move(lo), std::move(hi), true, true};
}

std::optional<Interval> intersect(const Interval& a, const Interval& b) {
  Rational lo = std::max(a.lo, b.lo);
  Rational hi = std::min(a.hi, b.hi);
  if (!(lo < hi)) return std::nullopt;
  bool lo_open = (a.lo == lo && a.lo_open) || (b.lo == lo && b.lo_open);
  bool hi_open = (a.hi == hi && a.hi_open) || (b.hi == hi && b.hi_open);
  return Interval{std::move(lo), std::move(hi), lo_open, hi_open};
}

std::string iv_str(const Interval& iv) { return rat_str(iv.lo) + ".." + rat_str(iv.hi); }

Interval AffineMap::image(const Interval& iv) const {
  Rational a = (*this)(iv.lo), b = (*this)(iv.hi);
  if (slope > 0) return Interval{a, b, iv.lo_open, iv.hi_open};
  return Interval{b, a, iv.hi_open, iv.lo_open};
}

Interval AffineMap::preimage(const Interval& iv) const {
  Rational a = inverse(iv.lo), b = inverse(iv.hi);
  if (slope > 0) return Interval{a, b, iv.lo_open, iv.hi_open};
  return Interval{b, a, iv.hi_open, iv.lo_open};
}

AffineMap AffineMap::after(const AffineMap& g) const {
  return AffineMap{slope * g.slope, slope * g.offset + offset};
}

AffineMap AffineMap::identity() { return AffineMap{rat(1), rat(0)}; }

}  // namespace pim
