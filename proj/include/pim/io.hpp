#pragma once

#include "pim/inducing.hpp"
#include "pim/measure.hpp"
#include "pim/tower.hpp"

#include <iosfwd>
#include <string>

namespace pim {

// Map definition file: line oriented,
//   ambient = <lo>..<hi>
//   branch = <domain_lo> <domain_hi> <slope> <offset>   (repeated)
//   mode = exact|numeric                                (optional, default exact)
// Rationals print as numerator/denominator in lowest terms. Blank lines and
// '#' comments are skipped. Parse failures throw ParseError with the line.
PiecewiseMap load_map(std::istream& in);
PiecewiseMap load_map_file(const std::string& path);
void dump_map(std::ostream& out, const PiecewiseMap& map);

// Tower dump: header "depth=<N> saturated=<0|1>", then one line per element
// "elem <id> level=<n> interval=<lo>..<hi>" and per transition
// "edge <from> <branch> <to>".
void dump_tower(std::ostream& out, const Tower& tower);

// Scheme dump: header
//   base=<lo>..<hi> tau_max=<N> covered=<p/q> deficit=<p/q> [extended=<lo>..<hi>]
// then per element
//   J <lo>..<hi> tau=<n> word=<i1,i2,...> host=<lo>..<hi> [hostplus=<lo>..<hi>]
void dump_scheme(std::ostream& out, const InducingScheme& scheme);
InducingScheme load_scheme(std::istream& in);
InducingScheme load_scheme_file(const std::string& path);

// Measure file: header "total=<p/q>", records "piece <lo>..<hi> height=<p/q>"
// and "atom <p/q> mass=<p/q>".
void dump_measure(std::ostream& out, const RationalMeasure& measure);
RationalMeasure load_measure(std::istream& in);
RationalMeasure load_measure_file(const std::string& path);

Interval parse_interval(const std::string& text);  // "<lo>..<hi>", open

}  // namespace pim
