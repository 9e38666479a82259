#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace pim {

// Exact rational coordinates for everything in the toolkit. GMP keeps values
// canonical (reduced, positive denominator) after every arithmetic operation.
using Rational = mpq_class;

Rational rat(long num, long den = 1);

// Serialized form is always "numerator/denominator" in lowest terms with the
// sign on the numerator, e.g. "-3/4", "0/1", "7/1".
std::string rat_str(const Rational& q);

// Accepts "p/q" or a bare integer "p". Throws std::invalid_argument on
// malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

double to_double(const Rational& q);

Rational rat_abs(const Rational& q);

// q^k for integer k (k may be negative; q must be nonzero then)
Rational rat_pow(const Rational& q, long k);

bool is_integer(const Rational& q);

}  // namespace pim
