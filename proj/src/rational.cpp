#include "pim/rational.hpp"

#include <stdexcept>

namespace pim {

Rational rat(long num, long den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::string rat_str(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
  auto bad = [&] {
    return std::invalid_argument("malformed rational '" + std::string(text) + "'");
  };
  if (text.empty()) throw bad();
  std::string num, den = "1";
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    num = std::string(text);
  } else {
    num = std::string(text.substr(0, slash));
    den = std::string(text.substr(slash + 1));
  }
  auto digits = [](std::string_view s) {
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  if (!digits(num) || !digits(den)) throw bad();
  Rational q;
  if (mpq_set_str(q.get_mpq_t(), (num + "/" + den).c_str(), 10) != 0) throw bad();
  if (q.get_den() == 0) throw std::invalid_argument("rational with zero denominator");
  q.canonicalize();
  return q;
}

double to_double(const Rational& q) { return q.get_d(); }

Rational rat_abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

Rational rat_pow(const Rational& q, long k) {
  if (k == 0) return rat(1);
  bool inv = k < 0;
  unsigned long e = inv ? static_cast<unsigned long>(-k) : static_cast<unsigned long>(k);
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), q.get_num_mpz_t(), e);
  mpz_pow_ui(r.get_den_mpz_t(), q.get_den_mpz_t(), e);
  r.canonicalize();
  if (inv) {
    if (r == 0) throw std::invalid_argument("negative power of zero");
    r = 1 / r;
  }
  return r;
}

bool is_integer(const Rational& q) { return q.get_den() == 1; }

}  // namespace pim
