#include "incompat/rational.hpp"

#include <stdexcept>

namespace incompat {

Rational::Rational(std::int64_t num, std::int64_t den) : Rational(Integer(num), Integer(den)) {}

Rational::Rational(const Integer& num, const Integer& den) {
  if (den == 0) throw std::domain_error("Rational: zero denominator");
  value_ = den < 0 ? Value(Integer(-num), Integer(-den)) : Value(num, den);
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.value_ == 0) throw std::domain_error("Rational: division by zero");
  value_ /= o.value_;
  return *this;
}

namespace {

Rational::Integer parse_integer(std::string_view text) {
  std::string_view digits = text;
  if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) digits.remove_prefix(1);
  if (digits.empty()) throw std::invalid_argument("Rational: empty integer");
  for (char c : digits) {
    if (c < '0' || c > '9') throw std::invalid_argument("Rational: bad digit in '" + std::string(text) + "'");
  }
  return Rational::Integer(std::string(text.front() == '+' ? digits : text));
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text), Integer(1));
  const Integer den = parse_integer(text.substr(slash + 1));
  if (den == 0) throw std::domain_error("Rational: zero denominator");
  return Rational(parse_integer(text.substr(0, slash)), den);
}

std::string Rational::str() const {
  const Integer den = denominator();
  if (den == 1) return numerator().str();
  return numerator().str() + "/" + den.str();
}

}  // namespace incompat
