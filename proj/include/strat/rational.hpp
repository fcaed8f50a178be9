#pragma once

#include "strat/core.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace strat {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

Real to_real(const Rational& q);
/// Exact value of a binary floating point number.
Rational exact_rational(Real v);
/// Parses "12", "-3/4", "0.125", "1e-3" exactly.
Rational parse_rational(const std::string& text);
std::string rational_str(const Rational& q);
/// Shortest decimal text that parses back to exactly v.
std::string shortest_text(Real v);

}  // namespace strat
