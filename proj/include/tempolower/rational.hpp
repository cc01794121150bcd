#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace tempolower {

/// Exact rational number. All times, durations and fluent values use this.
using Rational = boost::multiprecision::cpp_rational;

/// Parses "12", "-3", "2.5" or "7/3". Returns nullopt if the token is not a
/// number literal.
std::optional<Rational> parse_rational(std::string_view text);

/// Integers print as "12", terminating fractions as "2.5", anything else as
/// "7/3". parse_rational(format_rational(x)) == x for every x.
std::string format_rational(const Rational& value);

}  // namespace tempolower
