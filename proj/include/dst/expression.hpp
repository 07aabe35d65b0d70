// Copyright 2026 The DST Search Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace dst {

using Rational = boost::multiprecision::cpp_rational;

/// Outcome of evaluating an arithmetic expression. Exactly one of `value` and
/// `diagnostic` is meaningful.
struct ExpressionResult {
  std::optional<Rational> value;
  std::string diagnostic;
};

/// Evaluates an expression over integer and decimal literals with + - * /,
/// the symbols U+00D7, U+00F7 and U+2212, parentheses and unary signs.
/// Arithmetic is exact over the rationals. Thousands separators of the form
/// 1,234 are accepted inside literals. Never throws on bad input.
ExpressionResult evaluate_expression(std::string_view text);

}  // namespace dst
