#pragma once

#include "chatcot/mathkit/expr.hpp"

#include <string>
#include <string_view>

namespace chatcot::mathkit {

/// Parses an arithmetic expression.
///
/// Precedence from loosest to tightest: mod, + -, * / (and implicit
/// multiplication as in "2x"), unary minus, ^. '^' is right-associative,
/// mod is left-associative. Accepts the LaTeX fragments \frac, \sqrt,
/// \cdot, \times, \div, \mod, \left/\right and math-mode dollar signs.
/// Throws Error(ParseError) carrying the 0-based offset of the problem.
Expr parse_expr(std::string_view source);

/// Removes math-mode delimiters, a trailing "=" or "= ?" and a final period.
std::string strip_math_delimiters(std::string_view source);

} // namespace chatcot::mathkit
