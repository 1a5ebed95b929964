#pragma once

#include "chatcot/mathkit/expr.hpp"
#include "chatcot/mathkit/solver.hpp"
#include "chatcot/tool_result.hpp"

#include <string_view>

namespace chatcot::mathkit {

/// Exact value of a symbol-free expression ("5", "3/2"). Expressions with
/// free symbols or irrational parts fall through to simplify().
ToolResult eval_expr(Expr const & e);

/// Combines like terms and reduces fractions; canonical rendering.
ToolResult simplify(Expr const & e);

ToolResult solve_system(EquationSystem const & system);

/// The calculator tool: parse the argument text and evaluate/simplify it.
ToolResult calculator(std::string_view argument);

/// The equation-solver tool: "solve {eq1; eq2; ...} for {x, y, ...}".
ToolResult equation_solver(std::string_view argument);

} // namespace chatcot::mathkit
