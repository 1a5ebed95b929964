#pragma once

#include "chatcot/mathkit/expr.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chatcot::mathkit {

struct Equation
{
    Expr lhs;
    Expr rhs;
};

struct EquationSystem
{
    std::vector<Equation> equations;
    std::vector<std::string> unknowns;
};

enum class SolutionKind { Unique, Underdetermined, Quadratic };

struct Solution
{
    SolutionKind kind = SolutionKind::Unique;
    /// unknown -> value, in the order the unknowns were given. For a
    /// quadratic there is one entry per distinct root (ascending).
    std::vector<std::pair<std::string, Expr>> assignments;
    /// Unknowns left as parameters in an underdetermined system.
    std::vector<std::string> free_unknowns;
};

/// Reads "solve {eq1; eq2} for {x, y}". Braces, the leading "solve" and the
/// "for" clause are optional; without "for" every symbol is an unknown.
/// Equations are separated by ';' or ','. An equation without '=' is
/// taken as "= 0".
EquationSystem parse_system(std::string_view source);

/// Solves linear systems exactly by Gaussian elimination over rationals
/// (constant terms may involve other symbols), or a single quadratic in one
/// unknown. Throws Unsolvable, Unsupported, DivisionByZero or ParseError.
Solution solve(EquationSystem const & system);

/// "x = 1, y = 1"; quadratic roots as "x = -2 or x = 3".
std::string render(Solution const & solution);

} // namespace chatcot::mathkit
