#include "chatcot/mathkit/solver.hpp"

#include "chatcot/error.hpp"
#include "chatcot/mathkit/parser.hpp"
#include "chatcot/mathkit/simplify.hpp"
#include "chatcot/text.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace chatcot::mathkit {

namespace mp = boost::multiprecision;

namespace {

bool
is_open(char c)
{
    return c == '(' || c == '{' || c == '[';
}

bool
is_close(char c)
{
    return c == ')' || c == '}' || c == ']';
}

std::string_view
strip_outer_braces(std::string_view s)
{
    s = text::trim(s);
    if (s.size() < 2 || s.front() != '{' || s.back() != '}') {
        return s;
    }
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (is_open(s[i])) {
            ++depth;
        } else if (is_close(s[i])) {
            --depth;
            if (depth == 0 && i + 1 != s.size()) {
                return s;
            }
        }
    }
    return text::trim(s.substr(1, s.size() - 2));
}

std::vector<std::string_view>
split_top_level(std::string_view s, std::string_view separators)
{
    std::vector<std::string_view> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (is_open(s[i])) {
            ++depth;
        } else if (is_close(s[i])) {
            --depth;
        } else if (depth == 0 && separators.find(s[i]) != std::string_view::npos) {
            out.push_back(text::trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(text::trim(s.substr(start)));
    std::erase_if(out, [](std::string_view part) { return part.empty(); });
    return out;
}

// Position of the last top-level word "for", or npos.
std::size_t
find_for_clause(std::string_view s)
{
    std::size_t found = std::string_view::npos;
    int depth = 0;
    for (std::size_t i = 0; i + 3 <= s.size(); ++i) {
        if (is_open(s[i])) {
            ++depth;
        } else if (is_close(s[i])) {
            --depth;
        }
        if (depth != 0) {
            continue;
        }
        bool const left = i == 0 || !std::isalnum(static_cast<unsigned char>(s[i - 1]));
        bool const right = i + 3 == s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 3]));
        if (left && right && text::to_lower(s.substr(i, 3)) == "for") {
            found = i;
        }
    }
    return found;
}

Equation
parse_equation(std::string_view part)
{
    std::string eq(part);
    for (auto pos = eq.find("=="); pos != std::string::npos; pos = eq.find("==")) {
        eq.erase(pos, 1);
    }
    auto const sides = text::split(eq, '=');
    if (sides.size() == 1) {
        return Equation{parse_expr(sides[0]), Expr::integer(0)};
    }
    if (sides.size() != 2 || text::trim(sides[0]).empty() || text::trim(sides[1]).empty()) {
        throw Error(ErrorCode::ParseError, "malformed equation '" + std::string(part) + "'");
    }
    return Equation{parse_expr(sides[0]), parse_expr(sides[1])};
}

struct LinearForm
{
    std::vector<Rational> coefficients; // one per unknown
    Polynomial rest;                    // terms free of unknowns
};

std::optional<LinearForm>
as_linear(Polynomial const & p, std::vector<std::string> const & unknowns)
{
    LinearForm form;
    form.coefficients.assign(unknowns.size(), Rational(0));
    form.rest.merge_atoms(p);
    for (auto const & [mono, coef] : p.terms()) {
        std::optional<std::size_t> slot;
        for (auto const & [key, exponent] : mono) {
            auto it = std::find(unknowns.begin(), unknowns.end(), key);
            if (it != unknowns.end()) {
                if (slot || exponent != 1 || mono.size() != 1) {
                    return std::nullopt;
                }
                slot = static_cast<std::size_t>(it - unknowns.begin());
            }
        }
        if (slot) {
            form.coefficients[*slot] += coef;
        } else {
            form.rest.add_term(mono, coef);
        }
    }
    return form;
}

void
reject_hidden_unknowns(Polynomial const & p, std::set<std::string> const & unknowns)
{
    for (auto const & [mono, coef] : p.terms()) {
        for (auto const & [key, exponent] : mono) {
            if (unknowns.contains(key)) {
                continue;
            }
            for (auto const & sym : free_symbols(p.atom_base(key))) {
                if (unknowns.contains(sym)) {
                    throw Error(
                        ErrorCode::Unsupported,
                        "unknown " + sym + " appears inside " + key + ", which is not polynomial");
                }
            }
        }
    }
}

Solution
solve_linear(std::vector<LinearForm> rows, std::vector<std::string> const & unknowns)
{
    std::size_t const n = unknowns.size();
    std::vector<std::size_t> pivot_cols;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < n && rank < rows.size(); ++col) {
        auto it = std::find_if(rows.begin() + static_cast<std::ptrdiff_t>(rank), rows.end(), [col](LinearForm const & r) {
            return r.coefficients[col] != 0;
        });
        if (it == rows.end()) {
            continue;
        }
        std::iter_swap(rows.begin() + static_cast<std::ptrdiff_t>(rank), it);
        LinearForm & pivot = rows[rank];
        Rational const inv = Rational(1) / pivot.coefficients[col];
        for (auto & c : pivot.coefficients) {
            c *= inv;
        }
        pivot.rest *= inv;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r].coefficients[col] == 0) {
                continue;
            }
            Rational const factor = rows[r].coefficients[col];
            for (std::size_t c = 0; c < n; ++c) {
                rows[r].coefficients[c] -= factor * pivot.coefficients[c];
            }
            rows[r].rest += pivot.rest * Rational(-factor);
        }
        pivot_cols.push_back(col);
        ++rank;
    }
    for (std::size_t r = rank; r < rows.size(); ++r) {
        if (!rows[r].rest.is_zero()) {
            throw Error(ErrorCode::Unsolvable, "the system of equations is inconsistent");
        }
    }

    Solution out;
    std::vector<bool> is_pivot(n, false);
    for (auto c : pivot_cols) {
        is_pivot[c] = true;
    }
    for (std::size_t c = 0; c < n; ++c) {
        if (!is_pivot[c]) {
            out.free_unknowns.push_back(unknowns[c]);
        }
    }
    out.kind = out.free_unknowns.empty() ? SolutionKind::Unique : SolutionKind::Underdetermined;

    // row: sum(coef * x) + rest = 0  =>  x_pivot = -rest - sum(free coef * x_free)
    for (std::size_t r = 0; r < rank; ++r) {
        Polynomial value = rows[r].rest * Rational(-1);
        for (std::size_t c = 0; c < n; ++c) {
            if (!is_pivot[c] && rows[r].coefficients[c] != 0) {
                value += Polynomial::atom(unknowns[c], Expr::symbol(unknowns[c]))
                    * Rational(-rows[r].coefficients[c]);
            }
        }
        out.assignments.emplace_back(unknowns[pivot_cols[r]], value.to_expr());
    }
    std::sort(out.assignments.begin(), out.assignments.end(), [&unknowns](auto const & a, auto const & b) {
        return std::find(unknowns.begin(), unknowns.end(), a.first)
            < std::find(unknowns.begin(), unknowns.end(), b.first);
    });
    return out;
}

Solution
solve_quadratic(Polynomial const & p, std::string const & unknown)
{
    Rational a = 0;
    Rational b = 0;
    Rational c = 0;
    for (auto const & [mono, coef] : p.terms()) {
        if (mono.empty()) {
            c = coef;
            continue;
        }
        if (mono.size() != 1 || mono[0].first != unknown) {
            throw Error(ErrorCode::Unsupported, "nonlinear equations with parameters are not supported");
        }
        long const degree = mono[0].second;
        if (degree == 2) {
            a = coef;
        } else if (degree == 1) {
            b = coef;
        } else {
            throw Error(ErrorCode::Unsupported, "only polynomial equations up to degree 2 are supported");
        }
    }
    Rational const discriminant = b * b - 4 * a * c;
    if (discriminant < 0) {
        throw Error(ErrorCode::Unsolvable, "the equation has no real solution");
    }
    Solution out;
    out.kind = SolutionKind::Quadratic;
    Rational const vertex = -b / (2 * a);
    if (discriminant == 0) {
        out.assignments.emplace_back(unknown, Expr::number(vertex));
        return out;
    }
    Rational const half_width_scale = Rational(1) / (2 * mp::abs(a));
    if (auto root = exact_sqrt(discriminant)) {
        Rational const w = *root * half_width_scale;
        out.assignments.emplace_back(unknown, Expr::number(vertex - w));
        out.assignments.emplace_back(unknown, Expr::number(vertex + w));
        return out;
    }
    Expr const surd = Expr::sqrt(Expr::number(discriminant));
    for (int sign : {-1, 1}) {
        Expr root = Expr::add({
            Expr::number(vertex),
            Expr::mul({Expr::number(half_width_scale * sign), surd}),
        });
        out.assignments.emplace_back(unknown, simplify_expr(root));
    }
    return out;
}

} // namespace

EquationSystem
parse_system(std::string_view source)
{
    std::string const cleaned = strip_math_delimiters(source);
    std::string_view s = text::trim(cleaned);
    if (s.size() >= 5 && text::to_lower(s.substr(0, 5)) == "solve"
        && (s.size() == 5 || !std::isalnum(static_cast<unsigned char>(s[5]))))
    {
        s = text::trim(s.substr(5));
        if (s.starts_with(':')) {
            s = text::trim(s.substr(1));
        }
    }

    EquationSystem system;
    std::string_view equations_part = s;
    std::size_t const for_pos = find_for_clause(s);
    if (for_pos != std::string_view::npos) {
        equations_part = s.substr(0, for_pos);
        for (auto part : split_top_level(strip_outer_braces(s.substr(for_pos + 3)), ", ")) {
            std::string name(strip_outer_braces(part));
            bool const ident = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')
                && std::all_of(name.begin(), name.end(), [](unsigned char ch) { return std::isalnum(ch) || ch == '_'; });
            if (!ident) {
                throw Error(ErrorCode::ParseError, "'" + name + "' is not a variable name");
            }
            if (std::find(system.unknowns.begin(), system.unknowns.end(), name) == system.unknowns.end()) {
                system.unknowns.push_back(std::move(name));
            }
        }
    }
    for (auto part : split_top_level(strip_outer_braces(equations_part), ";,")) {
        system.equations.push_back(parse_equation(part));
    }
    if (system.equations.empty()) {
        throw Error(ErrorCode::ParseError, "no equations given");
    }

    std::set<std::string> mentioned;
    for (auto const & eq : system.equations) {
        mentioned.merge(free_symbols(eq.lhs));
        mentioned.merge(free_symbols(eq.rhs));
    }
    if (for_pos == std::string_view::npos) {
        system.unknowns.assign(mentioned.begin(), mentioned.end());
    }
    if (system.unknowns.empty()) {
        throw Error(ErrorCode::ParseError, "no unknowns given");
    }
    for (auto const & u : system.unknowns) {
        if (!mentioned.contains(u)) {
            throw Error(ErrorCode::ParseError, "unknown " + u + " does not appear in the equations");
        }
    }
    return system;
}

Solution
solve(EquationSystem const & system)
{
    if (system.unknowns.empty() || system.equations.empty()) {
        throw Error(ErrorCode::ParseError, "empty equation system");
    }
    std::set<std::string> const unknown_set(system.unknowns.begin(), system.unknowns.end());

    std::vector<Polynomial> polys;
    for (auto const & eq : system.equations) {
        polys.push_back(to_polynomial(Expr::add({eq.lhs, Expr::neg(eq.rhs)})));
        reject_hidden_unknowns(polys.back(), unknown_set);
    }

    std::vector<LinearForm> rows;
    bool linear = true;
    for (auto const & p : polys) {
        auto form = as_linear(p, system.unknowns);
        if (!form) {
            linear = false;
            break;
        }
        rows.push_back(std::move(*form));
    }
    if (linear) {
        return solve_linear(std::move(rows), system.unknowns);
    }
    if (polys.size() == 1 && system.unknowns.size() == 1) {
        return solve_quadratic(polys.front(), system.unknowns.front());
    }
    throw Error(ErrorCode::Unsupported, "nonlinear systems in several unknowns are not supported");
}

std::string
render(Solution const & solution)
{
    std::string out;
    std::string_view const sep = solution.kind == SolutionKind::Quadratic ? " or " : ", ";
    for (std::size_t i = 0; i < solution.assignments.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += solution.assignments[i].first + " = " + render(solution.assignments[i].second);
    }
    if (solution.kind == SolutionKind::Underdetermined) {
        out += " (infinitely many solutions; ";
        for (std::size_t i = 0; i < solution.free_unknowns.size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += solution.free_unknowns[i];
        }
        out += solution.free_unknowns.size() == 1 ? " is free)" : " are free)";
    }
    return out;
}

} // namespace chatcot::mathkit
