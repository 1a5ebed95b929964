#include "chatcot/mathkit/tools.hpp"

#include "chatcot/mathkit/parser.hpp"
#include "chatcot/mathkit/simplify.hpp"

#include <exception>

namespace chatcot {

std::string
wire_format(ToolResult const & result)
{
    return (result.ok ? "Results: " : "Error: ") + result.content + ".";
}

} // namespace chatcot

namespace chatcot::mathkit {

namespace {

template <typename F>
ToolResult
guarded(F && body)
{
    try {
        return body();
    } catch (Error const & e) {
        return ToolResult::failure(e.code(), e.what());
    } catch (std::exception const & e) {
        // boost::multiprecision reports overflow and similar as std exceptions
        return ToolResult::failure(ErrorCode::Unsupported, e.what());
    }
}

} // namespace

ToolResult
simplify(Expr const & e)
{
    return guarded([&] { return ToolResult::success(render(simplify_expr(e))); });
}

ToolResult
eval_expr(Expr const & e)
{
    return guarded([&] {
        if (auto value = evaluate_constant(e)) {
            return ToolResult::success(render(*value));
        }
        return ToolResult::success(render(simplify_expr(e)));
    });
}

ToolResult
solve_system(EquationSystem const & system)
{
    return guarded([&] { return ToolResult::success(render(solve(system))); });
}

ToolResult
calculator(std::string_view argument)
{
    return guarded([&] {
        std::string const cleaned = strip_math_delimiters(argument);
        if (cleaned.find('=') != std::string::npos) {
            return ToolResult::failure(
                ErrorCode::Unsupported,
                "the calculator takes an expression, not an equation; use the Equation Solver for equations");
        }
        return eval_expr(parse_expr(cleaned));
    });
}

ToolResult
equation_solver(std::string_view argument)
{
    return guarded([&] { return solve_system(parse_system(argument)); });
}

} // namespace chatcot::mathkit
