#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace chatcot::mathkit {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class ExprKind { Integer, Rational, Symbol, Add, Mul, Pow, Mod, Neg, Sqrt, Abs };

/// Immutable expression tree with shared nodes.
///
/// Factory functions keep the invariants: Rational values are reduced with
/// a positive denominator (and stored as Integer when whole), Add/Mul hold
/// at least two operands, and a literal zero modulus is rejected.
class Expr
{
public:
    static Expr integer(BigInt value);
    static Expr number(Rational value);
    static Expr symbol(std::string name);
    static Expr add(std::vector<Expr> terms);
    static Expr mul(std::vector<Expr> factors);
    static Expr pow(Expr base, Expr exponent);
    static Expr mod(Expr value, Expr modulus);
    static Expr neg(Expr operand);
    static Expr sqrt(Expr operand);
    static Expr abs(Expr operand);

    [[nodiscard]] ExprKind kind() const noexcept;
    [[nodiscard]] bool is_number() const noexcept;
    /// Numeric payload; only meaningful when is_number().
    [[nodiscard]] Rational const & value() const;
    [[nodiscard]] std::string const & name() const;
    [[nodiscard]] std::vector<Expr> const & args() const;

    friend bool operator==(Expr const & a, Expr const & b);

private:
    struct Node;
    explicit Expr(std::shared_ptr<Node const> node)
        : node_(std::move(node))
    {}

    std::shared_ptr<Node const> node_;
};

/// Structural form, e.g. "Add(2, Mul(3, 4))".
std::string to_debug_string(Expr const & e);

/// Infix form that parse_expr reads back to an equal value.
std::string render(Expr const & e);

/// "5", "-3/2".
std::string render(Rational const & r);

std::set<std::string> free_symbols(Expr const & e);

Expr substitute(Expr const & e, std::map<std::string, Rational> const & values);

/// Exact value of a symbol-free expression. Returns nullopt when the
/// expression has free symbols or an irrational value (e.g. sqrt(2)).
/// Throws DivisionByZero or Unsupported.
std::optional<Rational> evaluate_constant(Expr const & e);

// Integer helpers shared with the simplifier.
BigInt isqrt(BigInt const & n);
std::optional<BigInt> exact_root(BigInt const & n, unsigned degree);
std::optional<Rational> exact_sqrt(Rational const & r);

/// Checked integer power; Unsupported when the result would be huge.
Rational checked_pow(Rational const & base, BigInt const & exponent);

} // namespace chatcot::mathkit
