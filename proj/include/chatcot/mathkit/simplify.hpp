#pragma once

#include "chatcot/mathkit/expr.hpp"

#include <map>
#include <string>
#include <vector>

namespace chatcot::mathkit {

/// A product of atoms raised to integer powers. Atoms are symbols or
/// irreducible sub-expressions (surds, symbolic mod/abs, inverses of sums),
/// identified by their canonical rendering.
using Monomial = std::vector<std::pair<std::string, long>>;

/// Sum of rational multiples of monomials, with the atom table needed to
/// turn it back into an expression.
class Polynomial
{
public:
    Polynomial() = default;
    static Polynomial constant(Rational value);
    static Polynomial atom(std::string key, Expr base);

    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }
    [[nodiscard]] bool is_constant() const noexcept;
    /// Constant term (zero when absent).
    [[nodiscard]] Rational constant_term() const;
    [[nodiscard]] std::map<Monomial, Rational> const & terms() const noexcept { return terms_; }
    [[nodiscard]] Expr const & atom_base(std::string const & key) const;

    Polynomial & operator+=(Polynomial const & other);
    Polynomial & operator*=(Rational const & factor);
    friend Polynomial operator+(Polynomial a, Polynomial const & b) { return a += b; }
    friend Polynomial operator*(Polynomial const & a, Polynomial const & b);
    friend Polynomial operator*(Polynomial a, Rational const & k) { return a *= k; }

    /// Coefficient-wise equality (atom tables are implied by the keys).
    friend bool operator==(Polynomial const & a, Polynomial const & b) { return a.terms_ == b.terms_; }

    /// Canonical expression: terms ordered lexicographically by atom with
    /// higher degrees first, constant last.
    [[nodiscard]] Expr to_expr() const;

    void add_term(Monomial monomial, Rational coefficient);
    void merge_atoms(Polynomial const & other);

private:
    std::map<Monomial, Rational> terms_;
    std::map<std::string, Expr> atoms_;
    // radicand for numeric surd atoms "sqrt(n)", used to reduce powers
    std::map<std::string, BigInt> surds_;

    friend Polynomial to_polynomial(Expr const & e);
    friend Polynomial surd(Rational const & value);
};

/// Expands e into polynomial form. Throws DivisionByZero or Unsupported.
Polynomial to_polynomial(Expr const & e);

/// Canonical simplified expression; simplify_expr(simplify_expr(e)) == simplify_expr(e).
Expr simplify_expr(Expr const & e);

} // namespace chatcot::mathkit
