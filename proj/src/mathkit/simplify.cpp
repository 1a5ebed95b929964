#include "chatcot/mathkit/simplify.hpp"

#include "chatcot/error.hpp"

#include <algorithm>

namespace chatcot::mathkit {

namespace mp = boost::multiprecision;

namespace {

constexpr std::size_t kMaxTerms = 20000;
constexpr long kMaxExpansionPower = 64;
constexpr long kMaxMonomialExponent = 1000000;
constexpr unsigned kTrialDivisionLimit = 10000;

Monomial
merge(Monomial const & a, Monomial const & b)
{
    Monomial out;
    out.reserve(a.size() + b.size());
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
            out.push_back(*ia++);
        } else if (ia == a.end() || ib->first < ia->first) {
            out.push_back(*ib++);
        } else {
            long const e = ia->second + ib->second;
            if (e != 0) {
                out.emplace_back(ia->first, e);
            }
            ++ia;
            ++ib;
        }
    }
    return out;
}

// Lexicographic by atom key, larger exponent first; the constant term
// sorts after every term with a positive leading exponent.
bool
display_before(Monomial const & a, Monomial const & b)
{
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        std::string const * key;
        long ea = 0;
        long eb = 0;
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
            key = &ia->first;
            ea = ia->second;
        } else if (ia == a.end() || ib->first < ia->first) {
            key = &ib->first;
            eb = ib->second;
        } else {
            key = &ia->first;
            ea = ia->second;
            eb = ib->second;
        }
        if (ea != eb) {
            return ea > eb;
        }
        if (ia != a.end() && ia->first == *key) {
            ++ia;
        }
        if (ib != b.end() && ib->first == *key) {
            ++ib;
        }
    }
    return false;
}

/// Splits n >= 0 into square * free with free having no small square factor.
std::pair<BigInt, BigInt>
square_part(BigInt n)
{
    BigInt root = 1;
    BigInt rest = 1;
    for (unsigned p = 2; p <= kTrialDivisionLimit && BigInt(p) * p <= n; ++p) {
        unsigned count = 0;
        while (n % p == 0) {
            n /= p;
            ++count;
        }
        if (count > 0) {
            root *= mp::pow(BigInt(p), count / 2);
            if (count % 2 == 1) {
                rest *= p;
            }
        }
    }
    BigInt const r = isqrt(n);
    if (r * r == n) {
        root *= r;
    } else {
        rest *= n;
    }
    return {root, rest};
}

Polynomial
power_of(Polynomial const & base, long n)
{
    // n >= 0 here
    Polynomial result = Polynomial::constant(1);
    Polynomial square = base;
    while (n > 0) {
        if (n & 1) {
            result = result * square;
        }
        n >>= 1;
        if (n > 0) {
            square = square * square;
        }
    }
    return result;
}

Rational
require_constant(Polynomial const & p, char const * what)
{
    if (!p.is_constant()) {
        throw Error(ErrorCode::Unsupported, what);
    }
    return p.constant_term();
}

} // namespace

Polynomial
Polynomial::constant(Rational value)
{
    Polynomial p;
    p.add_term({}, std::move(value));
    return p;
}

Polynomial
Polynomial::atom(std::string key, Expr base)
{
    Polynomial p;
    p.atoms_.emplace(key, std::move(base));
    p.add_term({{std::move(key), 1}}, Rational(1));
    return p;
}

bool
Polynomial::is_constant() const noexcept
{
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Rational
Polynomial::constant_term() const
{
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? Rational(0) : it->second;
}

Expr const &
Polynomial::atom_base(std::string const & key) const
{
    return atoms_.at(key);
}

void
Polynomial::merge_atoms(Polynomial const & other)
{
    for (auto const & [key, base] : other.atoms_) {
        atoms_.emplace(key, base);
    }
    for (auto const & [key, radicand] : other.surds_) {
        surds_.emplace(key, radicand);
    }
}

void
Polynomial::add_term(Monomial monomial, Rational coefficient)
{
    if (coefficient == 0) {
        return;
    }
    // sqrt(n)^e = n^floor(e/2) * sqrt(n)^(e mod 2)
    for (auto it = monomial.begin(); it != monomial.end();) {
        auto surd = surds_.find(it->first);
        if (surd != surds_.end()) {
            long const e = it->second;
            long const half = e >= 0 ? e / 2 : -((-e + 1) / 2);
            long const rem = e - 2 * half;
            if (half != 0) {
                coefficient *= checked_pow(Rational(surd->second), BigInt(half));
            }
            if (rem == 0) {
                it = monomial.erase(it);
                continue;
            }
            it->second = rem;
        }
        ++it;
    }
    auto [slot, inserted] = terms_.try_emplace(std::move(monomial), coefficient);
    if (!inserted) {
        slot->second += coefficient;
        if (slot->second == 0) {
            terms_.erase(slot);
        }
    }
    if (terms_.size() > kMaxTerms) {
        throw Error(ErrorCode::Unsupported, "expression expands to too many terms");
    }
}

Polynomial &
Polynomial::operator+=(Polynomial const & other)
{
    merge_atoms(other);
    for (auto const & [mono, coef] : other.terms_) {
        add_term(mono, coef);
    }
    return *this;
}

Polynomial &
Polynomial::operator*=(Rational const & factor)
{
    if (factor == 0) {
        terms_.clear();
        return *this;
    }
    for (auto & [mono, coef] : terms_) {
        coef *= factor;
    }
    return *this;
}

Polynomial
operator*(Polynomial const & a, Polynomial const & b)
{
    Polynomial out;
    out.merge_atoms(a);
    out.merge_atoms(b);
    if (a.terms_.size() * b.terms_.size() > kMaxTerms) {
        throw Error(ErrorCode::Unsupported, "expression expands to too many terms");
    }
    for (auto const & [ma, ca] : a.terms_) {
        for (auto const & [mb, cb] : b.terms_) {
            out.add_term(merge(ma, mb), ca * cb);
        }
    }
    return out;
}

Expr
Polynomial::to_expr() const
{
    std::vector<std::pair<Monomial const *, Rational const *>> ordered;
    ordered.reserve(terms_.size());
    for (auto const & [mono, coef] : terms_) {
        ordered.emplace_back(&mono, &coef);
    }
    std::sort(ordered.begin(), ordered.end(), [](auto const & x, auto const & y) {
        return display_before(*x.first, *y.first);
    });

    std::vector<Expr> summands;
    for (auto const & [mono, coef] : ordered) {
        if (mono->empty()) {
            summands.push_back(Expr::number(*coef));
            continue;
        }
        std::vector<Expr> factors;
        Rational const magnitude = mp::abs(*coef);
        if (magnitude != 1) {
            factors.push_back(Expr::number(magnitude));
        }
        for (auto const & [key, exponent] : *mono) {
            Expr const & base = atoms_.at(key);
            factors.push_back(exponent == 1 ? base : Expr::pow(base, Expr::integer(exponent)));
        }
        Expr term = Expr::mul(std::move(factors));
        summands.push_back(*coef < 0 ? Expr::neg(term) : term);
    }
    // Lead with a positive term when there is one: "10 - 2*e", not "-2*e + 10".
    auto const negative = [](Expr const & t) {
        return t.kind() == ExprKind::Neg || (t.is_number() && t.value() < 0);
    };
    if (!summands.empty() && negative(summands.front())) {
        auto it = std::find_if_not(summands.begin(), summands.end(), negative);
        if (it != summands.end()) {
            std::rotate(summands.begin(), it, it + 1);
        }
    }
    return Expr::add(std::move(summands));
}

Polynomial
surd(Rational const & value)
{
    if (value < 0) {
        throw Error(ErrorCode::Unsupported, "square root of a negative number");
    }
    BigInt const den = mp::denominator(value);
    auto const [root, rest] = square_part(mp::numerator(value) * den);
    Rational const coefficient(root, den);
    if (rest == 1) {
        return Polynomial::constant(coefficient);
    }
    Expr base = Expr::sqrt(Expr::integer(rest));
    std::string key = render(base);
    Polynomial p;
    p.atoms_.emplace(key, base);
    p.surds_.emplace(key, rest);
    p.add_term({{key, 1}}, coefficient);
    return p;
}

Polynomial
to_polynomial(Expr const & e)
{
    auto const & args = e.args();
    switch (e.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational: return Polynomial::constant(e.value());
    case ExprKind::Symbol: return Polynomial::atom(e.name(), e);
    case ExprKind::Add: {
        Polynomial sum;
        for (auto const & arg : args) {
            sum += to_polynomial(arg);
        }
        return sum;
    }
    case ExprKind::Mul: {
        Polynomial product = Polynomial::constant(1);
        for (auto const & arg : args) {
            product = product * to_polynomial(arg);
        }
        return product;
    }
    case ExprKind::Neg: return to_polynomial(args[0]) * Rational(-1);
    case ExprKind::Pow: {
        Rational const exponent =
            require_constant(to_polynomial(args[1]), "symbolic exponents are not supported");
        Polynomial const base = to_polynomial(args[0]);
        if (mp::denominator(exponent) != 1) {
            if (base.is_constant()) {
                if (auto exact = evaluate_constant(Expr::pow(Expr::number(base.constant_term()), Expr::number(exponent)))) {
                    return Polynomial::constant(*exact);
                }
                if (mp::denominator(exponent) == 2) {
                    Polynomial const root = surd(base.constant_term());
                    BigInt const n = mp::numerator(exponent);
                    if (mp::abs(n) > kMaxExpansionPower) {
                        throw Error(ErrorCode::Unsupported, "power is too large to expand");
                    }
                    long const k = n.convert_to<long>();
                    if (k >= 0) {
                        return power_of(root, k);
                    }
                    // root is a single term c*sqrt(m); invert it term-wise
                    auto const & [mono, coef] = *root.terms().begin();
                    Polynomial inv;
                    inv.merge_atoms(root);
                    Monomial m = mono;
                    for (auto & [key, exp] : m) {
                        exp = -exp;
                    }
                    inv.add_term(m, Rational(1) / coef);
                    return power_of(inv, -k);
                }
            }
            throw Error(ErrorCode::Unsupported, "fractional powers are only supported for square roots of numbers");
        }
        BigInt const n = mp::numerator(exponent);
        if (base.is_constant()) {
            return Polynomial::constant(checked_pow(base.constant_term(), n));
        }
        if (mp::abs(n) > kMaxMonomialExponent) {
            throw Error(ErrorCode::Unsupported, "exponent is too large");
        }
        long const k = n.convert_to<long>();
        if (base.terms().size() == 1) {
            auto const & [mono, coef] = *base.terms().begin();
            Polynomial out;
            out.merge_atoms(base);
            Monomial m = mono;
            for (auto & [key, exp] : m) {
                exp *= k;
            }
            out.add_term(std::move(m), checked_pow(coef, n));
            return out;
        }
        if (k >= 0) {
            if (k > kMaxExpansionPower) {
                throw Error(ErrorCode::Unsupported, "power is too large to expand");
            }
            return power_of(base, k);
        }
        Expr canonical = base.to_expr();
        std::string key = render(canonical);
        Polynomial out;
        out.merge_atoms(base);
        out.atoms_.emplace(key, canonical);
        out.add_term({{key, k}}, Rational(1));
        return out;
    }
    case ExprKind::Sqrt: {
        Polynomial const inner = to_polynomial(args[0]);
        if (inner.is_constant()) {
            return surd(inner.constant_term());
        }
        Expr base = Expr::sqrt(inner.to_expr());
        Polynomial out = Polynomial::atom(render(base), base);
        out.merge_atoms(inner);
        return out;
    }
    case ExprKind::Abs: {
        Polynomial const inner = to_polynomial(args[0]);
        if (inner.is_constant()) {
            return Polynomial::constant(mp::abs(inner.constant_term()));
        }
        Expr base = Expr::abs(inner.to_expr());
        Polynomial out = Polynomial::atom(render(base), base);
        out.merge_atoms(inner);
        return out;
    }
    case ExprKind::Mod: {
        Polynomial const value = to_polynomial(args[0]);
        Polynomial const modulus = to_polynomial(args[1]);
        if (modulus.is_zero()) {
            throw Error(ErrorCode::DivisionByZero, "modulus is zero");
        }
        if (value.is_constant() && modulus.is_constant()) {
            auto r = evaluate_constant(
                Expr::mod(Expr::number(value.constant_term()), Expr::number(modulus.constant_term())));
            return Polynomial::constant(*r);
        }
        Expr base = Expr::mod(value.to_expr(), modulus.to_expr());
        Polynomial out = Polynomial::atom(render(base), base);
        out.merge_atoms(value);
        out.merge_atoms(modulus);
        return out;
    }
    }
    throw Error(ErrorCode::Unsupported, "unsupported expression");
}

Expr
simplify_expr(Expr const & e)
{
    return to_polynomial(e).to_expr();
}

} // namespace chatcot::mathkit
