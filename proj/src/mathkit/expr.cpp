#include "chatcot/mathkit/expr.hpp"

#include "chatcot/error.hpp"

namespace chatcot::mathkit {

namespace mp = boost::multiprecision;

struct Expr::Node
{
    ExprKind kind;
    Rational value;
    std::string name;
    std::vector<Expr> args;
};

namespace {

// Results above this many bits are refused instead of computed.
constexpr unsigned kMaxResultBits = 1U << 18;

int
precedence(Expr const & e)
{
    switch (e.kind()) {
    case ExprKind::Mod: return 1;
    case ExprKind::Add: return 2;
    case ExprKind::Mul: return 3;
    case ExprKind::Rational: return 3;
    case ExprKind::Neg: return 4;
    case ExprKind::Integer: return e.value() < 0 ? 4 : 6;
    case ExprKind::Pow: return 5;
    default: return 6;
    }
}

bool
is_negative_leaf(Expr const & e)
{
    return e.kind() == ExprKind::Neg || (e.is_number() && e.value() < 0);
}

std::string
wrap_if(bool cond, std::string s)
{
    return cond ? "(" + s + ")" : s;
}

std::size_t
bit_length(BigInt const & n)
{
    return n == 0 ? 0 : mp::msb(mp::abs(n)) + 1;
}

} // namespace

Expr
Expr::integer(BigInt value)
{
    return Expr(std::make_shared<Node const>(Node{ExprKind::Integer, Rational(value), {}, {}}));
}

Expr
Expr::number(Rational value)
{
    if (mp::denominator(value) == 1) {
        return integer(mp::numerator(value));
    }
    return Expr(std::make_shared<Node const>(Node{ExprKind::Rational, std::move(value), {}, {}}));
}

Expr
Expr::symbol(std::string name)
{
    return Expr(std::make_shared<Node const>(Node{ExprKind::Symbol, {}, std::move(name), {}}));
}

Expr
Expr::add(std::vector<Expr> terms)
{
    if (terms.empty()) {
        return integer(0);
    }
    if (terms.size() == 1) {
        return terms.front();
    }
    return Expr(std::make_shared<Node const>(Node{ExprKind::Add, {}, {}, std::move(terms)}));
}

Expr
Expr::mul(std::vector<Expr> factors)
{
    if (factors.empty()) {
        return integer(1);
    }
    if (factors.size() == 1) {
        return factors.front();
    }
    return Expr(std::make_shared<Node const>(Node{ExprKind::Mul, {}, {}, std::move(factors)}));
}

Expr
Expr::pow(Expr base, Expr exponent)
{
    return Expr(std::make_shared<Node const>(
        Node{ExprKind::Pow, {}, {}, {std::move(base), std::move(exponent)}}));
}

Expr
Expr::mod(Expr value, Expr modulus)
{
    if (modulus.is_number() && modulus.value() == 0) {
        throw Error(ErrorCode::DivisionByZero, "modulus is zero");
    }
    return Expr(std::make_shared<Node const>(
        Node{ExprKind::Mod, {}, {}, {std::move(value), std::move(modulus)}}));
}

Expr
Expr::neg(Expr operand)
{
    return Expr(std::make_shared<Node const>(Node{ExprKind::Neg, {}, {}, {std::move(operand)}}));
}

Expr
Expr::sqrt(Expr operand)
{
    return Expr(std::make_shared<Node const>(Node{ExprKind::Sqrt, {}, {}, {std::move(operand)}}));
}

Expr
Expr::abs(Expr operand)
{
    return Expr(std::make_shared<Node const>(Node{ExprKind::Abs, {}, {}, {std::move(operand)}}));
}

ExprKind
Expr::kind() const noexcept
{
    return node_->kind;
}

bool
Expr::is_number() const noexcept
{
    return node_->kind == ExprKind::Integer || node_->kind == ExprKind::Rational;
}

Rational const &
Expr::value() const
{
    return node_->value;
}

std::string const &
Expr::name() const
{
    return node_->name;
}

std::vector<Expr> const &
Expr::args() const
{
    return node_->args;
}

bool
operator==(Expr const & a, Expr const & b)
{
    if (a.node_ == b.node_) {
        return true;
    }
    return a.node_->kind == b.node_->kind && a.node_->value == b.node_->value
        && a.node_->name == b.node_->name && a.node_->args == b.node_->args;
}

std::string
render(Rational const & r)
{
    if (mp::denominator(r) == 1) {
        return mp::numerator(r).str();
    }
    return mp::numerator(r).str() + "/" + mp::denominator(r).str();
}

std::string
to_debug_string(Expr const & e)
{
    auto with_args = [&e](std::string_view head) {
        std::string out(head);
        out += '(';
        for (std::size_t i = 0; i < e.args().size(); ++i) {
            if (i > 0) {
                out += ", ";
            }
            out += to_debug_string(e.args()[i]);
        }
        out += ')';
        return out;
    };
    switch (e.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational: return render(e.value());
    case ExprKind::Symbol: return e.name();
    case ExprKind::Add: return with_args("Add");
    case ExprKind::Mul: return with_args("Mul");
    case ExprKind::Pow: return with_args("Pow");
    case ExprKind::Mod: return with_args("Mod");
    case ExprKind::Neg: return with_args("Neg");
    case ExprKind::Sqrt: return with_args("Sqrt");
    case ExprKind::Abs: return with_args("Abs");
    }
    return {};
}

std::string
render(Expr const & e)
{
    auto const & args = e.args();
    switch (e.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational: return render(e.value());
    case ExprKind::Symbol: return e.name();
    case ExprKind::Add: {
        std::string out;
        for (std::size_t i = 0; i < args.size(); ++i) {
            auto const & term = args[i];
            if (i > 0 && term.kind() == ExprKind::Neg) {
                auto const & inner = term.args()[0];
                out += " - " + wrap_if(precedence(inner) <= 2 || is_negative_leaf(inner), render(inner));
            } else if (i > 0 && term.is_number() && term.value() < 0) {
                out += " - " + render(Rational(-term.value()));
            } else {
                if (i > 0) {
                    out += " + ";
                }
                out += wrap_if(precedence(term) <= 2, render(term));
            }
        }
        return out;
    }
    case ExprKind::Mul: {
        std::string out;
        for (std::size_t i = 0; i < args.size(); ++i) {
            auto const & factor = args[i];
            bool const parens = precedence(factor) < 3 || factor.kind() == ExprKind::Mul
                || (i > 0 && is_negative_leaf(factor));
            if (i > 0) {
                out += '*';
            }
            out += wrap_if(parens, render(factor));
        }
        return out;
    }
    case ExprKind::Pow: {
        auto const & base = args[0];
        auto const & exponent = args[1];
        bool const plain_exponent = exponent.kind() == ExprKind::Symbol
            || (exponent.kind() == ExprKind::Integer && exponent.value() >= 0);
        return wrap_if(precedence(base) < 6, render(base)) + "^"
            + wrap_if(!plain_exponent, render(exponent));
    }
    case ExprKind::Mod:
        return render(args[0]) + " mod " + wrap_if(precedence(args[1]) <= 1, render(args[1]));
    case ExprKind::Neg:
        return "-" + wrap_if(precedence(args[0]) <= 2, render(args[0]));
    case ExprKind::Sqrt: return "sqrt(" + render(args[0]) + ")";
    case ExprKind::Abs: return "abs(" + render(args[0]) + ")";
    }
    return {};
}

std::set<std::string>
free_symbols(Expr const & e)
{
    std::set<std::string> out;
    if (e.kind() == ExprKind::Symbol) {
        out.insert(e.name());
    }
    for (auto const & arg : e.args()) {
        out.merge(free_symbols(arg));
    }
    return out;
}

Expr
substitute(Expr const & e, std::map<std::string, Rational> const & values)
{
    switch (e.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational: return e;
    case ExprKind::Symbol: {
        auto it = values.find(e.name());
        return it == values.end() ? e : Expr::number(it->second);
    }
    default: break;
    }
    std::vector<Expr> args;
    args.reserve(e.args().size());
    for (auto const & arg : e.args()) {
        args.push_back(substitute(arg, values));
    }
    switch (e.kind()) {
    case ExprKind::Add: return Expr::add(std::move(args));
    case ExprKind::Mul: return Expr::mul(std::move(args));
    case ExprKind::Pow: return Expr::pow(args[0], args[1]);
    case ExprKind::Mod: return Expr::mod(args[0], args[1]);
    case ExprKind::Neg: return Expr::neg(args[0]);
    case ExprKind::Sqrt: return Expr::sqrt(args[0]);
    case ExprKind::Abs: return Expr::abs(args[0]);
    default: return e;
    }
}

BigInt
isqrt(BigInt const & n)
{
    if (n < 0) {
        throw Error(ErrorCode::Unsupported, "square root of a negative number");
    }
    return mp::sqrt(n);
}

std::optional<BigInt>
exact_root(BigInt const & n, unsigned degree)
{
    if (degree == 0) {
        return std::nullopt;
    }
    if (degree == 1) {
        return n;
    }
    bool const negative = n < 0;
    if (negative && degree % 2 == 0) {
        return std::nullopt;
    }
    BigInt const m = mp::abs(n);
    if (degree == 2) {
        BigInt r = isqrt(m);
        return r * r == m ? std::optional<BigInt>(r) : std::nullopt;
    }
    // Binary search on [0, 2^(bits/degree + 1)].
    BigInt lo = 0;
    BigInt hi = BigInt(1) << static_cast<unsigned>(bit_length(m) / degree + 1);
    while (lo < hi) {
        BigInt mid = (lo + hi + 1) / 2;
        if (mp::pow(mid, degree) <= m) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    if (mp::pow(lo, degree) != m) {
        return std::nullopt;
    }
    return negative ? BigInt(-lo) : lo;
}

std::optional<Rational>
exact_sqrt(Rational const & r)
{
    if (r < 0) {
        throw Error(ErrorCode::Unsupported, "square root of a negative number");
    }
    auto num = exact_root(mp::numerator(r), 2);
    auto den = exact_root(mp::denominator(r), 2);
    if (!num || !den) {
        return std::nullopt;
    }
    return Rational(*num, *den);
}

Rational
checked_pow(Rational const & base, BigInt const & exponent)
{
    if (base == 0) {
        if (exponent < 0) {
            throw Error(ErrorCode::DivisionByZero, "zero raised to a negative power");
        }
        return exponent == 0 ? Rational(1) : Rational(0);
    }
    if (base == 1) {
        return base;
    }
    if (base == -1) {
        return mp::bit_test(mp::abs(exponent), 0) ? base : Rational(1);
    }
    BigInt const magnitude = mp::abs(exponent);
    std::size_t const base_bits =
        std::max(bit_length(mp::numerator(base)), bit_length(mp::denominator(base)));
    if (magnitude > kMaxResultBits || base_bits * magnitude.convert_to<std::size_t>() > kMaxResultBits) {
        throw Error(ErrorCode::Unsupported, "power is too large to compute exactly");
    }
    auto const e = magnitude.convert_to<unsigned>();
    Rational result(mp::pow(mp::numerator(base), e), mp::pow(mp::denominator(base), e));
    return exponent < 0 ? Rational(1) / result : result;
}

std::optional<Rational>
evaluate_constant(Expr const & e)
{
    auto const & args = e.args();
    switch (e.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational: return e.value();
    case ExprKind::Symbol: return std::nullopt;
    case ExprKind::Add: {
        Rational sum = 0;
        bool known = true;
        for (auto const & arg : args) {
            auto v = evaluate_constant(arg);
            if (v) {
                sum += *v;
            } else {
                known = false;
            }
        }
        return known ? std::optional<Rational>(sum) : std::nullopt;
    }
    case ExprKind::Mul: {
        Rational product = 1;
        bool known = true;
        for (auto const & arg : args) {
            auto v = evaluate_constant(arg);
            if (v) {
                product *= *v;
            } else {
                known = false;
            }
        }
        return known ? std::optional<Rational>(product) : std::nullopt;
    }
    case ExprKind::Neg: {
        auto v = evaluate_constant(args[0]);
        return v ? std::optional<Rational>(-*v) : std::nullopt;
    }
    case ExprKind::Abs: {
        auto v = evaluate_constant(args[0]);
        return v ? std::optional<Rational>(mp::abs(*v)) : std::nullopt;
    }
    case ExprKind::Sqrt: {
        auto v = evaluate_constant(args[0]);
        return v ? exact_sqrt(*v) : std::nullopt;
    }
    case ExprKind::Mod: {
        auto a = evaluate_constant(args[0]);
        auto m = evaluate_constant(args[1]);
        if (m && *m == 0) {
            throw Error(ErrorCode::DivisionByZero, "modulus is zero");
        }
        if (!a || !m) {
            return std::nullopt;
        }
        if (mp::denominator(*a) != 1 || mp::denominator(*m) != 1) {
            throw Error(ErrorCode::Unsupported, "mod is defined for integers only");
        }
        BigInt const modulus = mp::abs(mp::numerator(*m));
        BigInt r = mp::numerator(*a) % modulus;
        if (r < 0) {
            r += modulus;
        }
        return Rational(r);
    }
    case ExprKind::Pow: {
        auto b = evaluate_constant(args[0]);
        auto x = evaluate_constant(args[1]);
        if (!b || !x) {
            return std::nullopt;
        }
        if (mp::denominator(*x) == 1) {
            return checked_pow(*b, mp::numerator(*x));
        }
        BigInt const den = mp::denominator(*x);
        if (den > 64) {
            return std::nullopt;
        }
        auto const degree = den.convert_to<unsigned>();
        if (*b < 0 && degree % 2 == 0) {
            throw Error(ErrorCode::Unsupported, "even root of a negative number");
        }
        auto num_root = exact_root(mp::numerator(*b), degree);
        auto den_root = exact_root(mp::denominator(*b), degree);
        if (!num_root || !den_root) {
            return std::nullopt;
        }
        return checked_pow(Rational(*num_root, *den_root), mp::numerator(*x));
    }
    }
    return std::nullopt;
}

} // namespace chatcot::mathkit
