#include "chatcot/mathkit/parser.hpp"

#include "chatcot/error.hpp"
#include "chatcot/text.hpp"

#include <cctype>
#include <utility>
#include <vector>

namespace chatcot::mathkit {

namespace {

enum class Tok {
    Number,
    Ident,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    Bar,
    Mod,
    Pmod,
    Frac,
    Sqrt,
    Abs,
    End,
};

struct Token
{
    Tok kind;
    std::size_t pos;
    std::string text;
    Rational number;
};

bool
is_digit(char c)
{
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
}

bool
is_alpha(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) != 0;
}

[[noreturn]] void
fail(std::string const & what, std::size_t pos)
{
    throw Error(ErrorCode::ParseError, what + " at position " + std::to_string(pos));
}

class Lexer
{
public:
    explicit Lexer(std::string_view src)
        : src_(src)
    {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        while (true) {
            skip_space();
            if (i_ >= src_.size()) {
                out.push_back(Token{Tok::End, i_, "end of input", {}});
                return out;
            }
            if (auto tok = next()) {
                out.push_back(std::move(*tok));
            }
        }
    }

private:
    void skip_space()
    {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) {
            ++i_;
        }
    }

    bool consume(std::string_view s)
    {
        if (src_.substr(i_).starts_with(s)) {
            i_ += s.size();
            return true;
        }
        return false;
    }

    Token number()
    {
        std::size_t const start = i_;
        while (i_ < src_.size() && is_digit(src_[i_])) {
            ++i_;
        }
        std::string digits(src_.substr(start, i_ - start));
        BigInt denominator = 1;
        if (i_ + 1 < src_.size() && src_[i_] == '.' && is_digit(src_[i_ + 1])) {
            ++i_;
            while (i_ < src_.size() && is_digit(src_[i_])) {
                digits += src_[i_];
                denominator *= 10;
                ++i_;
            }
        }
        // cpp_int reads a leading 0 as octal
        auto const nonzero = digits.find_first_not_of('0');
        digits = nonzero == std::string::npos ? "0" : digits.substr(nonzero);
        Rational value(BigInt(digits), denominator);
        // Scientific suffix only when digits follow, so "2e" stays 2*e.
        if (i_ < src_.size() && (src_[i_] == 'e' || src_[i_] == 'E')) {
            std::size_t j = i_ + 1;
            bool negative = false;
            if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) {
                negative = src_[j] == '-';
                ++j;
            }
            std::size_t const exp_start = j;
            while (j < src_.size() && is_digit(src_[j])) {
                ++j;
            }
            if (j > exp_start && j - exp_start <= 4) {
                auto const exponent = static_cast<unsigned>(std::stoul(std::string(src_.substr(exp_start, j - exp_start))));
                BigInt const scale = boost::multiprecision::pow(BigInt(10), exponent);
                value = negative ? value / Rational(scale) : value * Rational(scale);
                i_ = j;
            }
        }
        return Token{Tok::Number, start, std::string(src_.substr(start, i_ - start)), value};
    }

    std::optional<Token> next()
    {
        std::size_t const start = i_;
        char const c = src_[i_];
        if (is_digit(c) || (c == '.' && i_ + 1 < src_.size() && is_digit(src_[i_ + 1]))) {
            return number();
        }
        if (is_alpha(c) || c == '_') {
            while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
                ++i_;
            }
            std::string word(src_.substr(start, i_ - start));
            if (word == "mod") {
                return Token{Tok::Mod, start, word, {}};
            }
            if (word == "sqrt") {
                return Token{Tok::Sqrt, start, word, {}};
            }
            if (word == "abs") {
                return Token{Tok::Abs, start, word, {}};
            }
            return Token{Tok::Ident, start, word, {}};
        }
        if (c == '\\') {
            return command();
        }
        // Multi-byte UTF-8 operators.
        if (consume("\xC3\x97") || consume("\xC2\xB7") || consume("\xE2\x8B\x85")) {
            return Token{Tok::Star, start, "*", {}};
        }
        if (consume("\xC3\xB7")) {
            return Token{Tok::Slash, start, "/", {}};
        }
        if (consume("\xE2\x88\x92")) {
            return Token{Tok::Minus, start, "-", {}};
        }
        if (consume("**")) {
            return Token{Tok::Caret, start, "**", {}};
        }
        ++i_;
        switch (c) {
        case '+': return Token{Tok::Plus, start, "+", {}};
        case '-': return Token{Tok::Minus, start, "-", {}};
        case '*': return Token{Tok::Star, start, "*", {}};
        case '/': return Token{Tok::Slash, start, "/", {}};
        case '^': return Token{Tok::Caret, start, "^", {}};
        case '%': return Token{Tok::Mod, start, "%", {}};
        case '(':
        case '{': return Token{Tok::LParen, start, std::string(1, c), {}};
        case '[': return Token{Tok::LBracket, start, "[", {}};
        case ')':
        case '}':
        case ']': return Token{Tok::RParen, start, std::string(1, c), {}};
        case '|': return Token{Tok::Bar, start, "|", {}};
        default: break;
        }
        fail("unexpected character '" + std::string(1, c) + "'", start);
    }

    std::optional<Token> command()
    {
        std::size_t const start = i_;
        ++i_;
        std::size_t const name_start = i_;
        while (i_ < src_.size() && is_alpha(src_[i_])) {
            ++i_;
        }
        std::string const name(src_.substr(name_start, i_ - name_start));
        if (name.empty()) {
            // "\," "\;" "\!" and friends are spacing commands.
            if (i_ < src_.size() && (src_[i_] == ',' || src_[i_] == ';' || src_[i_] == '!' || src_[i_] == ' ')) {
                ++i_;
                return std::nullopt;
            }
            fail("stray backslash", start);
        }
        if (name == "cdot" || name == "times") {
            return Token{Tok::Star, start, "*", {}};
        }
        if (name == "div") {
            return Token{Tok::Slash, start, "/", {}};
        }
        if (name == "mod" || name == "bmod") {
            return Token{Tok::Mod, start, "mod", {}};
        }
        if (name == "pmod") {
            return Token{Tok::Pmod, start, "pmod", {}};
        }
        if (name == "frac" || name == "dfrac" || name == "tfrac") {
            return Token{Tok::Frac, start, "frac", {}};
        }
        if (name == "sqrt") {
            return Token{Tok::Sqrt, start, "sqrt", {}};
        }
        if (name == "left" || name == "right" || name == "displaystyle") {
            // \left| and \right| are absolute-value bars; other delimiters
            // are lexed normally on the next call.
            return std::nullopt;
        }
        return Token{Tok::Ident, start, name, {}};
    }

    std::string_view src_;
    std::size_t i_ = 0;
};

class Parser
{
public:
    explicit Parser(std::vector<Token> tokens)
        : toks_(std::move(tokens))
    {}

    Expr parse()
    {
        if (peek().kind == Tok::End) {
            fail("empty expression", 0);
        }
        Expr e = mod_expr();
        if (peek().kind != Tok::End) {
            fail("unexpected '" + peek().text + "'", peek().pos);
        }
        return e;
    }

private:
    Token const & peek() const { return toks_[k_]; }

    Token const & take() { return toks_[k_++]; }

    void expect(Tok kind, std::string_view what)
    {
        if (peek().kind != kind) {
            fail("expected " + std::string(what) + " but found '" + peek().text + "'", peek().pos);
        }
        ++k_;
    }

    Expr mod_expr()
    {
        Expr lhs = add_expr();
        while (true) {
            if (peek().kind == Tok::Mod) {
                take();
                lhs = Expr::mod(lhs, add_expr());
            } else if (peek().kind == Tok::Pmod) {
                // a \pmod{m}
                take();
                lhs = Expr::mod(lhs, primary());
            } else {
                return lhs;
            }
        }
    }

    Expr add_expr()
    {
        std::vector<Expr> terms{mul_expr()};
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            bool const minus = take().kind == Tok::Minus;
            Expr term = mul_expr();
            terms.push_back(minus ? Expr::neg(term) : term);
        }
        return Expr::add(std::move(terms));
    }

    static bool starts_implicit_factor(Tok kind)
    {
        return kind == Tok::Ident || kind == Tok::LParen || kind == Tok::LBracket
            || kind == Tok::Frac || kind == Tok::Sqrt || kind == Tok::Abs;
    }

    Expr mul_expr()
    {
        std::vector<Expr> factors{unary()};
        while (true) {
            Tok const kind = peek().kind;
            if (kind == Tok::Star) {
                take();
                factors.push_back(unary());
            } else if (kind == Tok::Slash) {
                take();
                factors.push_back(Expr::pow(unary(), Expr::integer(-1)));
            } else if (starts_implicit_factor(kind)) {
                factors.push_back(power());
            } else {
                return Expr::mul(std::move(factors));
            }
        }
    }

    Expr unary()
    {
        if (peek().kind == Tok::Minus) {
            take();
            return Expr::neg(unary());
        }
        if (peek().kind == Tok::Plus) {
            take();
            return unary();
        }
        return power();
    }

    Expr power()
    {
        Expr base = primary();
        if (peek().kind == Tok::Caret) {
            take();
            return Expr::pow(base, unary());
        }
        return base;
    }

    Expr group()
    {
        if (peek().kind != Tok::LParen && peek().kind != Tok::LBracket) {
            // \frac12 style: a single digit or letter argument.
            Token const & t = peek();
            if (t.kind == Tok::Number && !t.text.empty()) {
                Token tok = take();
                if (tok.text.size() > 1 && tok.text.find_first_not_of("0123456789") == std::string::npos) {
                    // split "12" into "1" and "2"
                    std::string rest = tok.text.substr(1);
                    toks_.insert(
                        toks_.begin() + static_cast<std::ptrdiff_t>(k_),
                        Token{Tok::Number, tok.pos + 1, rest, Rational(BigInt(rest))});
                    return Expr::integer(BigInt(tok.text.substr(0, 1)));
                }
                return Expr::number(tok.number);
            }
            return primary();
        }
        take();
        Expr inner = mod_expr();
        expect(Tok::RParen, "closing bracket");
        return inner;
    }

    Expr primary()
    {
        Token const tok = peek();
        switch (tok.kind) {
        case Tok::Number: take(); return Expr::number(tok.number);
        case Tok::Ident: take(); return Expr::symbol(tok.text);
        case Tok::LParen: {
            take();
            Expr inner = mod_expr();
            expect(Tok::RParen, "')'");
            return inner;
        }
        case Tok::Bar: {
            take();
            Expr inner = mod_expr();
            expect(Tok::Bar, "'|'");
            return Expr::abs(inner);
        }
        case Tok::Frac: {
            take();
            Expr num = group();
            Expr den = group();
            return Expr::mul({num, Expr::pow(den, Expr::integer(-1))});
        }
        case Tok::Sqrt: {
            take();
            if (peek().kind == Tok::LBracket) {
                // \sqrt[n]{x}
                take();
                Expr degree = mod_expr();
                expect(Tok::RParen, "']'");
                Expr radicand = group();
                return Expr::pow(radicand, Expr::pow(degree, Expr::integer(-1)));
            }
            return Expr::sqrt(group());
        }
        case Tok::Abs: take(); return Expr::abs(group());
        case Tok::LBracket: {
            take();
            Expr inner = mod_expr();
            expect(Tok::RParen, "']'");
            return inner;
        }
        case Tok::End: fail("unexpected end of input", tok.pos);
        default: fail("unexpected '" + tok.text + "'", tok.pos);
        }
    }

    std::vector<Token> toks_;
    std::size_t k_ = 0;
};

} // namespace

std::string
strip_math_delimiters(std::string_view source)
{
    std::string out;
    out.reserve(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
        char const c = source[i];
        if (c == '$') {
            continue;
        }
        if (c == '\\' && i + 1 < source.size()
            && (source[i + 1] == '(' || source[i + 1] == ')' || source[i + 1] == '[' || source[i + 1] == ']'))
        {
            ++i;
            continue;
        }
        out += c;
    }
    std::string_view view = text::trim(out);
    while (!view.empty() && (view.back() == '?' || view.back() == '=' || view.back() == '.')) {
        view.remove_suffix(1);
        view = text::trim(view);
    }
    return std::string(view);
}

Expr
parse_expr(std::string_view source)
{
    std::string const cleaned = strip_math_delimiters(source);
    Lexer lexer(cleaned);
    Parser parser(lexer.run());
    return parser.parse();
}

} // namespace chatcot::mathkit
