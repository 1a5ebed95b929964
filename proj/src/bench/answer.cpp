#include "chatcot/bench/answer.hpp"

#include "chatcot/error.hpp"
#include "chatcot/mathkit/parser.hpp"
#include "chatcot/mathkit/simplify.hpp"
#include "chatcot/text.hpp"

#include <array>
#include <cctype>

namespace chatcot::bench {

namespace {

void
erase_all(std::string & s, std::string_view what)
{
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos)) {
        s.erase(pos, what.size());
    }
}

void
replace_all(std::string & s, std::string_view what, std::string_view with)
{
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + with.size())) {
        s.replace(pos, what.size(), with);
    }
}

/// \text{abc} -> abc
void
unwrap_command(std::string & s, std::string_view command)
{
    std::string const open = std::string(command) + "{";
    for (auto pos = s.find(open); pos != std::string::npos; pos = s.find(open, pos)) {
        std::size_t depth = 1;
        std::size_t i = pos + open.size();
        for (; i < s.size() && depth > 0; ++i) {
            if (s[i] == '{') {
                ++depth;
            } else if (s[i] == '}') {
                --depth;
            }
        }
        if (depth != 0) {
            return;
        }
        s.erase(i - 1, 1);
        s.erase(pos, open.size());
    }
}

/// Words would otherwise parse as products of single-letter symbols, so
/// "abc" would equal "cba".
bool
has_bare_word(std::string const & s)
{
    std::size_t run = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto const c = static_cast<unsigned char>(s[i]);
        if (c == '\\') {
            while (i + 1 < s.size() && std::isalpha(static_cast<unsigned char>(s[i + 1]))) {
                ++i;
            }
            run = 0;
            continue;
        }
        run = std::isalpha(c) ? run + 1 : 0;
        if (run >= 2) {
            return true;
        }
    }
    return false;
}

bool
math_equal(std::string const & a, std::string const & b)
{
    if (has_bare_word(a) || has_bare_word(b)) {
        return false;
    }
    try {
        auto const x = mathkit::parse_expr(a);
        auto const y = mathkit::parse_expr(b);
        return mathkit::to_polynomial(mathkit::Expr::add({x, mathkit::Expr::neg(y)})).is_zero();
    } catch (Error const &) {
        return false;
    }
}

} // namespace

std::string
normalize_answer(std::string_view answer, EquivOptions const & options)
{
    std::string s(text::trim(answer));
    if (auto boxed = text::last_boxed(s)) {
        s = *boxed;
    }
    unwrap_command(s, "\\text");
    unwrap_command(s, "\\textbf");
    unwrap_command(s, "\\mbox");
    unwrap_command(s, "\\mathrm");
    for (auto const * cmd : {"\\left", "\\right", "\\displaystyle", "\\!", "\\,", "\\;", "\\:", "\\ ", "$"}) {
        erase_all(s, cmd);
    }
    replace_all(s, "\\dfrac", "\\frac");
    replace_all(s, "\\tfrac", "\\frac");
    if (options.strip_units) {
        for (auto const * unit : {"^{\\circ}", "^\\circ", "\\circ", "\xC2\xB0", "\\%", "%"}) {
            erase_all(s, unit);
        }
    }
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            out += c;
        }
    }
    while (!out.empty() && (out.back() == '.' || out.back() == ',' || out.back() == ';')) {
        out.pop_back();
    }
    return out;
}

std::string
normalize_qa(std::string_view answer)
{
    std::string s(text::trim(answer));
    if (auto boxed = text::last_boxed(s)) {
        s = *boxed;
    }
    unwrap_command(s, "\\text");
    std::string cleaned;
    for (char c : s) {
        auto const u = static_cast<unsigned char>(c);
        if (std::ispunct(u)) {
            continue;
        }
        if (std::isspace(u)) {
            cleaned += ' ';
            continue;
        }
        cleaned += static_cast<char>(std::tolower(u));
    }
    std::string out;
    for (auto const & word : text::split(cleaned, ' ')) {
        auto const w = text::trim(word);
        if (w.empty() || w == "a" || w == "an" || w == "the") {
            continue;
        }
        if (!out.empty()) {
            out += ' ';
        }
        out += w;
    }
    return out;
}

bool
answer_equiv(std::string_view a, std::string_view b, EquivOptions const & options)
{
    if (options.qa) {
        return normalize_qa(a) == normalize_qa(b);
    }
    auto const x = normalize_answer(a, options);
    auto const y = normalize_answer(b, options);
    if (x == y) {
        return true;
    }
    if (x.empty() || y.empty()) {
        return false;
    }
    return math_equal(x, y);
}

} // namespace chatcot::bench
