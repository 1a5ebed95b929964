#include "chatcot/text.hpp"

#include <algorithm>
#include <cctype>

namespace chatcot::text {

namespace {

bool
is_space(char c) noexcept
{
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool
is_alnum(char c) noexcept
{
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

std::optional<std::string>
last_braced_after(std::string_view s, std::string_view command)
{
    std::optional<std::string> found;
    std::size_t pos = 0;
    while ((pos = s.find(command, pos)) != std::string_view::npos) {
        std::size_t i = pos + command.size();
        while (i < s.size() && s[i] == ' ') {
            ++i;
        }
        if (i >= s.size() || s[i] != '{') {
            pos += command.size();
            continue;
        }
        int depth = 0;
        std::size_t const open = i;
        for (; i < s.size(); ++i) {
            if (s[i] == '{') {
                ++depth;
            } else if (s[i] == '}') {
                if (--depth == 0) {
                    break;
                }
            }
        }
        if (depth == 0 && i < s.size()) {
            found = std::string(s.substr(open + 1, i - open - 1));
        }
        pos = open;
    }
    return found;
}

} // namespace

std::string_view
trim(std::string_view s) noexcept
{
    while (!s.empty() && is_space(s.front())) {
        s.remove_prefix(1);
    }
    while (!s.empty() && is_space(s.back())) {
        s.remove_suffix(1);
    }
    return s;
}

std::string
to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

bool
contains_icase(std::string_view haystack, std::string_view needle)
{
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool
contains_word_icase(std::string_view haystack, std::string_view needle)
{
    auto const hay = to_lower(haystack);
    auto const pat = to_lower(needle);
    if (pat.empty()) {
        return false;
    }
    std::size_t pos = 0;
    while ((pos = hay.find(pat, pos)) != std::string::npos) {
        bool const left_ok = pos == 0 || !is_alnum(hay[pos - 1]);
        std::size_t const end = pos + pat.size();
        bool const right_ok = end == hay.size() || !is_alnum(hay[end]);
        if (left_ok && right_ok) {
            return true;
        }
        ++pos;
    }
    return false;
}

std::optional<std::string>
last_boxed(std::string_view s)
{
    // Pick whichever of \boxed / \fbox appears last.
    auto const boxed_pos = s.rfind("\\boxed");
    auto const fbox_pos = s.rfind("\\fbox");
    if (boxed_pos == std::string_view::npos && fbox_pos == std::string_view::npos) {
        return std::nullopt;
    }
    if (fbox_pos != std::string_view::npos
        && (boxed_pos == std::string_view::npos || fbox_pos > boxed_pos))
    {
        if (auto r = last_braced_after(s, "\\fbox")) {
            return r;
        }
    }
    return last_braced_after(s, "\\boxed");
}

bool
has_boxed(std::string_view s)
{
    return last_boxed(s).has_value();
}

std::size_t
whitespace_token_count(std::string_view s) noexcept
{
    std::size_t count = 0;
    bool in_token = false;
    for (char c : s) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

std::vector<std::string>
split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

} // namespace chatcot::text
