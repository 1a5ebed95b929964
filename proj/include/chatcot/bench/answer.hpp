#pragma once

#include <string>
#include <string_view>

namespace chatcot::bench {

struct EquivOptions
{
    /// Drop degree and percent signs before comparing.
    bool strip_units = true;
    /// Short-answer QA normalisation: case, articles and punctuation.
    bool qa = false;
};

/// Surface normalisation: \boxed and $ removed, \left/\right and spacing
/// commands dropped, \dfrac -> \frac, whitespace and trailing punctuation
/// removed.
std::string normalize_answer(std::string_view answer, EquivOptions const & options = {});

/// Lower-case, articles and punctuation removed, whitespace collapsed.
std::string normalize_qa(std::string_view answer);

/// True when the normalised strings match or both parse to expressions
/// whose difference simplifies to zero. Reflexive and symmetric.
bool answer_equiv(std::string_view a, std::string_view b, EquivOptions const & options = {});

} // namespace chatcot::bench
