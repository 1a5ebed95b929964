#pragma once

#include "chatcot/conversation.hpp"
#include "chatcot/engine.hpp"
#include "chatcot/llm.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace chatcot::ensemble {

using Equivalence = std::function<bool(std::string_view, std::string_view)>;

bool exact_match(std::string_view a, std::string_view b);

/// answer_equiv from the harness, math-aware.
bool math_match(std::string_view a, std::string_view b);

struct VoteClass
{
    /// First member seen.
    std::string representative;
    std::size_t score = 0;
    std::size_t first_index = 0;
};

struct VoteTally
{
    std::vector<std::string> answers;
    /// In order of first occurrence.
    std::vector<VoteClass> classes;
    std::string winner;
    std::size_t winner_score = 0;
};

/// Groups answers into classes under equiv; the largest class wins and
/// ties go to the class seen first. Throws InvalidRequest on no answers.
VoteTally self_consistency(std::vector<std::string> const & answers, Equivalence const & equiv = exact_match);

inline constexpr std::size_t kDefaultSamples = 5;
inline constexpr double kDefaultSampleTemperature = 0.7;

struct ScOptions
{
    std::size_t k = kDefaultSamples;
    double temperature = kDefaultSampleTemperature;
    Equivalence equiv = math_match;
};

struct ScResult
{
    std::string answer;
    VoteTally tally;
    std::vector<engine::RunResult> runs;
    std::size_t k_requested = 0;
    /// Runs that produced an answer and took part in the vote.
    std::size_t k_effective = 0;
    std::vector<std::string> failures;

    [[nodiscard]] nlohmann::json report() const;
};

/// k runs with sample_seed 0..k-1 at the given temperature. Failed runs
/// and empty answers are left out of the vote; throws AnswerNotFound when
/// nothing is left.
ScResult run_sc(
    engine::EngineConfig base,
    engine::ToolRegistry const & registry,
    llm::Backend const & backend,
    ProblemRecord const & problem,
    ConversationState const & memory,
    ScOptions const & options = {});

inline constexpr std::string_view kRefinePrompt =
    "The solution above might some mistake, you should check the solution and get the final answer.";

struct RefineResult
{
    std::string answer;
    bool changed = false;
    std::vector<ChatMessage> exchange;
    std::size_t generated_tokens = 0;
};

/// Shows the model its own flattened solution, asks it to check it, and
/// takes the boxed answer of the reply; keeps original_answer when the
/// reply has none. Throws NoReasoningContent.
RefineResult refine_pass(
    ConversationState const & trace,
    std::string const & original_answer,
    llm::Backend const & backend,
    double temperature = 0.0);

} // namespace chatcot::ensemble
