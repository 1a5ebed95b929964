#pragma once

#include "chatcot/conversation.hpp"
#include "chatcot/engine.hpp"
#include "chatcot/llm.hpp"
#include "chatcot/memory.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace chatcot::bench {

enum class Strategy { ChatCoT, CoT, CoTwTool, CoTwRetri };

/// "chatcot", "cot", "cot-tool", "cot-retri".
std::string_view to_string(Strategy strategy) noexcept;
/// Table label: "ChatCoT", "CoT", "CoT w/ Tool", "CoT w/ Retri".
std::string_view display_name(Strategy strategy) noexcept;
/// Throws UnknownStrategy.
Strategy strategy_from_string(std::string_view text);

inline constexpr std::size_t kMathShots = 5;
inline constexpr std::size_t kHotpotShots = 4;
inline constexpr std::size_t kEvidenceParagraphs = 3;
inline constexpr std::string_view kStepByStep = "Let's think step by step.";

/// "Problem: {Q}\nSolution: {S}"
std::string exemplar_block(memory::Exemplar const & exemplar);

/// Tool list and marker syntax shown before a CoT w/ Tool prompt.
std::string tool_preamble(std::vector<memory::ToolSpec> const & tools);

/// One user message: exemplar blocks, then the problem (with evidence
/// paragraphs when given) and the step-by-step trigger. CoT w/ Tool puts
/// the tool preamble first. Throws UnknownStrategy for ChatCoT.
std::vector<ChatMessage> build_baseline_prompt(
    Strategy strategy,
    ProblemRecord const & problem,
    std::vector<memory::Exemplar> const & exemplars,
    std::vector<memory::ToolSpec> const & tools = {},
    std::string_view evidence = {});

struct Substitution
{
    std::string text;
    std::vector<engine::ToolCall> calls;
};

/// Replaces every "<<Tool: argument>>" marker in a finished generation by
/// the tool's output (or its error line). Tools run in marker order.
Substitution substitute_tool_calls(std::string_view generation, engine::ToolRegistry const & registry);

struct BaselineConfig
{
    double temperature = 0.0;
    std::size_t max_new_tokens = 512;
    std::uint64_t sample_seed = 0;
};

/// Single-pass generation for a baseline prompt; the trace holds the
/// prompt and the (substituted) reply.
engine::RunResult run_baseline(
    Strategy strategy,
    std::vector<ChatMessage> const & prompt,
    llm::Backend const & backend,
    engine::ToolRegistry const & registry,
    BaselineConfig const & cfg = {});

} // namespace chatcot::bench
