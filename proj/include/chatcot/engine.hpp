#pragma once

#include "chatcot/conversation.hpp"
#include "chatcot/llm.hpp"
#include "chatcot/memory.hpp"
#include "chatcot/retrieval.hpp"
#include "chatcot/tool_result.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chatcot::engine {

inline constexpr std::string_view kStartPrompt =
    "You should solve the problem step by step and you should follow the react in the history ";
inline constexpr std::string_view kSelectionPrompt = "To solve this sub-problem, which tool can we use?";
inline constexpr std::string_view kNoToolPhrase = "do not use tool";
inline constexpr std::string_view kContinuePrompt = "Continue reasoning";
inline constexpr std::string_view kForcePrompt = "Base on the context, what is the answer?";
inline constexpr std::string_view kFeedbackQuestion = "Are these results useful? Answer Yes or No.";
inline constexpr std::string_view kFeedbackExhausted = "No more results available. Continue reasoning with what you have.";
inline constexpr std::string_view kToolErrorSuffix = " Please give a new input or choose another tool.";

using Executor = std::function<ToolResult(std::string_view argument)>;

struct RegisteredTool
{
    memory::ToolSpec spec;
    /// Empty for the retriever, which the engine drives itself.
    Executor executor;
    bool retriever = false;
};

class ToolRegistry
{
public:
    /// Throws DuplicateTool.
    void add(memory::ToolSpec spec, Executor executor);
    void add_retriever(memory::ToolSpec spec);

    [[nodiscard]] RegisteredTool const * find(std::string_view name) const noexcept;
    [[nodiscard]] std::vector<RegisteredTool> const & tools() const noexcept { return tools_; }
    [[nodiscard]] std::vector<memory::ToolSpec> specs() const;
    [[nodiscard]] bool empty() const noexcept { return tools_.empty(); }

    /// First tool, in registration order, whose name occurs in reply
    /// (case-insensitive).
    [[nodiscard]] RegisteredTool const * match(std::string_view reply) const;

private:
    std::vector<RegisteredTool> tools_;
};

/// Binds "Calculator", "Equation Solver" and "Retriever" specs to their
/// implementations. Throws UnknownTool for any other name.
ToolRegistry standard_registry(std::vector<memory::ToolSpec> const & specs);

struct EngineConfig
{
    std::size_t max_turns = 12;
    std::size_t max_feedback = retrieval::kMaxFeedbackRounds;
    /// Paragraphs shown per retriever batch.
    std::size_t retrieval_k = 1;
    double temperature = 0.0;
    std::size_t max_new_tokens = 512;
    bool conclude_counts_as_turn = false;
    std::uint64_t sample_seed = 0;

    /// Throws InvalidConfig.
    void validate() const;
};

enum class OutcomeKind { Reasoned, ToolUsed, NoTool, Concluded };

struct StepOutcome
{
    OutcomeKind kind = OutcomeKind::Reasoned;
    std::string tool;
    std::optional<ToolResult> tool_result;
};

struct ToolCall
{
    std::string tool;
    std::string argument;
    bool ok = false;
};

/// Mutable state of one conversation while the engine drives it.
struct RunContext
{
    ProblemRecord problem;
    ConversationState state;
    std::vector<ToolCall> tool_calls;
    std::size_t generated_tokens = 0;
    /// Model completions counted against max_turns.
    std::size_t model_turns = 0;
    bool forced_conclusion = false;
    std::optional<std::string> answer;
    std::vector<std::string> notes;
    std::shared_ptr<retrieval::DocIndex const> paragraphs;
};

struct RunResult
{
    /// Empty when no answer could be extracted.
    std::string answer;
    bool answer_found = false;
    ConversationState trace;
    std::vector<ToolCall> tool_calls;
    bool forced_conclusion = false;
    std::size_t generated_tokens = 0;
    std::size_t model_turns = 0;
    std::vector<std::string> notes;
};

/// Last \boxed{...} content; otherwise the text after the last "answer is".
std::optional<std::string> extract_answer(std::string_view text);

std::string tool_result_message(ToolResult const & result);

class ReasoningEngine
{
public:
    /// provider embeds paragraphs for the retriever; a HashEmbedder is used
    /// when none is given.
    ReasoningEngine(
        EngineConfig config,
        ToolRegistry const & registry,
        llm::Backend const & backend,
        std::shared_ptr<retrieval::EmbeddingProvider const> provider = nullptr);

    [[nodiscard]] RunContext begin(ProblemRecord const & problem, ConversationState memory) const;

    void start(RunContext & ctx) const;

    /// Asks for the next reasoning step.
    std::string const & reason(RunContext & ctx) const;

    StepOutcome tool_selection(RunContext & ctx) const;

    /// Asks for arguments, runs the tool and appends the result message.
    /// Returns nullopt when the run ended while waiting for the arguments.
    std::optional<ToolResult> formulate_and_execute(RunContext & ctx, std::string const & tool_name) const;

    /// One yes/no exchange about the batch on screen. Returns the final
    /// result when the loop is over, nullopt when another batch was shown.
    std::optional<ToolResult>
    feedback_round(RunContext & ctx, retrieval::RetrievalSession & session, std::string & batch) const;

    /// Drives the full loop: start, then reasoning and tool steps until a
    /// boxed answer or the turn budget.
    [[nodiscard]] RunResult run(ProblemRecord const & problem, ConversationState memory) const;

    [[nodiscard]] EngineConfig const & config() const noexcept { return config_; }
    [[nodiscard]] ToolRegistry const & registry() const noexcept { return *registry_; }

private:
    std::string const & ask(RunContext & ctx, Phase phase) const;
    void force_conclude(RunContext & ctx) const;
    [[nodiscard]] bool budget_spent(RunContext const & ctx) const noexcept;
    std::optional<ToolResult> run_retriever(RunContext & ctx, RegisteredTool const & tool) const;
    void record(RunContext & ctx, std::string const & tool, std::string const & argument, ToolResult const & result) const;

    EngineConfig config_;
    ToolRegistry const * registry_;
    llm::Backend const * backend_;
    std::shared_ptr<retrieval::EmbeddingProvider const> provider_;
};

} // namespace chatcot::engine
