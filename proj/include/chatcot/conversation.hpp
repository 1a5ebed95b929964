#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chatcot {

/// Agent is the rule-based side of the dialogue (sent to the chat model as
/// "user"); Model is the chat model itself ("assistant").
enum class Role { Agent, Model };

enum class Phase {
    ToolKnowledge,
    TaskKnowledge,
    FormatExemplar,
    ProblemStart,
    Reasoning,
    ToolSelection,
    ToolArgs,
    ToolResult,
    Feedback,
    Conclusion,
};

std::string_view to_string(Role role) noexcept;
std::string_view to_string(Phase phase) noexcept;
Role role_from_string(std::string_view text);
Phase phase_from_string(std::string_view text);

struct ChatMessage
{
    Role role = Role::Agent;
    std::string content;
    Phase phase = Phase::Reasoning;
    std::size_t turn_index = 0;

    friend bool operator==(ChatMessage const &, ChatMessage const &) = default;
};

enum class DatasetKind { MathStyle, HotpotStyle };

std::string_view to_string(DatasetKind kind) noexcept;
DatasetKind dataset_kind_from_string(std::string_view text);

/// A candidate evidence paragraph attached to a multi-hop QA question.
struct Paragraph
{
    std::string title;
    std::string text;
};

struct ProblemRecord
{
    std::string id;
    std::string statement;
    std::optional<std::string> solution;
    std::optional<std::string> answer;
    std::string category;
    DatasetKind dataset = DatasetKind::MathStyle;
    std::vector<Paragraph> paragraphs;
};

/// Ordered dialogue history with an immutable knowledge-memory prefix.
///
/// Roles strictly alternate Agent, Model, Agent, ... starting at index 0.
/// The first memory_len() messages are frozen by seal_memory() and can
/// never change afterwards; once concluded, no further appends are accepted.
class ConversationState
{
public:
    ConversationState() = default;
    explicit ConversationState(std::size_t max_turns)
        : max_turns_(max_turns)
    {}

    /// Appends msg after validating content, role order and turn index.
    void append(ChatMessage msg);

    /// Convenience form: fills in turn_index automatically.
    ChatMessage const & append(Role role, std::string content, Phase phase);

    /// Marks every message appended so far as knowledge memory.
    void seal_memory();

    void conclude() noexcept { concluded_ = true; }

    [[nodiscard]] std::vector<ChatMessage> const & messages() const noexcept { return messages_; }
    [[nodiscard]] std::size_t size() const noexcept { return messages_.size(); }
    [[nodiscard]] bool empty() const noexcept { return messages_.empty(); }
    [[nodiscard]] ChatMessage const & back() const { return messages_.back(); }
    [[nodiscard]] std::size_t memory_len() const noexcept { return memory_len_; }
    [[nodiscard]] std::size_t max_turns() const noexcept { return max_turns_; }
    [[nodiscard]] bool concluded() const noexcept { return concluded_; }

    /// The role the next appended message must have.
    [[nodiscard]] Role next_role() const noexcept;

    /// Returns the first memory_len() messages.
    [[nodiscard]] std::span<ChatMessage const> memory_prefix() const noexcept;

    /// Messages after the knowledge-memory prefix.
    [[nodiscard]] std::span<ChatMessage const> dialogue() const noexcept;

    void set_max_turns(std::size_t max_turns) noexcept { max_turns_ = max_turns; }

    std::string problem_id;
    std::string problem_statement;

    friend bool operator==(ConversationState const &, ConversationState const &) = default;

private:
    std::vector<ChatMessage> messages_;
    std::size_t memory_len_ = 0;
    std::size_t max_turns_ = 12;
    bool concluded_ = false;
};

inline constexpr std::string_view kResultsMarker = "Results: ";
inline constexpr std::string_view kContinueDirective = "\nContinue reasoning";

/// Flattens a dialogue into a reasoning paragraph: Model Reasoning and
/// Conclusion messages plus successful tool results, in turn order, joined
/// by '\n'. Tool results lose the "Results: " marker and the trailing
/// "Continue reasoning" directive. Throws NoReasoningContent when nothing
/// qualifies.
std::string to_paragraph(ConversationState const & state);

// JSON forms used by the trace files.
nlohmann::json to_json(ChatMessage const & msg);
ChatMessage message_from_json(nlohmann::json const & j, std::size_t turn_index);
nlohmann::json messages_to_json(std::span<ChatMessage const> messages);

} // namespace chatcot
