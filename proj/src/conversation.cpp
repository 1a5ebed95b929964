#include "chatcot/conversation.hpp"

#include "chatcot/error.hpp"

#include <array>
#include <utility>

namespace chatcot {

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 10> kPhaseNames{{
    {Phase::ToolKnowledge, "tool_knowledge"},
    {Phase::TaskKnowledge, "task_knowledge"},
    {Phase::FormatExemplar, "format_exemplar"},
    {Phase::ProblemStart, "problem_start"},
    {Phase::Reasoning, "reasoning"},
    {Phase::ToolSelection, "tool_selection"},
    {Phase::ToolArgs, "tool_args"},
    {Phase::ToolResult, "tool_result"},
    {Phase::Feedback, "feedback"},
    {Phase::Conclusion, "conclusion"},
}};

} // namespace

std::string_view
to_string(Role role) noexcept
{
    return role == Role::Agent ? "agent" : "model";
}

std::string_view
to_string(Phase phase) noexcept
{
    for (auto const & [p, name] : kPhaseNames) {
        if (p == phase) {
            return name;
        }
    }
    return "unknown";
}

Role
role_from_string(std::string_view text)
{
    if (text == "agent" || text == "user") {
        return Role::Agent;
    }
    if (text == "model" || text == "assistant") {
        return Role::Model;
    }
    throw Error(ErrorCode::MalformedRecord, "unknown role '" + std::string(text) + "'");
}

Phase
phase_from_string(std::string_view text)
{
    for (auto const & [p, name] : kPhaseNames) {
        if (name == text) {
            return p;
        }
    }
    throw Error(ErrorCode::MalformedRecord, "unknown phase '" + std::string(text) + "'");
}

std::string_view
to_string(DatasetKind kind) noexcept
{
    return kind == DatasetKind::MathStyle ? "math" : "hotpot";
}

DatasetKind
dataset_kind_from_string(std::string_view text)
{
    if (text == "math") {
        return DatasetKind::MathStyle;
    }
    if (text == "hotpot") {
        return DatasetKind::HotpotStyle;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown dataset kind '" + std::string(text) + "'");
}

Role
ConversationState::
next_role() const noexcept
{
    return messages_.size() % 2 == 0 ? Role::Agent : Role::Model;
}

void
ConversationState::
append(ChatMessage msg)
{
    if (concluded_) {
        throw Error(ErrorCode::ConversationConcluded, "conversation already concluded");
    }
    if (msg.content.empty()) {
        throw Error(ErrorCode::EmptyContent, "message content is empty");
    }
    if (msg.role != next_role()) {
        throw Error(
            ErrorCode::RoleOrderViolation,
            "expected " + std::string(to_string(next_role())) + " message at turn "
                + std::to_string(messages_.size()));
    }
    if (msg.turn_index != messages_.size()) {
        throw Error(
            ErrorCode::TurnIndexMismatch,
            "turn_index " + std::to_string(msg.turn_index) + " but conversation has "
                + std::to_string(messages_.size()) + " messages");
    }
    messages_.push_back(std::move(msg));
}

ChatMessage const &
ConversationState::
append(Role role, std::string content, Phase phase)
{
    append(ChatMessage{role, std::move(content), phase, messages_.size()});
    return messages_.back();
}

void
ConversationState::
seal_memory()
{
    memory_len_ = messages_.size();
}

std::span<ChatMessage const>
ConversationState::
memory_prefix() const noexcept
{
    return std::span<ChatMessage const>(messages_).first(memory_len_);
}

std::span<ChatMessage const>
ConversationState::
dialogue() const noexcept
{
    return std::span<ChatMessage const>(messages_).subspan(memory_len_);
}

std::string
to_paragraph(ConversationState const & state)
{
    std::string out;
    bool any = false;
    auto emit = [&](std::string_view segment) {
        if (any) {
            out += '\n';
        }
        out += segment;
        any = true;
    };

    for (auto const & msg : state.dialogue()) {
        if (msg.role == Role::Model
            && (msg.phase == Phase::Reasoning || msg.phase == Phase::Conclusion))
        {
            emit(msg.content);
        } else if (msg.role == Role::Agent && msg.phase == Phase::ToolResult) {
            std::string_view text = msg.content;
            // errors and exhaustion notices carry no result
            if (!text.starts_with(kResultsMarker)) {
                continue;
            }
            text.remove_prefix(kResultsMarker.size());
            if (text.ends_with(kContinueDirective)) {
                text.remove_suffix(kContinueDirective.size());
            }
            if (!text.empty()) {
                emit(text);
            }
        }
    }
    if (!any) {
        throw Error(ErrorCode::NoReasoningContent, "conversation has no reasoning content");
    }
    return out;
}

nlohmann::json
to_json(ChatMessage const & msg)
{
    return {
        {"role", to_string(msg.role)},
        {"phase", to_string(msg.phase)},
        {"content", msg.content},
    };
}

ChatMessage
message_from_json(nlohmann::json const & j, std::size_t turn_index)
{
    return ChatMessage{
        role_from_string(j.at("role").get<std::string>()),
        j.at("content").get<std::string>(),
        phase_from_string(j.at("phase").get<std::string>()),
        turn_index,
    };
}

nlohmann::json
messages_to_json(std::span<ChatMessage const> messages)
{
    auto out = nlohmann::json::array();
    for (auto const & msg : messages) {
        out.push_back(to_json(msg));
    }
    return out;
}

} // namespace chatcot
