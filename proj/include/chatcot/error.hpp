#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chatcot {

enum class ErrorCode {
    // conversation
    RoleOrderViolation,
    ConversationConcluded,
    EmptyContent,
    TurnIndexMismatch,
    NoReasoningContent,
    // knowledge memory
    EmptyToolList,
    EmptyExemplarList,
    MalformedDialogue,
    InvalidConfig,
    // mathkit
    ParseError,
    DivisionByZero,
    Unsupported,
    Unsolvable,
    // retrieval
    EmptyText,
    ProviderUnavailable,
    ProviderMismatch,
    DimMismatch,
    ZeroVector,
    EmptyIndex,
    DuplicateId,
    FeedbackExhausted,
    IndexExhausted,
    // llm gateway
    TransportError,
    NoMatchingRule,
    ContextTooLong,
    InvalidRequest,
    // engine
    UnknownTool,
    DuplicateTool,
    AnswerNotFound,
    // harness
    MalformedRecord,
    MissingBoxedAnswer,
    UnknownStrategy,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type thrown by every module. The code identifies the failure
/// class; what() carries a human-readable diagnostic.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, std::string const & message)
        : std::runtime_error(message)
        , code_(code)
    {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace chatcot
