#include "chatcot/error.hpp"

namespace chatcot {

std::string_view
to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::RoleOrderViolation: return "RoleOrderViolation";
    case ErrorCode::ConversationConcluded: return "ConversationConcluded";
    case ErrorCode::EmptyContent: return "EmptyContent";
    case ErrorCode::TurnIndexMismatch: return "TurnIndexMismatch";
    case ErrorCode::NoReasoningContent: return "NoReasoningContent";
    case ErrorCode::EmptyToolList: return "EmptyToolList";
    case ErrorCode::EmptyExemplarList: return "EmptyExemplarList";
    case ErrorCode::MalformedDialogue: return "MalformedDialogue";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::Unsolvable: return "Unsolvable";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::ProviderMismatch: return "ProviderMismatch";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::FeedbackExhausted: return "FeedbackExhausted";
    case ErrorCode::IndexExhausted: return "IndexExhausted";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::NoMatchingRule: return "NoMatchingRule";
    case ErrorCode::ContextTooLong: return "ContextTooLong";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::DuplicateTool: return "DuplicateTool";
    case ErrorCode::AnswerNotFound: return "AnswerNotFound";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::MissingBoxedAnswer: return "MissingBoxedAnswer";
    case ErrorCode::UnknownStrategy: return "UnknownStrategy";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

} // namespace chatcot
