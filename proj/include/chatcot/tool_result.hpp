#pragma once

#include "chatcot/error.hpp"

#include <optional>
#include <string>

namespace chatcot {

/// Outcome of one tool invocation. Failures are data, not exceptions: the
/// engine feeds them back into the conversation.
struct ToolResult
{
    bool ok = false;
    std::string content;
    std::optional<ErrorCode> error_kind;

    static ToolResult success(std::string content) { return {true, std::move(content), std::nullopt}; }

    static ToolResult failure(ErrorCode kind, std::string diagnostic)
    {
        return {false, std::move(diagnostic), kind};
    }

    friend bool operator==(ToolResult const &, ToolResult const &) = default;
};

/// "Results: {content}." or "Error: {diagnostic}."
std::string wire_format(ToolResult const & result);

} // namespace chatcot
