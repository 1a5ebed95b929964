#pragma once

#include "chatcot/conversation.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chatcot::bench {

struct ToolUse
{
    std::string tool;
    bool ok = false;

    friend bool operator==(ToolUse const &, ToolUse const &) = default;
};

/// One evaluated problem as persisted in the trace file.
struct RunTrace
{
    std::string problem_id;
    std::string category;
    DatasetKind dataset = DatasetKind::MathStyle;
    std::string gold;
    std::string strategy;
    /// Samples voted over; 1 for a plain run.
    std::size_t samples = 1;
    std::vector<ChatMessage> messages;
    std::size_t memory_len = 0;
    /// Empty when the run produced no answer.
    std::string answer;
    /// Whitespace tokens over all messages.
    std::size_t token_count = 0;
    std::vector<ToolUse> tool_calls;
    bool forced_conclusion = false;
    std::size_t generated_tokens = 0;
    std::vector<std::string> notes;

    friend bool operator==(RunTrace const &, RunTrace const &) = default;
};

nlohmann::json to_json(RunTrace const & trace);
/// Throws MalformedRecord.
RunTrace trace_from_json(nlohmann::json const & j);

void write_jsonl(std::ostream & out, RunTrace const & trace);
/// Throws Io or MalformedRecord (with the line number).
std::vector<RunTrace> read_traces(std::filesystem::path const & path);
std::vector<RunTrace> read_traces(std::istream & in);

/// answer_equiv against the gold answer; QA normalization for HotpotQA.
bool is_correct(RunTrace const & trace);

struct CategoryMetrics
{
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
};

struct Metrics
{
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    double avg_generated_tokens = 0.0;
    std::size_t tool_invocations = 0;
    std::size_t tool_successes = 0;
    /// Problems with at least one successful tool call.
    std::size_t problems_using_tools = 0;
    /// Absent when there are no problems.
    std::optional<double> tool_frequency;
    /// Absent when no tool was ever invoked.
    std::optional<double> tool_success;
    std::map<std::string, CategoryMetrics> per_category;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Pure function of the traces (gold answers travel with them).
Metrics compute_metrics(std::span<RunTrace const> traces);

/// Markdown table of mean generated tokens per strategy label, in order
/// of first appearance: "| CoT | 224.6 |".
std::string token_report(std::span<RunTrace const> traces);

/// "CoT", "ChatCoT + SC", ... for a trace.
std::string strategy_label(RunTrace const & trace);

/// Human-readable summary including the per-category table.
std::string format_metrics(Metrics const & m);

} // namespace chatcot::bench
