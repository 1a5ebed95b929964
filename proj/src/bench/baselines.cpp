#include "chatcot/bench/baselines.hpp"

#include "chatcot/error.hpp"
#include "chatcot/text.hpp"

#include <array>
#include <regex>

namespace chatcot::bench {

namespace {

struct StrategyName
{
    Strategy strategy;
    std::string_view id;
    std::string_view label;
};

constexpr std::array<StrategyName, 4> kStrategies{{
    {Strategy::ChatCoT, "chatcot", "ChatCoT"},
    {Strategy::CoT, "cot", "CoT"},
    {Strategy::CoTwTool, "cot-tool", "CoT w/ Tool"},
    {Strategy::CoTwRetri, "cot-retri", "CoT w/ Retri"},
}};

} // namespace

std::string_view
to_string(Strategy strategy) noexcept
{
    for (auto const & s : kStrategies) {
        if (s.strategy == strategy) {
            return s.id;
        }
    }
    return "?";
}

std::string_view
display_name(Strategy strategy) noexcept
{
    for (auto const & s : kStrategies) {
        if (s.strategy == strategy) {
            return s.label;
        }
    }
    return "?";
}

Strategy
strategy_from_string(std::string_view text)
{
    for (auto const & s : kStrategies) {
        if (s.id == text) {
            return s.strategy;
        }
    }
    throw Error(ErrorCode::UnknownStrategy, "unknown strategy: " + std::string(text));
}

std::string
exemplar_block(memory::Exemplar const & exemplar)
{
    return "Problem: " + exemplar.statement + "\nSolution: " + exemplar.solution;
}

std::string
tool_preamble(std::vector<memory::ToolSpec> const & tools)
{
    std::string out = "You can use the following tools:\n";
    for (auto const & t : tools) {
        out += "- " + t.name + ": can help you " + t.functionality + "\n";
    }
    out += "To use a tool, write <<tool name: input>>. The marker will be replaced by the tool's output.";
    return out;
}

std::vector<ChatMessage>
build_baseline_prompt(
    Strategy strategy,
    ProblemRecord const & problem,
    std::vector<memory::Exemplar> const & exemplars,
    std::vector<memory::ToolSpec> const & tools,
    std::string_view evidence)
{
    if (strategy == Strategy::ChatCoT) {
        throw Error(ErrorCode::UnknownStrategy, "chatcot is not a single-prompt baseline");
    }
    std::vector<std::string> blocks;
    if (strategy == Strategy::CoTwTool) {
        if (tools.empty()) {
            throw Error(ErrorCode::EmptyToolList, "cot-tool needs at least one tool");
        }
        blocks.push_back(tool_preamble(tools));
    }
    for (auto const & e : exemplars) {
        blocks.push_back(exemplar_block(e));
    }
    std::string last = "Problem: " + problem.statement + "\n";
    if (!evidence.empty()) {
        last += "Evidence: " + std::string(evidence) + "\n";
    }
    last += kStepByStep;
    blocks.push_back(std::move(last));

    std::string content;
    for (auto const & b : blocks) {
        if (!content.empty()) {
            content += "\n\n";
        }
        content += b;
    }
    return {ChatMessage{Role::Agent, std::move(content), Phase::ProblemStart, 0}};
}

Substitution
substitute_tool_calls(std::string_view generation, engine::ToolRegistry const & registry)
{
    static std::regex const marker(R"(<<([^:<>]+):([^<>]*)>>)");
    Substitution out;
    std::string const src(generation);
    auto it = std::sregex_iterator(src.begin(), src.end(), marker);
    std::size_t copied = 0;
    for (; it != std::sregex_iterator(); ++it) {
        auto const & m = *it;
        out.text.append(src, copied, static_cast<std::size_t>(m.position()) - copied);
        copied = static_cast<std::size_t>(m.position() + m.length());

        std::string const name(text::trim(m[1].str()));
        std::string const argument(text::trim(m[2].str()));
        auto const * tool = registry.find(name);
        ToolResult result;
        if (tool == nullptr || !tool->executor) {
            result = ToolResult::failure(ErrorCode::UnknownTool, "unknown tool " + name);
        } else {
            result = tool->executor(argument);
        }
        out.calls.push_back({name, argument, result.ok});
        out.text += result.ok ? result.content : wire_format(result);
    }
    out.text.append(src, copied);
    return out;
}

engine::RunResult
run_baseline(
    Strategy strategy,
    std::vector<ChatMessage> const & prompt,
    llm::Backend const & backend,
    engine::ToolRegistry const & registry,
    BaselineConfig const & cfg)
{
    llm::ModelRequest req;
    req.messages = prompt;
    req.phase = Phase::Reasoning;
    req.temperature = cfg.temperature;
    req.max_new_tokens = cfg.max_new_tokens;
    req.sample_seed = cfg.sample_seed;
    auto const response = backend.complete(req);

    engine::RunResult result;
    result.generated_tokens = response.generated_tokens;
    result.model_turns = 1;
    std::string reply = response.completions.front();
    if (strategy == Strategy::CoTwTool) {
        auto sub = substitute_tool_calls(reply, registry);
        reply = std::move(sub.text);
        result.tool_calls = std::move(sub.calls);
    }
    for (auto const & m : prompt) {
        result.trace.append(m.role, m.content, m.phase);
    }
    if (text::trim(reply).empty()) {
        result.notes.emplace_back("EmptyReply");
    } else {
        result.trace.append(Role::Model, reply, Phase::Reasoning);
    }
    result.trace.conclude();
    if (auto answer = engine::extract_answer(reply)) {
        result.answer = std::move(*answer);
        result.answer_found = true;
    } else {
        result.notes.emplace_back("AnswerNotFound");
    }
    return result;
}

} // namespace chatcot::bench
