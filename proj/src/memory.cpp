#include "chatcot/memory.hpp"

#include "chatcot/error.hpp"
#include "chatcot/text.hpp"

#include <fstream>

namespace chatcot::memory {

namespace {

constexpr std::string_view kToolIntro =
    "You can use tool to help you solve the problem and I give you the instruction of tools usage. ";
constexpr std::string_view kToolOutro = "Do you understand?";
constexpr std::string_view kToolAck =
    "Yes, I understand. I will use tool to help me solve the problem.";

constexpr std::string_view kTaskIntro = "I give you some example. ";
constexpr std::string_view kTaskOutro =
    "You can use the knowledge and thoery in these problem. Do you understand?";
constexpr std::string_view kTaskOutroFixed =
    "You can use the knowledge and theory in these problem. Do you understand?";
constexpr std::string_view kTaskAck =
    "Yes, I understand. I will solve the problem step by step and use tool to help me.";

constexpr std::string_view kFormatSuffix =
    " Let's think step by step and use knowledge in similar problem to solve this problem.";

nlohmann::json
read_json_file(std::filesystem::path const & path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (nlohmann::json::exception const & e) {
        throw Error(ErrorCode::MalformedRecord, path.string() + ": " + e.what());
    }
}

} // namespace

MemoryConfig
math_defaults()
{
    return MemoryConfig{.n_retrieval = 2, .n_annotated = 3};
}

MemoryConfig
hotpot_defaults()
{
    return MemoryConfig{.n_retrieval = 2, .n_annotated = 2};
}

MessagePair
build_tool_knowledge(std::vector<ToolSpec> const & tools)
{
    if (tools.empty()) {
        throw Error(ErrorCode::EmptyToolList, "tool knowledge needs at least one tool");
    }
    std::string prompt(kToolIntro);
    for (auto const & tool : tools) {
        if (tool.functionality.empty()) {
            throw Error(ErrorCode::InvalidConfig, "tool '" + tool.name + "' has no functionality text");
        }
        prompt += tool.name + " can help you " + tool.functionality + " ";
    }
    prompt += kToolOutro;
    return {
        ChatMessage{Role::Agent, std::move(prompt), Phase::ToolKnowledge, 0},
        ChatMessage{Role::Model, std::string(kToolAck), Phase::ToolKnowledge, 1},
    };
}

MessagePair
build_task_knowledge(std::vector<Exemplar> const & exemplars, bool fix_typo)
{
    if (exemplars.empty()) {
        throw Error(ErrorCode::EmptyExemplarList, "task knowledge needs at least one exemplar");
    }
    std::string prompt(kTaskIntro);
    for (auto const & ex : exemplars) {
        prompt += "Problem: " + ex.statement + " Solution: " + ex.solution + " ";
    }
    prompt += fix_typo ? kTaskOutroFixed : kTaskOutro;
    return {
        ChatMessage{Role::Agent, std::move(prompt), Phase::TaskKnowledge, 0},
        ChatMessage{Role::Model, std::string(kTaskAck), Phase::TaskKnowledge, 1},
    };
}

std::string
format_problem_utterance(std::string_view statement)
{
    std::string out = "Problem: ";
    out += statement;
    out += kFormatSuffix;
    return out;
}

void
validate(AnnotatedDialogue const & dialogue)
{
    if (dialogue.statement.empty()) {
        throw Error(ErrorCode::MalformedDialogue, "annotated dialogue has an empty statement");
    }
    if (dialogue.turns.size() < 2) {
        throw Error(ErrorCode::MalformedDialogue, "annotated dialogue needs at least two turns");
    }
    for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
        Role const expected = i % 2 == 0 ? Role::Agent : Role::Model;
        if (dialogue.turns[i].role != expected) {
            throw Error(
                ErrorCode::MalformedDialogue,
                "annotated dialogue breaks role alternation at turn " + std::to_string(i));
        }
        if (i > 0 && dialogue.turns[i].content.empty()) {
            throw Error(
                ErrorCode::MalformedDialogue,
                "annotated dialogue has empty turn " + std::to_string(i));
        }
    }
    if (!text::has_boxed(dialogue.turns.back().content)) {
        throw Error(ErrorCode::MalformedDialogue, "annotated dialogue ends without a boxed answer");
    }
}

std::vector<ChatMessage>
build_format_exemplars(std::vector<AnnotatedDialogue> const & dialogues)
{
    std::vector<ChatMessage> out;
    for (auto const & dialogue : dialogues) {
        validate(dialogue);
        for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
            auto const & turn = dialogue.turns[i];
            out.push_back(ChatMessage{
                turn.role,
                i == 0 ? format_problem_utterance(dialogue.statement) : turn.content,
                Phase::FormatExemplar,
                out.size(),
            });
        }
    }
    return out;
}

ConversationState
init_memory(
    MemoryConfig const & cfg,
    std::vector<ToolSpec> const & tools,
    std::vector<Exemplar> const & retrieved,
    std::vector<AnnotatedDialogue> const & annotated)
{
    if (cfg.n_annotated > kMaxAnnotated) {
        throw Error(ErrorCode::InvalidConfig, "at most 5 annotated dialogues are supported");
    }
    if (retrieved.size() != cfg.n_retrieval) {
        throw Error(
            ErrorCode::InvalidConfig,
            "expected " + std::to_string(cfg.n_retrieval) + " retrieved exemplars, got "
                + std::to_string(retrieved.size()));
    }
    if (annotated.size() != cfg.n_annotated) {
        throw Error(
            ErrorCode::InvalidConfig,
            "expected " + std::to_string(cfg.n_annotated) + " annotated dialogues, got "
                + std::to_string(annotated.size()));
    }

    ConversationState state;
    auto push = [&state](ChatMessage const & msg) {
        state.append(msg.role, msg.content, msg.phase);
    };
    if (cfg.tool_knowledge) {
        auto const [ask, ack] = build_tool_knowledge(tools);
        push(ask);
        push(ack);
    }
    if (cfg.n_retrieval > 0) {
        auto const [ask, ack] = build_task_knowledge(retrieved, cfg.fix_template_typo);
        push(ask);
        push(ack);
    }
    if (cfg.n_annotated > 0) {
        for (auto const & msg : build_format_exemplars(annotated)) {
            push(msg);
        }
    }
    state.seal_memory();
    return state;
}

std::vector<AnnotatedDialogue>
annotated_from_json(nlohmann::json const & j)
{
    if (!j.is_array()) {
        throw Error(ErrorCode::MalformedDialogue, "annotated dialogue file must hold a JSON array");
    }
    std::vector<AnnotatedDialogue> out;
    for (auto const & item : j) {
        AnnotatedDialogue d;
        d.statement = item.at("statement").get<std::string>();
        for (auto const & turn : item.at("turns")) {
            d.turns.push_back(DialogueTurn{
                role_from_string(turn.at("role").get<std::string>()),
                turn.at("content").get<std::string>(),
            });
        }
        validate(d);
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<AnnotatedDialogue>
load_annotated_dialogues(std::filesystem::path const & path)
{
    return annotated_from_json(read_json_file(path));
}

std::vector<ToolSpec>
load_tool_specs(std::filesystem::path const & path)
{
    auto const j = read_json_file(path);
    std::vector<ToolSpec> out;
    for (auto const & item : j) {
        out.push_back(ToolSpec{
            item.at("name").get<std::string>(),
            item.at("functionality").get<std::string>(),
            item.value("arg_prompt", std::string{}),
        });
    }
    return out;
}

} // namespace chatcot::memory
