#pragma once

#include "chatcot/conversation.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace chatcot::memory {

struct ToolSpec
{
    std::string name;
    std::string functionality;
    /// What the agent says to request this tool's arguments.
    std::string arg_prompt;
};

struct Exemplar
{
    std::string statement;
    std::string solution;
    std::string answer;
};

struct DialogueTurn
{
    Role role = Role::Agent;
    std::string content;
};

/// A hand-written multi-turn solution. turns[0] is the agent's problem
/// utterance; its content is re-rendered from statement.
struct AnnotatedDialogue
{
    std::string statement;
    std::vector<DialogueTurn> turns;
};

struct MemoryConfig
{
    std::size_t n_retrieval = 2;
    std::size_t n_annotated = 3;
    bool tool_knowledge = true;
    /// Replace the template's "thoery" with "theory".
    bool fix_template_typo = false;
};

inline constexpr std::size_t kMaxAnnotated = 5;

/// Defaults used for MATH-style problems: two retrieved and three
/// annotated exemplars.
MemoryConfig math_defaults();

/// HotpotQA-style problems use four shots, split evenly.
MemoryConfig hotpot_defaults();

using MessagePair = std::pair<ChatMessage, ChatMessage>;

MessagePair build_tool_knowledge(std::vector<ToolSpec> const & tools);

MessagePair build_task_knowledge(std::vector<Exemplar> const & exemplars, bool fix_typo = false);

std::vector<ChatMessage> build_format_exemplars(std::vector<AnnotatedDialogue> const & dialogues);

/// Renders the opening utterance of an annotated dialogue.
std::string format_problem_utterance(std::string_view statement);

/// Throws MalformedDialogue unless roles alternate starting with the agent
/// and the final model turn carries a boxed answer.
void validate(AnnotatedDialogue const & dialogue);

/// Composes tool knowledge, task knowledge and reasoning-format exemplars
/// (in that order) into a conversation whose whole content is sealed as
/// memory. Turning off tool_knowledge, or setting either count to zero,
/// drops exactly that block.
ConversationState init_memory(
    MemoryConfig const & cfg,
    std::vector<ToolSpec> const & tools,
    std::vector<Exemplar> const & retrieved,
    std::vector<AnnotatedDialogue> const & annotated);

std::vector<AnnotatedDialogue> load_annotated_dialogues(std::filesystem::path const & path);
std::vector<AnnotatedDialogue> annotated_from_json(nlohmann::json const & j);

std::vector<ToolSpec> load_tool_specs(std::filesystem::path const & path);

} // namespace chatcot::memory
