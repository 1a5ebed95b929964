#include "chatcot/engine.hpp"

#include "chatcot/error.hpp"
#include "chatcot/mathkit/tools.hpp"
#include "chatcot/text.hpp"

#include <algorithm>

namespace chatcot::engine {

namespace {

std::string
feedback_message(std::string const & batch)
{
    return std::string(kResultsMarker) + batch + ".\n" + std::string(kFeedbackQuestion);
}

enum class Verdict { Yes, No, Unclear };

/// Whichever of the words "yes" / "no" comes first.
Verdict
verdict_of(std::string_view reply)
{
    auto const lower = text::to_lower(reply);
    auto find_word = [&](std::string_view w) -> std::size_t {
        for (auto pos = lower.find(w); pos != std::string::npos; pos = lower.find(w, pos + 1)) {
            bool const left = pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]));
            auto const end = pos + w.size();
            bool const right = end >= lower.size() || !std::isalnum(static_cast<unsigned char>(lower[end]));
            if (left && right) {
                return pos;
            }
        }
        return std::string::npos;
    };
    auto const yes = find_word("yes");
    auto const no = find_word("no");
    if (yes == std::string::npos && no == std::string::npos) {
        return Verdict::Unclear;
    }
    return yes < no ? Verdict::Yes : Verdict::No;
}

} // namespace

void
ToolRegistry::add(memory::ToolSpec spec, Executor executor)
{
    if (find(spec.name)) {
        throw Error(ErrorCode::DuplicateTool, "tool '" + spec.name + "' is already registered");
    }
    if (spec.name.empty()) {
        throw Error(ErrorCode::InvalidConfig, "tool name is empty");
    }
    tools_.push_back({std::move(spec), std::move(executor), false});
}

void
ToolRegistry::add_retriever(memory::ToolSpec spec)
{
    if (find(spec.name)) {
        throw Error(ErrorCode::DuplicateTool, "tool '" + spec.name + "' is already registered");
    }
    tools_.push_back({std::move(spec), {}, true});
}

RegisteredTool const *
ToolRegistry::find(std::string_view name) const noexcept
{
    auto it = std::find_if(tools_.begin(), tools_.end(), [&](RegisteredTool const & t) { return t.spec.name == name; });
    return it == tools_.end() ? nullptr : &*it;
}

std::vector<memory::ToolSpec>
ToolRegistry::specs() const
{
    std::vector<memory::ToolSpec> out;
    for (auto const & t : tools_) {
        out.push_back(t.spec);
    }
    return out;
}

RegisteredTool const *
ToolRegistry::match(std::string_view reply) const
{
    for (auto const & t : tools_) {
        if (text::contains_icase(reply, t.spec.name)) {
            return &t;
        }
    }
    return nullptr;
}

ToolRegistry
standard_registry(std::vector<memory::ToolSpec> const & specs)
{
    ToolRegistry registry;
    for (auto const & spec : specs) {
        if (spec.name == "Calculator") {
            registry.add(spec, [](std::string_view arg) { return mathkit::calculator(arg); });
        } else if (spec.name == "Equation Solver") {
            registry.add(spec, [](std::string_view arg) { return mathkit::equation_solver(arg); });
        } else if (spec.name == "Retriever") {
            registry.add_retriever(spec);
        } else {
            throw Error(ErrorCode::UnknownTool, "no implementation for tool '" + spec.name + "'");
        }
    }
    return registry;
}

void
EngineConfig::validate() const
{
    if (max_turns < 2) {
        throw Error(ErrorCode::InvalidConfig, "max_turns must be at least 2");
    }
    if (max_feedback > retrieval::kMaxFeedbackRounds) {
        throw Error(ErrorCode::InvalidConfig, "max_feedback must not exceed 5");
    }
    if (retrieval_k == 0) {
        throw Error(ErrorCode::InvalidConfig, "retrieval_k must be positive");
    }
    if (temperature < 0.0) {
        throw Error(ErrorCode::InvalidConfig, "temperature must not be negative");
    }
    if (max_new_tokens == 0) {
        throw Error(ErrorCode::InvalidConfig, "max_new_tokens must be positive");
    }
}

std::optional<std::string>
extract_answer(std::string_view text)
{
    if (auto boxed = text::last_boxed(text)) {
        return boxed;
    }
    auto const lower = text::to_lower(text);
    auto const pos = lower.rfind("answer is");
    if (pos == std::string::npos) {
        return std::nullopt;
    }
    auto rest = text::trim(text.substr(pos + 9));
    while (!rest.empty() && (rest.back() == '.' || rest.back() == '!' || rest.back() == ',' || rest.back() == ';'
                             || rest.back() == ':' || rest.back() == '$')) {
        rest.remove_suffix(1);
        rest = text::trim(rest);
    }
    while (!rest.empty() && (rest.front() == ':' || rest.front() == '$')) {
        rest.remove_prefix(1);
        rest = text::trim(rest);
    }
    if (rest.empty()) {
        return std::nullopt;
    }
    return std::string(rest);
}

std::string
tool_result_message(ToolResult const & result)
{
    std::string out = wire_format(result);
    if (!result.ok) {
        out += kToolErrorSuffix;
    }
    return out + std::string(kContinueDirective);
}

ReasoningEngine::ReasoningEngine(
    EngineConfig config,
    ToolRegistry const & registry,
    llm::Backend const & backend,
    std::shared_ptr<retrieval::EmbeddingProvider const> provider)
    : config_(config)
    , registry_(&registry)
    , backend_(&backend)
    , provider_(provider ? std::move(provider) : std::make_shared<retrieval::HashEmbedder>())
{
    config_.validate();
}

RunContext
ReasoningEngine::begin(ProblemRecord const & problem, ConversationState memory) const
{
    RunContext ctx;
    ctx.problem = problem;
    ctx.state = std::move(memory);
    ctx.state.set_max_turns(config_.max_turns);
    ctx.state.problem_id = problem.id;
    ctx.state.problem_statement = problem.statement;
    bool const wants_retriever = std::any_of(registry_->tools().begin(), registry_->tools().end(),
                                             [](RegisteredTool const & t) { return t.retriever; });
    if (wants_retriever && !problem.paragraphs.empty()) {
        ctx.paragraphs = std::make_shared<retrieval::DocIndex const>(retrieval::paragraph_index(*provider_, problem));
    }
    return ctx;
}

void
ReasoningEngine::start(RunContext & ctx) const
{
    ctx.state.append(Role::Agent, std::string(kStartPrompt) + ctx.problem.statement, Phase::ProblemStart);
}

bool
ReasoningEngine::budget_spent(RunContext const & ctx) const noexcept
{
    // The forced reply needs a slot of its own when it counts as a turn.
    std::size_t const limit = config_.conclude_counts_as_turn ? config_.max_turns - 1 : config_.max_turns;
    return ctx.model_turns >= limit;
}

std::string const &
ReasoningEngine::ask(RunContext & ctx, Phase phase) const
{
    llm::ModelRequest request;
    request.messages = ctx.state.messages();
    request.phase = phase;
    request.temperature = config_.temperature;
    request.max_new_tokens = config_.max_new_tokens;
    request.sample_seed = config_.sample_seed;
    auto response = backend_->complete(request);
    ctx.generated_tokens += response.generated_tokens;
    std::string reply = std::move(response.completions.front());
    if (reply.empty()) {
        // keep the history well-formed even for a blank completion
        reply = "(no response)";
        ctx.notes.push_back("EmptyCompletion");
    }

    if (phase == Phase::Conclusion) {
        if (config_.conclude_counts_as_turn) {
            ++ctx.model_turns;
        }
        return ctx.state.append(Role::Model, std::move(reply), phase).content;
    }

    ++ctx.model_turns;
    bool const boxed = text::has_boxed(reply);
    Phase const tag = boxed && phase == Phase::Reasoning ? Phase::Conclusion : phase;
    auto const & msg = ctx.state.append(Role::Model, std::move(reply), tag);
    if (boxed) {
        ctx.answer = extract_answer(msg.content);
        ctx.state.conclude();
    } else if (budget_spent(ctx)) {
        force_conclude(ctx);
    }
    return msg.content;
}

void
ReasoningEngine::force_conclude(RunContext & ctx) const
{
    ctx.forced_conclusion = true;
    ctx.state.append(Role::Agent, std::string(kForcePrompt), Phase::Conclusion);
    auto const & reply = ask(ctx, Phase::Conclusion);
    ctx.answer = extract_answer(reply);
    ctx.state.conclude();
}

std::string const &
ReasoningEngine::reason(RunContext & ctx) const
{
    return ask(ctx, Phase::Reasoning);
}

StepOutcome
ReasoningEngine::tool_selection(RunContext & ctx) const
{
    ctx.state.append(Role::Agent, std::string(kSelectionPrompt), Phase::ToolSelection);
    auto const & reply = ask(ctx, Phase::ToolSelection);
    if (ctx.state.concluded()) {
        return {OutcomeKind::Concluded, {}, std::nullopt};
    }
    if (auto const * tool = registry_->match(reply)) {
        return {OutcomeKind::ToolUsed, tool->spec.name, std::nullopt};
    }
    if (!text::contains_icase(reply, kNoToolPhrase)) {
        ctx.notes.push_back("UnparsedSelection: " + reply);
    }
    return {OutcomeKind::NoTool, {}, std::nullopt};
}

void
ReasoningEngine::record(RunContext & ctx, std::string const & tool, std::string const & argument, ToolResult const & result)
    const
{
    ctx.tool_calls.push_back({tool, argument, result.ok});
}

std::optional<ToolResult>
ReasoningEngine::formulate_and_execute(RunContext & ctx, std::string const & tool_name) const
{
    auto const * tool = registry_->find(tool_name);
    if (!tool) {
        throw Error(ErrorCode::UnknownTool, "tool '" + tool_name + "' is not registered");
    }
    if (tool->retriever) {
        return run_retriever(ctx, *tool);
    }
    ctx.state.append(Role::Agent, tool->spec.arg_prompt, Phase::ToolArgs);
    std::string const argument = ask(ctx, Phase::ToolArgs);
    if (ctx.state.concluded()) {
        return std::nullopt;
    }
    ToolResult result;
    try {
        result = tool->executor(argument);
    } catch (std::exception const & e) {
        result = ToolResult::failure(ErrorCode::Unsupported, e.what());
    }
    record(ctx, tool_name, argument, result);
    ctx.state.append(Role::Agent, tool_result_message(result), Phase::ToolResult);
    return result;
}

std::optional<ToolResult>
ReasoningEngine::feedback_round(RunContext & ctx, retrieval::RetrievalSession & session, std::string & batch) const
{
    auto const & reply = ask(ctx, Phase::Feedback);
    if (ctx.state.concluded()) {
        return ToolResult::success(batch);
    }
    auto const verdict = verdict_of(reply);
    if (verdict == Verdict::Unclear) {
        ctx.notes.push_back("UnparsedFeedback: " + reply);
    }
    if (verdict != Verdict::No) {
        auto result = ToolResult::success(batch);
        ctx.state.append(Role::Agent, tool_result_message(result), Phase::ToolResult);
        return result;
    }
    try {
        auto const hits = session.next_batch(config_.retrieval_k);
        batch = retrieval::render_hits(*ctx.paragraphs, hits);
    } catch (Error const & e) {
        if (e.code() != ErrorCode::FeedbackExhausted && e.code() != ErrorCode::IndexExhausted) {
            throw;
        }
        ctx.state.append(Role::Agent, std::string(kFeedbackExhausted), Phase::ToolResult);
        return ToolResult::failure(e.code(), std::string(kFeedbackExhausted));
    }
    ctx.state.append(Role::Agent, feedback_message(batch), Phase::Feedback);
    return std::nullopt;
}

std::optional<ToolResult>
ReasoningEngine::run_retriever(RunContext & ctx, RegisteredTool const & tool) const
{
    ctx.state.append(Role::Agent, tool.spec.arg_prompt, Phase::ToolArgs);
    std::string const query = ask(ctx, Phase::ToolArgs);
    if (ctx.state.concluded()) {
        return std::nullopt;
    }
    if (!ctx.paragraphs || ctx.paragraphs->empty()) {
        auto result = ToolResult::failure(ErrorCode::EmptyIndex, "there are no paragraphs to search");
        record(ctx, tool.spec.name, query, result);
        ctx.state.append(Role::Agent, tool_result_message(result), Phase::ToolResult);
        return result;
    }
    retrieval::RetrievalSession session(*ctx.paragraphs, provider_->embed(query), query, config_.max_feedback);
    std::string batch = retrieval::render_hits(*ctx.paragraphs, session.first_batch(config_.retrieval_k));
    ctx.state.append(Role::Agent, feedback_message(batch), Phase::Feedback);
    for (;;) {
        if (auto result = feedback_round(ctx, session, batch)) {
            if (!ctx.state.concluded()) {
                record(ctx, tool.spec.name, query, *result);
            }
            return result;
        }
    }
}

RunResult
ReasoningEngine::run(ProblemRecord const & problem, ConversationState memory) const
{
    auto ctx = begin(problem, std::move(memory));
    start(ctx);
    while (!ctx.state.concluded()) {
        reason(ctx);
        if (ctx.state.concluded()) {
            break;
        }
        auto const outcome = tool_selection(ctx);
        if (outcome.kind == OutcomeKind::Concluded) {
            break;
        }
        if (outcome.kind == OutcomeKind::ToolUsed) {
            formulate_and_execute(ctx, outcome.tool);
        } else {
            ctx.state.append(Role::Agent, std::string(kContinuePrompt), Phase::Reasoning);
        }
    }

    RunResult out;
    out.answer_found = ctx.answer.has_value();
    out.answer = ctx.answer.value_or("");
    if (!out.answer_found) {
        ctx.notes.push_back(std::string(to_string(ErrorCode::AnswerNotFound)));
    }
    out.trace = std::move(ctx.state);
    out.tool_calls = std::move(ctx.tool_calls);
    out.forced_conclusion = ctx.forced_conclusion;
    out.generated_tokens = ctx.generated_tokens;
    out.model_turns = ctx.model_turns;
    out.notes = std::move(ctx.notes);
    return out;
}

} // namespace chatcot::engine
