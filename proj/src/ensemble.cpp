#include "chatcot/ensemble.hpp"

#include "chatcot/bench/answer.hpp"
#include "chatcot/error.hpp"

#include <algorithm>

namespace chatcot::ensemble {

bool
exact_match(std::string_view a, std::string_view b)
{
    return a == b;
}

bool
math_match(std::string_view a, std::string_view b)
{
    return bench::answer_equiv(a, b);
}

VoteTally
self_consistency(std::vector<std::string> const & answers, Equivalence const & equiv)
{
    if (answers.empty()) {
        throw Error(ErrorCode::InvalidRequest, "nothing to vote on");
    }
    VoteTally tally;
    tally.answers = answers;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        auto it = std::find_if(tally.classes.begin(), tally.classes.end(),
                               [&](VoteClass const & c) { return equiv(c.representative, answers[i]); });
        if (it == tally.classes.end()) {
            tally.classes.push_back({answers[i], 1, i});
        } else {
            ++it->score;
        }
    }
    // max_element keeps the first of equal scores
    auto const best = std::max_element(tally.classes.begin(), tally.classes.end(),
                                       [](VoteClass const & x, VoteClass const & y) { return x.score < y.score; });
    tally.winner = best->representative;
    tally.winner_score = best->score;
    return tally;
}

nlohmann::json
ScResult::report() const
{
    nlohmann::json classes = nlohmann::json::array();
    for (auto const & c : tally.classes) {
        classes.push_back({{"answer", c.representative}, {"score", c.score}});
    }
    return {
        {"k_requested", k_requested},
        {"k_effective", k_effective},
        {"tallies", std::move(classes)},
        {"winner", answer},
        {"failures", failures},
    };
}

ScResult
run_sc(
    engine::EngineConfig base,
    engine::ToolRegistry const & registry,
    llm::Backend const & backend,
    ProblemRecord const & problem,
    ConversationState const & memory,
    ScOptions const & options)
{
    if (options.k == 0) {
        throw Error(ErrorCode::InvalidConfig, "k must be positive");
    }
    if (options.k > 1 && options.temperature <= 0.0) {
        throw Error(ErrorCode::InvalidConfig, "sampling several runs needs a positive temperature");
    }
    ScResult out;
    out.k_requested = options.k;
    std::vector<std::string> votes;
    for (std::size_t p = 0; p < options.k; ++p) {
        auto cfg = base;
        cfg.sample_seed = p;
        if (options.k > 1) {
            cfg.temperature = options.temperature;
        }
        try {
            engine::ReasoningEngine const engine(cfg, registry, backend);
            auto run = engine.run(problem, memory);
            if (run.answer_found && !run.answer.empty()) {
                votes.push_back(run.answer);
            }
            out.runs.push_back(std::move(run));
        } catch (Error const & e) {
            if (e.code() == ErrorCode::InvalidConfig) {
                throw;
            }
            out.failures.push_back("run " + std::to_string(p) + ": " + e.what());
        }
    }
    out.k_effective = votes.size();
    if (votes.empty()) {
        throw Error(ErrorCode::AnswerNotFound, "none of the " + std::to_string(options.k) + " runs produced an answer");
    }
    out.tally = self_consistency(votes, options.equiv);
    out.answer = out.tally.winner;
    return out;
}

RefineResult
refine_pass(
    ConversationState const & trace,
    std::string const & original_answer,
    llm::Backend const & backend,
    double temperature)
{
    auto const paragraph = to_paragraph(trace);
    std::string statement = trace.problem_statement;
    if (statement.empty()) {
        statement = trace.dialogue().empty() ? std::string() : trace.dialogue().front().content;
    }

    RefineResult out;
    out.exchange = {
        {Role::Agent, "Problem: " + statement + "\nLet's think step by step", Phase::ProblemStart, 0},
        {Role::Model, paragraph, Phase::Reasoning, 1},
        {Role::Agent, std::string(kRefinePrompt), Phase::Conclusion, 2},
    };
    llm::ModelRequest request;
    request.messages = out.exchange;
    request.phase = Phase::Conclusion;
    request.temperature = temperature;
    auto response = backend.complete(request);
    out.generated_tokens = response.generated_tokens;
    auto const & reply = response.completions.front();
    out.exchange.push_back({Role::Model, reply.empty() ? "(no response)" : reply, Phase::Conclusion, 3});

    auto const boxed = engine::extract_answer(reply);
    out.answer = boxed.value_or(original_answer);
    out.changed = boxed.has_value() && !bench::answer_equiv(*boxed, original_answer);
    return out;
}

} // namespace chatcot::ensemble
