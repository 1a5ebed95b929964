#include "chatcot/bench/answer.hpp"
#include "chatcot/ensemble.hpp"
#include "chatcot/error.hpp"

#include "support/engine_fixtures.hpp"
#include "support/files.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace chatcot;
using namespace chatcot::ensemble;
using namespace testing_support;

namespace {

llm::ScriptedBackend
sampled_backend(std::vector<std::string> const & per_sample)
{
    nlohmann::json rules = nlohmann::json::array();
    for (std::size_t i = 0; i < per_sample.size(); ++i) {
        rules.push_back({{"phase", "reasoning"}, {"sample", i}, {"response", per_sample[i]}});
    }
    return llm::ScriptedBackend(llm::ScriptedPolicy::from_json({{"rules", rules}, {"default", "Do not use tool"}}));
}

ConversationState
trace_from(nlohmann::json const & golden_json)
{
    ConversationState s;
    s.problem_statement = golden_json["problem"];
    for (auto const & m : golden_dialogue(golden_json)) {
        s.append(m.role, m.content, m.phase);
    }
    return s;
}

} // namespace

TEST_CASE("self_consistency")
{
    auto const majority = self_consistency({"2", "0", "0", "0", "2"});
    CHECK(majority.winner == "0");
    CHECK(majority.winner_score == 3);

    auto const grouped = self_consistency({"1/2", "0.5", "3"}, math_match);
    CHECK(grouped.winner == "1/2");
    CHECK(grouped.winner_score == 2);
    CHECK(grouped.classes.size() == 2);

    auto const tie = self_consistency({"a", "b", "c"});
    CHECK(tie.winner == "a");
    CHECK(tie.winner_score == 1);

    CHECK_THROWS_AS(self_consistency({}), Error);
    CHECK(kDefaultSamples == 5);
}

TEST_CASE("vote invariants under permutation")
{
    std::mt19937_64 rng(8);
    std::vector<std::string> const pool{"0", "1", "2", "1/2", "0.5", "\\frac{1}{2}"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> answers;
        std::size_t const n = 1 + rng() % 9;
        for (std::size_t i = 0; i < n; ++i) {
            answers.push_back(pool[rng() % pool.size()]);
        }
        auto const tally = self_consistency(answers, math_match);
        std::size_t sum = 0;
        for (auto const & c : tally.classes) {
            sum += c.score;
            CHECK(tally.winner_score >= c.score);
        }
        CHECK(sum == n);

        auto shuffled = answers;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto const other = self_consistency(shuffled, math_match);
        CHECK(other.winner_score == tally.winner_score);
        std::size_t tied = 0;
        for (auto const & c : tally.classes) {
            tied += c.score == tally.winner_score ? 1 : 0;
        }
        if (tied == 1) {
            CHECK(math_match(other.winner, tally.winner));
        }

        std::vector<std::string> const copies(n, answers.front());
        auto const same = self_consistency(copies);
        CHECK(same.winner == answers.front());
        CHECK(same.winner_score == n);
    }
}

TEST_CASE("run_sc")
{
    auto const registry = engine::standard_registry(math_tool_specs());
    auto const memory = math_memory(0);
    auto const problem = math_problem("What is the remainder when $13^{13}+5$ is divided by $6$?");

    SUBCASE("stochastic policy")
    {
        auto const backend =
            sampled_backend({"\\boxed{0}", "so \\boxed{0}", "\\boxed{2}", "\\boxed{0}.", "it is \\boxed{2}"});
        auto const result = run_sc({}, registry, backend, problem, memory);
        CHECK(result.answer == "0");
        CHECK(result.tally.winner_score == 3);
        CHECK(result.k_requested == 5);
        CHECK(result.k_effective == 5);
        CHECK(result.runs.size() == 5);
        CHECK(result.report()["k_effective"] == 5);
    }
    SUBCASE("k = 1 is a plain run")
    {
        auto const backend = sampled_backend({"\\boxed{4}"});
        auto const sc = run_sc({}, registry, backend, problem, memory, {1, 0.0, math_match});
        engine::ReasoningEngine const engine({}, registry, backend);
        auto const plain = engine.run(problem, memory);
        CHECK(sc.answer == plain.answer);
        REQUIRE(sc.runs.size() == 1);
        CHECK(sc.runs[0].trace == plain.trace);
    }
    SUBCASE("failed and empty runs reduce k")
    {
        // sample 1 has no rule at all; sample 2 never boxes and is forced
        auto const backend = llm::ScriptedBackend(llm::ScriptedPolicy::from_json(nlohmann::json::parse(R"({"rules": [
            {"phase": "reasoning", "sample": 0, "response": "\\boxed{7}"},
            {"phase": "reasoning", "sample": 2, "response": "hmm"},
            {"phase": "tool_selection", "sample": 2, "response": "Do not use tool"},
            {"phase": "conclusion", "sample": 2, "response": "no idea"},
            {"phase": "reasoning", "sample": 3, "response": "\\boxed{7}"}
        ]})")));
        engine::EngineConfig cfg;
        cfg.max_turns = 2;
        auto const result = run_sc(cfg, registry, backend, problem, memory, {4, 0.7, math_match});
        CHECK(result.answer == "7");
        CHECK(result.k_requested == 4);
        CHECK(result.k_effective == 2);
        CHECK(result.failures.size() == 1);
    }
    SUBCASE("all empty")
    {
        auto const backend = llm::ScriptedBackend(llm::ScriptedPolicy::from_json(nlohmann::json::parse(
            R"({"rules": [{"phase": "tool_selection", "response": "Do not use tool"}], "default": "thinking"})")));
        engine::EngineConfig cfg;
        cfg.max_turns = 2;
        try {
            (void)run_sc(cfg, registry, backend, problem, memory, {3, 0.7, math_match});
            FAIL("expected AnswerNotFound");
        } catch (Error const & e) {
            CHECK(e.code() == ErrorCode::AnswerNotFound);
        }
    }
    SUBCASE("k > 1 needs temperature")
    {
        auto const backend = sampled_backend({"\\boxed{1}"});
        CHECK_THROWS_AS((void)run_sc({}, registry, backend, problem, memory, {3, 0.0, math_match}), Error);
    }
}

TEST_CASE("refine_pass")
{
    auto const original = nlohmann::json::parse(read_file(data_path("golden/case_study_13_original.json")));
    auto const trace = trace_from(original);
    llm::ScriptedBackend const refine(llm::ScriptedPolicy::load(data_path("policies/case_study_13_refine.json")));

    SUBCASE("the case study is corrected from 2 to 0")
    {
        auto const result = refine_pass(trace, original["answer"], refine);
        CHECK(result.answer == "0");
        CHECK(result.changed);
        REQUIRE(result.exchange.size() == 4);
        CHECK(result.exchange[2].content == golden("refine_prompt.txt"));
        CHECK(result.exchange[1].content == to_paragraph(trace));
        CHECK(result.exchange[1].content.find("To solve this sub-problem") == std::string::npos);
    }
    SUBCASE("restating the same answer is a fixpoint")
    {
        auto const same = llm::ScriptedBackend(
            llm::ScriptedPolicy::from_json(nlohmann::json::parse(R"({"rules": [], "default": "Checked: \\boxed{2}"})")));
        auto const result = refine_pass(trace, "2", same);
        CHECK(result.answer == "2");
        CHECK_FALSE(result.changed);
    }
    SUBCASE("no boxed value keeps the original")
    {
        auto const vague = llm::ScriptedBackend(
            llm::ScriptedPolicy::from_json(nlohmann::json::parse(R"({"rules": [], "default": "Looks fine to me."})")));
        CHECK(refine_pass(trace, "2", vague).answer == "2");
    }
    SUBCASE("nothing to refine")
    {
        ConversationState empty;
        empty.append(Role::Agent, "start", Phase::ProblemStart);
        CHECK_THROWS_AS((void)refine_pass(empty, "1", refine), Error);
    }
}

TEST_CASE("answer_equiv")
{
    using bench::answer_equiv;
    CHECK(answer_equiv("\\boxed{0}", "0"));
    CHECK(answer_equiv("1/2", "0.5"));
    CHECK_FALSE(answer_equiv("2", "0"));
    CHECK(answer_equiv("\\dfrac{3}{4}", "0.75"));
    CHECK(answer_equiv("$\\left(3\\right)$", "3"));
    CHECK(answer_equiv("90^\\circ", "90"));
    CHECK(answer_equiv("50\\%", "50"));
    CHECK(answer_equiv("2x + 1", "1 + 2*x"));
    CHECK(answer_equiv("\\text{(A)}", "(A)"));
    CHECK(answer_equiv("2\\sqrt{2}", "\\sqrt{8}"));
    CHECK_FALSE(answer_equiv("abc", "cba"));
    CHECK_FALSE(answer_equiv("", "0"));
    CHECK(answer_equiv("The Eiffel Tower", "eiffel tower", {true, true}));
    CHECK_FALSE(answer_equiv("yes", "no", {true, true}));
    CHECK_FALSE(answer_equiv("50\\%", "50", {false, false}));
}

TEST_CASE("answer_equiv is reflexive and symmetric on decorated answers")
{
    std::mt19937_64 rng(13);
    std::vector<std::string> const bases{"0", "2", "-7", "1/2", "\\frac{1}{2}", "0.5", "3\\sqrt{2}", "x^2+1",
                                         "12", "(1,2)", "\\pi", "5/6", "1.25", "Rushville", "\\frac{5}{4}"};
    auto decorate = [&](std::string s) {
        switch (rng() % 6) {
        case 0: return "\\boxed{" + s + "}";
        case 1: return "$" + s + "$";
        case 2: return " " + s + " .";
        case 3: return "\\left(" + s + "\\right)";
        case 4: return "$\\boxed{" + s + "}$.";
        default: return s;
        }
    };
    for (int i = 0; i < 2000; ++i) {
        auto const & a = bases[rng() % bases.size()];
        auto const & b = bases[rng() % bases.size()];
        auto const da = decorate(a);
        auto const db = decorate(b);
        CAPTURE(da);
        CAPTURE(db);
        CHECK(bench::answer_equiv(da, da));
        CHECK(bench::answer_equiv(da, db) == bench::answer_equiv(db, da));
        if (da.find("\\left(") == std::string::npos) {
            CHECK(bench::answer_equiv(da, a));
        }
    }
}
