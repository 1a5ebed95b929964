// One line per acceptance criterion; exit status is nonzero if any fails.

#include "chatcot/bench/dataset.hpp"
#include "chatcot/bench/evaluate.hpp"
#include "chatcot/bench/metrics.hpp"
#include "chatcot/engine.hpp"
#include "chatcot/ensemble.hpp"
#include "chatcot/error.hpp"
#include "chatcot/mathkit/parser.hpp"
#include "chatcot/mathkit/solver.hpp"
#include "chatcot/mathkit/tools.hpp"
#include "chatcot/memory.hpp"
#include "chatcot/retrieval.hpp"

#include "support/engine_fixtures.hpp"
#include "support/files.hpp"
#include "support/math_oracles.hpp"
#include "support/random_policy.hpp"
#include "support/retrieval_oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace chatcot;
using namespace testing_support;

namespace {

struct Outcome
{
    enum class Status { Pass, Fail, Skip } status = Status::Pass;
    std::string detail;
};

/// Collects the first failed expectation of a criterion.
class Checks
{
public:
    void expect(bool ok, std::string const & what)
    {
        ++count_;
        if (!ok && failure_.empty()) {
            failure_ = what;
        }
    }

    [[nodiscard]] Outcome outcome(std::string const & summary) const
    {
        if (failure_.empty()) {
            return {Outcome::Status::Pass, summary + " (" + std::to_string(count_) + " checks)"};
        }
        return {Outcome::Status::Fail, failure_};
    }

private:
    std::size_t count_ = 0;
    std::string failure_;
};

struct Criterion
{
    int number;
    std::string title;
    std::chrono::milliseconds limit;
    std::function<Outcome()> body;
};

Outcome
prompt_goldens()
{
    Checks c;
    auto const [tool_agent, tool_model] = memory::build_tool_knowledge({{"[T1]", "[Y1]", ""}, {"[T2]", "[Y2]", ""}});
    c.expect(tool_agent.content == golden("tool_knowledge_agent.txt"), "tool knowledge prompt");
    c.expect(tool_model.content == golden("tool_knowledge_model.txt"), "tool knowledge reply");
    auto const [task_agent, task_model] = memory::build_task_knowledge({{"[Q1]", "[S1]", "a"}, {"[Q2]", "[S2]", "b"}});
    c.expect(task_agent.content == golden("task_knowledge_agent.txt"), "task knowledge prompt");
    c.expect(task_model.content == golden("task_knowledge_model.txt"), "task knowledge reply");
    c.expect(memory::format_problem_utterance("[Q'1]") == golden("format_problem.txt"), "reasoning format opener");

    auto const registry = engine::standard_registry(math_tool_specs());
    llm::ScriptedBackend const backend(llm::ScriptedPolicy::from_json(nlohmann::json::parse(
        R"({"rules": [{"phase": "tool_selection", "response": "Do not use tool"}], "default": "thinking"})")));
    engine::EngineConfig cfg;
    cfg.max_turns = 2;
    engine::ReasoningEngine const eng(cfg, registry, backend);
    auto const run = eng.run(math_problem("What is 2+2?"), math_memory(0));
    auto const dialogue = run.trace.dialogue();
    c.expect(dialogue.size() >= 6, "dialogue too short");
    if (dialogue.size() >= 6) {
        c.expect(dialogue[0].content == golden("start_prompt.txt"), "start prompt");
        c.expect(dialogue[2].content == golden("selection_prompt.txt"), "selection prompt");
        c.expect(dialogue[dialogue.size() - 2].content == golden("force_conclude.txt"), "force-conclude prompt");
    }
    c.expect(run.forced_conclusion, "run was not forced to conclude");
    return c.outcome("templates and agent prompts byte-identical");
}

Outcome
case_study()
{
    Checks c;
    auto const registry = engine::standard_registry(math_tool_specs());
    llm::ScriptedBackend const backend(llm::ScriptedPolicy::load(data_path("policies/case_study_13.json")));
    engine::ReasoningEngine const eng({}, registry, backend);
    auto const golden_json = nlohmann::json::parse(read_file(data_path("golden/case_study_13_trace.json")));
    auto const run = eng.run(math_problem(golden_json["problem"]), math_memory(3));

    auto const expected = golden_dialogue(golden_json);
    auto const dialogue = run.trace.dialogue();
    c.expect(dialogue.size() == expected.size(), "transcript length differs");
    for (std::size_t i = 0; i < std::min(dialogue.size(), expected.size()); ++i) {
        c.expect(dialogue[i].role == expected[i].role && dialogue[i].phase == expected[i].phase &&
                     dialogue[i].content == expected[i].content,
                 "message " + std::to_string(i) + " differs");
    }
    c.expect(run.answer == "0", "final answer " + run.answer);
    auto const direct = mathkit::calculator("302875106592258 mod 6");
    c.expect(direct.ok && direct.content == "0", "calculator gave " + direct.content);
    c.expect(run.tool_calls.size() == 2 && run.tool_calls[1].ok, "tool calls");
    return c.outcome("transcript matches, answer 0, 302875106592258 mod 6 = 0");
}

Outcome
mathkit_oracles()
{
    Checks c;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        auto tree = oracle::random_tree(rng, 6);
        auto const src = tree->render();
        auto const expected =
            tree->literal_zero_modulus() ? oracle::Value{{}, oracle::Fault::DivisionByZero} : tree->eval();
        auto const got = mathkit::calculator(src);
        if (expected.fault == oracle::Fault::None) {
            c.expect(got.ok && got.content == expected.value.str(), "expression " + src + " gave " + got.content);
        } else {
            auto const want =
                expected.fault == oracle::Fault::DivisionByZero ? ErrorCode::DivisionByZero : ErrorCode::Unsupported;
            c.expect(!got.ok && got.error_kind == want, "expression " + src + " should fail");
        }
    }

    auto const thirteen = oracle::pow_by_squaring(13, 13);
    c.expect(thirteen.str() == "302875106592253", "oracle 13^13");
    c.expect(mathkit::calculator("13^13").content == thirteen.str(), "calculator 13^13");

    std::uniform_int_distribution<int> coeff(-9, 9);
    char const * names[] = {"a", "b", "c", "d"};
    int systems = 0;
    while (systems < 200) {
        std::size_t const n = 1 + rng() % 4;
        std::vector<std::vector<oracle::BigInt>> a(n, std::vector<oracle::BigInt>(n));
        std::vector<oracle::BigInt> b(n);
        std::string src = "solve {";
        std::string unknowns;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t col = 0; col < n; ++col) {
                a[r][col] = coeff(rng);
                src += (col ? " + " : "") + std::string("(") + a[r][col].str() + ")*" + names[col];
            }
            b[r] = coeff(rng);
            src += " = " + b[r].str() + (r + 1 < n ? "; " : "");
            unknowns += (r ? ", " : "") + std::string(names[r]);
        }
        src += "} for {" + unknowns + "}";
        auto const expected = oracle::cramer(a, b);
        if (!expected) {
            continue;
        }
        ++systems;
        auto const system = mathkit::parse_system(src);
        auto const sol = mathkit::solve(system);
        std::map<std::string, mathkit::Rational> values;
        bool shaped = sol.kind == mathkit::SolutionKind::Unique && sol.assignments.size() == n;
        c.expect(shaped, "system " + src + " not uniquely solved");
        if (!shaped) {
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) {
            auto const v = mathkit::evaluate_constant(sol.assignments[i].second);
            bool const match = v && sol.assignments[i].first == names[i] && mathkit::render(*v) == (*expected)[i].str();
            c.expect(match, "system " + src + " disagrees with Cramer's rule");
            if (v) {
                values[sol.assignments[i].first] = *v;
            }
        }
        for (auto const & eq : system.equations) {
            auto const residual = mathkit::evaluate_constant(
                mathkit::substitute(mathkit::Expr::add({eq.lhs, mathkit::Expr::neg(eq.rhs)}), values));
            c.expect(residual && *residual == 0, "nonzero residual in " + src);
        }
    }
    return c.outcome("1000 expressions, 13^13, 200 systems (n <= 4)");
}

Outcome
retrieval_oracles()
{
    Checks c;
    std::mt19937_64 rng(4);
    std::size_t sixth_round_trials = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t const n = 1 + rng() % 200;
        std::size_t const dim = 4 + rng() % 12;
        auto const index = random_index(rng, n, dim);
        auto const q = random_vector(rng, dim);
        std::size_t const k = 1 + rng() % 10;
        auto const want = brute_force(index, q);
        auto const got = index.top_k(q, k);
        c.expect(got.size() == std::min(k, n), "top_k size");
        for (std::size_t i = 0; i < got.size() && i < want.size(); ++i) {
            c.expect(got[i].id == want[i].id, "top_k order differs from brute force");
        }

        std::size_t const batch = 1 + rng() % 4;
        retrieval::RetrievalSession s(index, q, "q");
        std::set<std::string> seen;
        for (auto const & h : s.first_batch(batch)) {
            seen.insert(h.id);
        }
        std::size_t rounds = 0;
        ErrorCode stop = ErrorCode::Io;
        for (;;) {
            try {
                for (auto const & h : s.next_batch(batch)) {
                    c.expect(seen.insert(h.id).second, "session repeated id " + h.id);
                }
                ++rounds;
            } catch (Error const & e) {
                stop = e.code();
                break;
            }
        }
        if (n >= batch * (retrieval::kMaxFeedbackRounds + 1)) {
            ++sixth_round_trials;
            c.expect(rounds == retrieval::kMaxFeedbackRounds && stop == ErrorCode::FeedbackExhausted,
                     "session did not stop at round six");
        } else {
            c.expect(stop == ErrorCode::FeedbackExhausted || stop == ErrorCode::IndexExhausted, "unexpected stop");
        }
    }
    c.expect(sixth_round_trials > 50, "too few trials reached round six");
    return c.outcome("100 indices; feedback ends at round six in " + std::to_string(sixth_round_trials) + " sessions");
}

Outcome
engine_protocol()
{
    Checks c;
    std::mt19937_64 rng(5);
    auto specs = math_tool_specs();
    specs.push_back(retriever_specs().front());
    auto const registry = engine::standard_registry(specs);
    auto const memory = math_memory(2);
    for (int trial = 0; trial < 100; ++trial) {
        llm::ScriptedBackend const backend(random_policy(rng));
        engine::EngineConfig cfg;
        cfg.max_turns = 2 + rng() % 14;
        cfg.conclude_counts_as_turn = rng() % 2 == 0;
        engine::ReasoningEngine const eng(cfg, registry, backend);
        auto const problem = hotpot_problem(rng() % 8);
        engine::RunResult run;
        try {
            run = eng.run(problem, memory);
        } catch (Error const & e) {
            c.expect(false, "run aborted: " + std::string(e.what()));
            continue;
        }
        auto const & msgs = run.trace.messages();
        std::size_t forced = 0;
        std::size_t tool_results = 0;
        for (std::size_t i = 0; i < msgs.size(); ++i) {
            c.expect(msgs[i].role == (i % 2 == 0 ? Role::Agent : Role::Model), "role alternation");
            forced += msgs[i].content == engine::kForcePrompt ? 1 : 0;
            tool_results += msgs[i].role == Role::Agent && msgs[i].phase == Phase::ToolResult ? 1 : 0;
        }
        auto const prefix = run.trace.memory_prefix();
        c.expect(std::equal(prefix.begin(), prefix.end(), memory.messages().begin(), memory.messages().end()),
                 "memory prefix changed");
        c.expect(forced <= 1, "more than one force-conclude prompt");
        c.expect(tool_results == run.tool_calls.size(), "tool results do not match tool calls");
        c.expect(run.model_turns <= cfg.max_turns, "turn budget exceeded");
        auto const again = eng.run(problem, memory);
        c.expect(again.trace == run.trace && again.answer == run.answer, "runs are not deterministic");
    }
    return c.outcome("100 random policies");
}

Outcome
self_consistency()
{
    Checks c;
    auto const tally = ensemble::self_consistency({"2", "0", "0", "0", "2"});
    c.expect(tally.winner == "0" && tally.winner_score == 3, "majority of [2,0,0,0,2]");
    auto const grouped = ensemble::self_consistency({"1/2", "0.5"}, ensemble::math_match);
    c.expect(grouped.classes.size() == 1 && grouped.winner_score == 2, "1/2 and 0.5 not grouped");
    c.expect(ensemble::ScOptions{}.k == 5, "default k");
    return c.outcome("voting examples and k = 5");
}

Outcome
harness_metrics()
{
    Checks c;
    auto const traces = bench::read_traces(data_path("fixtures/metrics_10.jsonl"));
    auto const m = bench::compute_metrics(traces);
    c.expect(m.n == 10 && m.correct == 7, "accuracy counts");
    c.expect(std::abs(m.accuracy - 0.7) < 1e-12, "accuracy");
    c.expect(m.tool_frequency && std::abs(*m.tool_frequency - 0.70) < 1e-12, "tool frequency");
    c.expect(m.tool_success && std::abs(*m.tool_success - 0.90) < 1e-12, "tool success");

    std::ostringstream persisted;
    for (auto const & t : traces) {
        bench::write_jsonl(persisted, t);
    }
    std::istringstream in(persisted.str());
    auto const reread = bench::read_traces(in);
    c.expect(reread == traces, "traces changed on round trip");
    c.expect(bench::compute_metrics(reread).to_json().dump() == m.to_json().dump(), "recomputed metrics differ");

    auto const report = bench::token_report(traces);
    c.expect(report.starts_with("| Methods | Generated Tokens |\n| --- | --- |\n| ChatCoT | 145.0 |"),
             "token report format: " + report);
    return c.outcome("accuracy 0.7, frequency 0.70, success 0.90, bit-identical recompute");
}

Outcome
shot_configuration()
{
    Checks c;
    auto const defaults = bench::EvalConfig::for_kind(DatasetKind::MathStyle, bench::Strategy::ChatCoT).memory;
    c.expect(defaults.n_retrieval == 2 && defaults.n_annotated == 3 && defaults.tool_knowledge, "MATH defaults");

    auto const tools = math_tool_specs();
    auto const annotated = memory::load_annotated_dialogues(data_path("annotated/math.json"));
    std::vector<memory::Exemplar> const retrieved{{"q1", "s1", "a1"}, {"q2", "s2", "a2"}};
    struct Row
    {
        bool tk, ratk, mrf;
    };
    for (auto const row : {Row{true, true, true}, Row{false, true, true}, Row{true, false, true}, Row{true, true, false},
                           Row{false, false, true}}) {
        memory::MemoryConfig cfg;
        cfg.tool_knowledge = row.tk;
        cfg.n_retrieval = row.ratk ? 2 : 0;
        cfg.n_annotated = row.mrf ? 3 : 0;
        auto const state = memory::init_memory(
            cfg, tools, row.ratk ? retrieved : std::vector<memory::Exemplar>{},
            {annotated.begin(), annotated.begin() + (row.mrf ? 3 : 0)});
        std::size_t tk = 0;
        std::size_t ratk = 0;
        std::size_t mrf = 0;
        for (auto const & m : state.messages()) {
            tk += m.phase == Phase::ToolKnowledge ? 1 : 0;
            ratk += m.phase == Phase::TaskKnowledge ? 1 : 0;
            mrf += m.phase == Phase::FormatExemplar ? 1 : 0;
        }
        std::size_t const mrf_len = annotated[0].turns.size() + annotated[1].turns.size() + annotated[2].turns.size();
        c.expect(tk == (row.tk ? 2u : 0u), "tool knowledge block");
        c.expect(ratk == (row.ratk ? 2u : 0u), "task knowledge block");
        c.expect(mrf == (row.mrf ? mrf_len : 0u), "reasoning format block");
        c.expect(state.memory_len() == state.size(), "memory not sealed");
    }
    return c.outcome("n_r = 2, n_a = 3; five ablation rows");
}

Outcome
live_smoke()
{
    llm::LiveConfig live;
    try {
        live = llm::live_config_from_env();
    } catch (Error const &) {
        return {Outcome::Status::Skip, "set CHATCOT_API_URL, CHATCOT_MODEL and CHATCOT_API_KEY to run"};
    }
    llm::LiveBackend const backend(live);
    bench::EvalResources res;
    res.backend = &backend;
    res.tools = memory::load_tool_specs(data_path("tools.json"));
    res.annotated = memory::load_annotated_dialogues(data_path("annotated/math.json"));
    res.train = bench::load_dataset(data_path("fixtures/math_train.jsonl"), DatasetKind::MathStyle);
    auto const problems = bench::load_dataset(data_path("fixtures/math_toy.jsonl"), DatasetKind::MathStyle);
    bench::Evaluator const ev(res, bench::EvalConfig::for_kind(DatasetKind::MathStyle, bench::Strategy::ChatCoT));
    auto const t = ev.run_one(problems[1]);
    if (t.answer.empty()) {
        return {Outcome::Status::Fail, t.notes.empty() ? "no answer extracted" : t.notes.back()};
    }
    return {Outcome::Status::Pass, "answer " + t.answer + " (gold " + t.gold + ")"};
}

} // namespace

int
main()
{
    using std::chrono::milliseconds;
    std::vector<Criterion> const criteria{
        {1, "prompt goldens", milliseconds(1000), prompt_goldens},
        {2, "case-study trace", milliseconds(1000), case_study},
        {3, "mathkit oracles", milliseconds(30000), mathkit_oracles},
        {4, "retrieval oracles", milliseconds(10000), retrieval_oracles},
        {5, "engine protocol", milliseconds(30000), engine_protocol},
        {6, "self-consistency", milliseconds(1000), self_consistency},
        {7, "harness metrics", milliseconds(5000), harness_metrics},
        {8, "shot configuration", milliseconds(1000), shot_configuration},
        {9, "live smoke test", milliseconds(300000), live_smoke},
    };

    int failed = 0;
    for (auto const & cr : criteria) {
        auto const t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = cr.body();
        } catch (std::exception const & e) {
            out = {Outcome::Status::Fail, std::string("exception: ") + e.what()};
        }
        auto const elapsed = std::chrono::duration_cast<milliseconds>(std::chrono::steady_clock::now() - t0);
        if (out.status == Outcome::Status::Pass && elapsed > cr.limit) {
            out = {Outcome::Status::Fail, "too slow"};
        }
        char const * status = out.status == Outcome::Status::Pass ? "PASS" : out.status == Outcome::Status::Skip ? "SKIP" : "FAIL";
        failed += out.status == Outcome::Status::Fail ? 1 : 0;
        std::printf("criterion %d %s  %-20s %6lld ms (limit %lld ms)  %s\n", cr.number, status, cr.title.c_str(),
                    static_cast<long long>(elapsed.count()), static_cast<long long>(cr.limit.count()), out.detail.c_str());
    }
    return failed == 0 ? 0 : 1;
}
