#include "chatcot/error.hpp"
#include "chatcot/llm.hpp"

#include "support/stub_server.hpp"

#include <doctest.h>

#include <atomic>
#include <mutex>

using namespace chatcot;
using namespace chatcot::llm;

namespace {

ErrorCode
code_of(auto && fn)
{
    try {
        fn();
    } catch (Error const & e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Io;
}

ModelRequest
request(Phase phase, std::string last = "To solve this sub-problem, which tool can we use?")
{
    ModelRequest r;
    r.messages = {
        {Role::Agent, "You should solve the problem step by step and you should follow the react in the history Q1",
         Phase::ProblemStart, 0},
        {Role::Model, "Step one.", Phase::Reasoning, 1},
        {Role::Agent, std::move(last), phase, 2},
    };
    r.phase = phase;
    return r;
}

ScriptedPolicy
policy_from(char const * text)
{
    return ScriptedPolicy::from_json(nlohmann::json::parse(text));
}

std::string
chat_reply(std::vector<std::string> const & contents, int completion_tokens)
{
    nlohmann::json choices = nlohmann::json::array();
    for (auto const & c : contents) {
        choices.push_back({{"message", {{"role", "assistant"}, {"content", c}}}});
    }
    return nlohmann::json{{"choices", choices}, {"usage", {{"completion_tokens", completion_tokens}}}}.dump();
}

} // namespace

TEST_CASE("scripted rules")
{
    ScriptedBackend const b(policy_from(R"({"rules": [{"phase": "tool_selection", "response": "Calculator"}]})"));
    CHECK(b.complete(request(Phase::ToolSelection)).completions == std::vector<std::string>{"Calculator"});
    CHECK(code_of([&] { (void)b.complete(request(Phase::Reasoning)); }) == ErrorCode::NoMatchingRule);

    ScriptedBackend const with_default(policy_from(R"({"rules": [], "default": "  \\boxed{1}  "})"));
    CHECK(with_default.complete(request(Phase::Reasoning)).completions.front() == "\\boxed{1}");
}

TEST_CASE("matcher fields")
{
    ScriptedBackend const b(policy_from(R"({
        "rules": [
            {"phase": "reasoning", "problem_contains": "Q2", "response": "other problem"},
            {"phase": "reasoning", "occurrence": 1, "sample": 3, "response": "second reasoning, sample 3"},
            {"phase": "reasoning", "occurrence": 1, "response": "second reasoning"},
            {"phase": "tool_args", "contains": "equation", "response": "1+1"},
            {"phase": "reasoning", "response": "fallback reasoning"}
        ]
    })"));
    auto r = request(Phase::Reasoning, "Results: 2.\nContinue reasoning");
    CHECK(b.complete(r).completions.front() == "second reasoning");
    r.sample_seed = 3;
    CHECK(b.complete(r).completions.front() == "second reasoning, sample 3");
    r.messages.erase(r.messages.begin() + 1, r.messages.end());
    r.messages.push_back({Role::Model, "x", Phase::ToolArgs, 1});
    r.messages.push_back({Role::Agent, "more", Phase::ToolResult, 2});
    CHECK(b.complete(r).completions.front() == "fallback reasoning");
    r.messages[0].content = "problem Q2";
    CHECK(b.complete(r).completions.front() == "other problem");

    CHECK(b.complete(request(Phase::ToolArgs, "Give me the equation to calculate")).completions.front() == "1+1");
    CHECK(code_of([&] { (void)b.complete(request(Phase::ToolArgs, "Give me the query")); }) == ErrorCode::NoMatchingRule);
}

TEST_CASE("scripted backend is a pure function of policy and request")
{
    ScriptedBackend const b(policy_from(R"({"rules": [{"sample": 1, "response": "a b"}], "default": "c d e"})"));
    auto r = request(Phase::Reasoning);
    auto const first = b.complete(r);
    for (int i = 0; i < 10; ++i) {
        auto const again = b.complete(r);
        CHECK(again.completions == first.completions);
        CHECK(again.generated_tokens == first.generated_tokens);
    }
    r.n_samples = 3;
    r.temperature = 0.7;
    auto const many = b.complete(r);
    CHECK(many.completions == std::vector<std::string>{"c d e", "a b", "c d e"});
    CHECK(many.generated_tokens == 8);
}

TEST_CASE("context limit is surfaced")
{
    ScriptedBackend const b(policy_from(R"({"rules": [], "default": "ok", "max_context_tokens": 5})"));
    CHECK(code_of([&] { (void)b.complete(request(Phase::Reasoning)); }) == ErrorCode::ContextTooLong);
}

TEST_CASE("request validation")
{
    ScriptedBackend const b(policy_from(R"({"rules": [], "default": "ok"})"));
    ModelRequest empty;
    CHECK(code_of([&] { (void)b.complete(empty); }) == ErrorCode::InvalidRequest);
    auto r = request(Phase::Reasoning);
    r.n_samples = 2;
    CHECK(code_of([&] { (void)b.complete(r); }) == ErrorCode::InvalidRequest);
}

TEST_CASE("policy json round trip")
{
    auto const p = policy_from(R"({"rules": [{"phase": "feedback", "contains": "useful", "occurrence": 2, "sample": 4,
                                               "problem_contains": "Q", "response": "No"}],
                                   "default": "d", "max_context_tokens": 100})");
    auto const again = ScriptedPolicy::from_json(p.to_json());
    CHECK(again.to_json() == p.to_json());
    CHECK(code_of([] { (void)ScriptedPolicy::from_json(nlohmann::json::parse(R"({"rules": [{"phase": "nope", "response": ""}]})")); })
          != ErrorCode::Io);
}

TEST_CASE("count_tokens")
{
    std::vector<std::string> const one{"a b c"};
    CHECK(count_tokens(one) == 3);
    CHECK(count_tokens({}) == 0);
    std::vector<std::string> const several{"x  y", "\n z\t", ""};
    CHECK(count_tokens(several) == 3);
}

TEST_CASE("live backend talks chat completions")
{
    std::mutex mu;
    nlohmann::json seen_body;
    std::string seen_auth;
    testing_support::StubServer server("/v1/chat/completions", [&](httplib::Request const & req, httplib::Response & res) {
        std::lock_guard lock(mu);
        seen_body = nlohmann::json::parse(req.body);
        seen_auth = req.get_header_value("Authorization");
        res.set_content(chat_reply({"  Calculator \n"}, 7), "application/json");
    });
    LiveBackend const live({server.url("/v1/chat/completions"), "test-model", "secret-key"});
    auto const out = live.complete(request(Phase::ToolSelection));
    CHECK(out.completions == std::vector<std::string>{"Calculator"});
    CHECK(out.generated_tokens == 7);
    CHECK(seen_auth == "Bearer secret-key");
    CHECK(seen_body["model"] == "test-model");
    CHECK(seen_body["n"] == 1);
    CHECK(seen_body["temperature"] == 0.0);
    REQUIRE(seen_body["messages"].size() == 3);
    CHECK(seen_body["messages"][0]["role"] == "user");
    CHECK(seen_body["messages"][1]["role"] == "assistant");
    CHECK(seen_body["messages"][1]["content"] == "Step one.");
}

TEST_CASE("live backend retries transient failures")
{
    std::atomic<int> calls = 0;
    testing_support::StubServer server("/c", [&](httplib::Request const &, httplib::Response & res) {
        int const n = ++calls;
        if (n == 1) {
            res.status = 503;
        } else if (n == 2) {
            res.status = 429;
        } else {
            res.set_content(chat_reply({"fine"}, 1), "application/json");
        }
    });
    std::vector<std::chrono::milliseconds> waits;
    LiveBackend const live({server.url("/c"), "m", "k", 3, std::chrono::milliseconds(10)},
                           [&](std::chrono::milliseconds d) { waits.push_back(d); });
    CHECK(live.complete(request(Phase::Reasoning)).completions.front() == "fine");
    CHECK(calls == 3);
    CHECK(waits == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(10), std::chrono::milliseconds(20)});
}

TEST_CASE("live backend gives up after three attempts without leaking the key")
{
    std::atomic<int> calls = 0;
    testing_support::StubServer server("/c", [&](httplib::Request const &, httplib::Response & res) {
        ++calls;
        res.status = 500;
        res.set_content("upstream down", "text/plain");
    });
    LiveBackend const live({server.url("/c"), "m", "super-secret", 3, std::chrono::milliseconds(1)},
                           [](std::chrono::milliseconds) {});
    try {
        (void)live.complete(request(Phase::Reasoning));
        FAIL("expected TransportError");
    } catch (Error const & e) {
        CHECK(e.code() == ErrorCode::TransportError);
        CHECK(std::string(e.what()).find("super-secret") == std::string::npos);
    }
    CHECK(calls == 3);
}

TEST_CASE("live backend does not retry client errors")
{
    std::atomic<int> calls = 0;
    testing_support::StubServer server("/c", [&](httplib::Request const & req, httplib::Response & res) {
        ++calls;
        res.status = 400;
        auto const body = nlohmann::json::parse(req.body);
        res.set_content(body["max_tokens"] == 1 ? "bad request" : "maximum context length exceeded", "text/plain");
    });
    LiveBackend const live({server.url("/c"), "m", "", 3, std::chrono::milliseconds(1)}, [](std::chrono::milliseconds) {});
    CHECK(code_of([&] { (void)live.complete(request(Phase::Reasoning)); }) == ErrorCode::ContextTooLong);
    CHECK(calls == 1);
    auto r = request(Phase::Reasoning);
    r.max_new_tokens = 1;
    CHECK(code_of([&] { (void)live.complete(r); }) == ErrorCode::TransportError);
    CHECK(calls == 2);
}

TEST_CASE("live backend unreachable endpoint")
{
    int sleeps = 0;
    LiveBackend const live({"http://127.0.0.1:1/c", "m", "", 3, std::chrono::milliseconds(1), std::chrono::seconds(2)},
                           [&](std::chrono::milliseconds) { ++sleeps; });
    CHECK(code_of([&] { (void)live.complete(request(Phase::Reasoning)); }) == ErrorCode::TransportError);
    CHECK(sleeps == 2);
}

TEST_CASE("sampling without server-side n")
{
    std::atomic<int> calls = 0;
    testing_support::StubServer server("/c", [&](httplib::Request const & req, httplib::Response & res) {
        auto const body = nlohmann::json::parse(req.body);
        int const n = body["n"].get<int>();
        std::vector<std::string> contents;
        for (int i = 0; i < n; ++i) {
            contents.push_back("answer " + std::to_string(++calls));
        }
        res.set_content(chat_reply(contents, 2 * n), "application/json");
    });
    auto r = request(Phase::Reasoning);
    r.n_samples = 3;
    r.temperature = 0.7;

    LiveBackend const batched({server.url("/c"), "m", "", 3, std::chrono::milliseconds(1), std::chrono::seconds(10), true});
    auto const one_call = batched.complete(r);
    CHECK(one_call.completions.size() == 3);
    CHECK(one_call.generated_tokens == 6);

    LiveBackend const sequential({server.url("/c"), "m", "", 3, std::chrono::milliseconds(1), std::chrono::seconds(10), false});
    auto const three_calls = sequential.complete(r);
    CHECK(three_calls.completions == std::vector<std::string>{"answer 4", "answer 5", "answer 6"});
    CHECK(three_calls.generated_tokens == 6);
}
