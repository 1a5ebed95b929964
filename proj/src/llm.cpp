#include "chatcot/llm.hpp"

#include "chatcot/error.hpp"
#include "chatcot/text.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace chatcot::llm {

namespace {

std::string_view
wire_role(Role role) noexcept
{
    return role == Role::Agent ? "user" : "assistant";
}

std::string
snippet(std::string const & body)
{
    constexpr std::size_t kMax = 200;
    return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool
retryable(int status) noexcept
{
    return status == 429 || status >= 500;
}

} // namespace

void
ModelRequest::validate() const
{
    if (messages.empty()) {
        throw Error(ErrorCode::InvalidRequest, "request has no messages");
    }
    if (n_samples == 0) {
        throw Error(ErrorCode::InvalidRequest, "n_samples must be positive");
    }
    if (n_samples >= 2 && temperature <= 0.0) {
        throw Error(ErrorCode::InvalidRequest, "sampling several completions needs a positive temperature");
    }
    if (temperature < 0.0) {
        throw Error(ErrorCode::InvalidRequest, "temperature must not be negative");
    }
    if (max_new_tokens == 0) {
        throw Error(ErrorCode::InvalidRequest, "max_new_tokens must be positive");
    }
}

std::size_t
count_tokens(std::span<std::string const> texts) noexcept
{
    std::size_t n = 0;
    for (auto const & t : texts) {
        n += text::whitespace_token_count(t);
    }
    return n;
}

bool
Rule::matches(ModelRequest const & request) const
{
    if (phase && *phase != request.phase) {
        return false;
    }
    if (sample && *sample != request.sample_seed) {
        return false;
    }
    if (contains) {
        auto it = std::find_if(request.messages.rbegin(), request.messages.rend(),
                               [](ChatMessage const & m) { return m.role == Role::Agent; });
        if (it == request.messages.rend() || it->content.find(*contains) == std::string::npos) {
            return false;
        }
    }
    if (problem_contains) {
        auto it = std::find_if(request.messages.rbegin(), request.messages.rend(),
                               [](ChatMessage const & m) { return m.phase == Phase::ProblemStart; });
        if (it == request.messages.rend() || it->content.find(*problem_contains) == std::string::npos) {
            return false;
        }
    }
    if (occurrence) {
        auto const seen = std::count_if(request.messages.begin(), request.messages.end(), [&](ChatMessage const & m) {
            return m.role == Role::Model && m.phase == request.phase;
        });
        if (static_cast<std::size_t>(seen) != *occurrence) {
            return false;
        }
    }
    return true;
}

ScriptedPolicy
ScriptedPolicy::from_json(nlohmann::json const & j)
{
    ScriptedPolicy p;
    try {
        for (auto const & r : j.at("rules")) {
            Rule rule;
            if (r.contains("phase")) {
                rule.phase = phase_from_string(r.at("phase").get<std::string>());
            }
            if (r.contains("contains")) {
                rule.contains = r.at("contains").get<std::string>();
            }
            if (r.contains("problem_contains")) {
                rule.problem_contains = r.at("problem_contains").get<std::string>();
            }
            if (r.contains("occurrence")) {
                rule.occurrence = r.at("occurrence").get<std::size_t>();
            }
            if (r.contains("sample")) {
                rule.sample = r.at("sample").get<std::uint64_t>();
            }
            rule.response = r.at("response").get<std::string>();
            p.rules.push_back(std::move(rule));
        }
        if (j.contains("default")) {
            p.fallback = j.at("default").get<std::string>();
        }
        if (j.contains("max_context_tokens")) {
            p.max_context_tokens = j.at("max_context_tokens").get<std::size_t>();
        }
    } catch (nlohmann::json::exception const & e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed scripted policy: ") + e.what());
    }
    return p;
}

ScriptedPolicy
ScriptedPolicy::load(std::filesystem::path const & path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (nlohmann::json::parse_error const & e) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
}

nlohmann::json
ScriptedPolicy::to_json() const
{
    nlohmann::json rules_json = nlohmann::json::array();
    for (auto const & r : rules) {
        nlohmann::json o;
        if (r.phase) {
            o["phase"] = std::string(to_string(*r.phase));
        }
        if (r.contains) {
            o["contains"] = *r.contains;
        }
        if (r.problem_contains) {
            o["problem_contains"] = *r.problem_contains;
        }
        if (r.occurrence) {
            o["occurrence"] = *r.occurrence;
        }
        if (r.sample) {
            o["sample"] = *r.sample;
        }
        o["response"] = r.response;
        rules_json.push_back(std::move(o));
    }
    nlohmann::json j{{"rules", std::move(rules_json)}};
    if (fallback) {
        j["default"] = *fallback;
    }
    if (max_context_tokens) {
        j["max_context_tokens"] = *max_context_tokens;
    }
    return j;
}

ScriptedBackend::ScriptedBackend(ScriptedPolicy policy)
    : policy_(std::move(policy))
{}

std::string const &
ScriptedBackend::respond(ModelRequest const & request) const
{
    for (auto const & rule : policy_.rules) {
        if (rule.matches(request)) {
            return rule.response;
        }
    }
    if (policy_.fallback) {
        return *policy_.fallback;
    }
    throw Error(ErrorCode::NoMatchingRule,
                "no scripted rule for phase " + std::string(to_string(request.phase)) + " after: "
                    + snippet(request.messages.back().content));
}

ModelResponse
ScriptedBackend::complete(ModelRequest const & request) const
{
    request.validate();
    if (policy_.max_context_tokens) {
        std::size_t context = 0;
        for (auto const & m : request.messages) {
            context += text::whitespace_token_count(m.content);
        }
        if (context > *policy_.max_context_tokens) {
            throw Error(ErrorCode::ContextTooLong, "request has " + std::to_string(context) + " tokens");
        }
    }
    ModelResponse out;
    for (std::size_t i = 0; i < request.n_samples; ++i) {
        ModelRequest one = request;
        one.sample_seed = request.sample_seed + i;
        out.completions.emplace_back(text::trim(respond(one)));
    }
    out.generated_tokens = count_tokens(out.completions);
    return out;
}

LiveBackend::LiveBackend(LiveConfig config, Sleeper sleeper)
    : config_(std::move(config))
    , endpoint_(http::parse_endpoint(config_.url))
    , sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }))
{
    if (config_.max_attempts == 0 || config_.max_attempts > 3) {
        throw Error(ErrorCode::InvalidConfig, "max_attempts must be between 1 and 3");
    }
}

nlohmann::json
LiveBackend::request_body(ModelRequest const & request, std::string const & model, std::size_t n)
{
    nlohmann::json messages = nlohmann::json::array();
    for (auto const & m : request.messages) {
        messages.push_back({{"role", wire_role(m.role)}, {"content", m.content}});
    }
    return {
        {"model", model},
        {"messages", std::move(messages)},
        {"temperature", request.temperature},
        {"n", n},
        {"max_tokens", request.max_new_tokens},
    };
}

ModelResponse
LiveBackend::post_once(ModelRequest const & request, std::size_t n) const
{
    auto const body = request_body(request, config_.model, n);
    http::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace_back("Authorization", "Bearer " + config_.api_key);
    }

    auto delay = config_.initial_backoff;
    std::string last_failure;
    for (std::size_t attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            sleeper_(delay);
            delay *= 2;
        }
        http::Response response;
        try {
            response = http::post_json(endpoint_, body, headers, config_.timeout);
        } catch (Error const & e) {
            last_failure = e.what();
            continue;
        }
        if (response.status == 200) {
            ModelResponse out;
            try {
                auto const j = nlohmann::json::parse(response.body);
                for (auto const & choice : j.at("choices")) {
                    out.completions.emplace_back(text::trim(choice.at("message").at("content").get<std::string>()));
                }
                if (j.contains("usage") && j["usage"].contains("completion_tokens")) {
                    out.generated_tokens = j["usage"]["completion_tokens"].get<std::size_t>();
                } else {
                    out.generated_tokens = count_tokens(out.completions);
                }
            } catch (nlohmann::json::exception const & e) {
                throw Error(ErrorCode::TransportError, std::string("malformed completion response: ") + e.what());
            }
            if (out.completions.empty()) {
                throw Error(ErrorCode::TransportError, "completion response has no choices");
            }
            return out;
        }
        last_failure = "HTTP " + std::to_string(response.status) + ": " + snippet(response.body);
        if (!retryable(response.status)) {
            if (response.status == 400 && text::contains_icase(response.body, "context")) {
                throw Error(ErrorCode::ContextTooLong, last_failure);
            }
            throw Error(ErrorCode::TransportError, last_failure);
        }
    }
    throw Error(ErrorCode::TransportError,
                "giving up after " + std::to_string(config_.max_attempts) + " attempts: " + last_failure);
}

ModelResponse
LiveBackend::complete(ModelRequest const & request) const
{
    request.validate();
    if (request.n_samples == 1 || config_.supports_n) {
        auto out = post_once(request, request.n_samples);
        if (out.completions.size() > request.n_samples) {
            out.completions.resize(request.n_samples);
        }
        return out;
    }
    ModelResponse out;
    for (std::size_t i = 0; i < request.n_samples; ++i) {
        auto one = post_once(request, 1);
        out.completions.push_back(std::move(one.completions.front()));
        out.generated_tokens += one.generated_tokens;
    }
    return out;
}

LiveConfig
live_config_from_env(LiveConfig base)
{
    auto fill = [](std::string & field, char const * variable) {
        if (field.empty()) {
            if (char const * v = std::getenv(variable)) {
                field = v;
            }
        }
        if (field.empty()) {
            throw Error(ErrorCode::InvalidConfig, std::string("missing ") + variable);
        }
    };
    fill(base.url, kApiUrlVariable);
    fill(base.model, kModelVariable);
    fill(base.api_key, kApiKeyVariable);
    return base;
}

} // namespace chatcot::llm
