#pragma once

#include "chatcot/conversation.hpp"
#include "chatcot/http.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chatcot::llm {

struct ModelRequest
{
    std::vector<ChatMessage> messages;
    /// Phase the reply will be tagged with; scripted rules match on it.
    Phase phase = Phase::Reasoning;
    double temperature = 0.0;
    std::size_t max_new_tokens = 512;
    std::size_t n_samples = 1;
    /// Distinguishes otherwise identical requests in a sampled ensemble.
    std::uint64_t sample_seed = 0;

    /// Throws InvalidRequest.
    void validate() const;
};

struct ModelResponse
{
    std::vector<std::string> completions;
    std::size_t generated_tokens = 0;
};

/// Implementations must allow concurrent complete() calls.
class Backend
{
public:
    virtual ~Backend() = default;
    virtual ModelResponse complete(ModelRequest const & request) const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

/// Whitespace-delimited token count, summed.
std::size_t count_tokens(std::span<std::string const> texts) noexcept;

struct Rule
{
    std::optional<Phase> phase;
    /// Substring of the last agent message.
    std::optional<std::string> contains;
    /// Substring of the problem statement message.
    std::optional<std::string> problem_contains;
    /// Number of earlier model replies in the same phase.
    std::optional<std::size_t> occurrence;
    std::optional<std::uint64_t> sample;
    std::string response;

    [[nodiscard]] bool matches(ModelRequest const & request) const;
};

struct ScriptedPolicy
{
    std::vector<Rule> rules;
    std::optional<std::string> fallback;
    /// Requests whose whitespace token count exceeds this fail with ContextTooLong.
    std::optional<std::size_t> max_context_tokens;

    static ScriptedPolicy from_json(nlohmann::json const & j);
    static ScriptedPolicy load(std::filesystem::path const & path);
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Deterministic test double: the first matching rule answers.
class ScriptedBackend final : public Backend
{
public:
    explicit ScriptedBackend(ScriptedPolicy policy);

    ModelResponse complete(ModelRequest const & request) const override;
    [[nodiscard]] std::string name() const override { return "scripted"; }

    [[nodiscard]] ScriptedPolicy const & policy() const noexcept { return policy_; }

private:
    [[nodiscard]] std::string const & respond(ModelRequest const & request) const;

    ScriptedPolicy policy_;
};

inline constexpr char const * kApiKeyVariable = "CHATCOT_API_KEY";
inline constexpr char const * kApiUrlVariable = "CHATCOT_API_URL";
inline constexpr char const * kModelVariable = "CHATCOT_MODEL";

struct LiveConfig
{
    std::string url;
    std::string model;
    /// Never logged or included in error messages.
    std::string api_key;
    std::size_t max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::seconds timeout{120};
    /// Whether the endpoint honours "n" > 1 in a single request.
    bool supports_n = true;
};

/// Chat-completions style client. Retries transport failures, 429 and 5xx
/// with exponential backoff.
/// Fills url, model and key from the environment where the given values
/// are empty. Throws InvalidConfig when any of them is still missing.
LiveConfig live_config_from_env(LiveConfig base = {});

class LiveBackend final : public Backend
{
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit LiveBackend(LiveConfig config, Sleeper sleeper = {});

    ModelResponse complete(ModelRequest const & request) const override;
    [[nodiscard]] std::string name() const override { return "live"; }

    [[nodiscard]] static nlohmann::json request_body(ModelRequest const & request, std::string const & model, std::size_t n);

private:
    ModelResponse post_once(ModelRequest const & request, std::size_t n) const;

    LiveConfig config_;
    http::Endpoint endpoint_;
    Sleeper sleeper_;
};

} // namespace chatcot::llm
