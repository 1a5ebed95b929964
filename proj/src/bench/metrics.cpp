#include "chatcot/bench/metrics.hpp"

#include "chatcot/bench/answer.hpp"
#include "chatcot/bench/baselines.hpp"
#include "chatcot/error.hpp"
#include "chatcot/text.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace chatcot::bench {

namespace {

std::string
fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

nlohmann::json
to_json(RunTrace const & t)
{
    nlohmann::json calls = nlohmann::json::array();
    for (auto const & c : t.tool_calls) {
        calls.push_back({{"tool", c.tool}, {"ok", c.ok}});
    }
    return {
        {"problem_id", t.problem_id},
        {"category", t.category},
        {"dataset", to_string(t.dataset)},
        {"gold", t.gold},
        {"strategy", t.strategy},
        {"samples", t.samples},
        {"messages", messages_to_json(t.messages)},
        {"memory_len", t.memory_len},
        {"answer", t.answer},
        {"token_count", t.token_count},
        {"tool_calls", calls},
        {"forced_conclusion", t.forced_conclusion},
        {"generated_tokens", t.generated_tokens},
        {"notes", t.notes},
    };
}

RunTrace
trace_from_json(nlohmann::json const & j)
{
    try {
        RunTrace t;
        t.problem_id = j.at("problem_id").get<std::string>();
        t.category = j.value("category", "");
        t.dataset = dataset_kind_from_string(j.value("dataset", "math"));
        t.gold = j.value("gold", "");
        t.strategy = j.value("strategy", "");
        t.samples = j.value("samples", std::size_t{1});
        auto const & msgs = j.at("messages");
        for (std::size_t i = 0; i < msgs.size(); ++i) {
            t.messages.push_back(message_from_json(msgs[i], i));
        }
        t.memory_len = j.value("memory_len", std::size_t{0});
        t.answer = j.at("answer").get<std::string>();
        t.token_count = j.value("token_count", std::size_t{0});
        for (auto const & c : j.value("tool_calls", nlohmann::json::array())) {
            t.tool_calls.push_back({c.at("tool").get<std::string>(), c.at("ok").get<bool>()});
        }
        t.forced_conclusion = j.value("forced_conclusion", false);
        t.generated_tokens = j.value("generated_tokens", std::size_t{0});
        t.notes = j.value("notes", std::vector<std::string>{});
        return t;
    } catch (nlohmann::json::exception const & e) {
        throw Error(ErrorCode::MalformedRecord, e.what());
    }
}

void
write_jsonl(std::ostream & out, RunTrace const & trace)
{
    out << to_json(trace).dump() << '\n';
}

std::vector<RunTrace>
read_traces(std::istream & in)
{
    std::vector<RunTrace> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        try {
            out.push_back(trace_from_json(nlohmann::json::parse(line)));
        } catch (nlohmann::json::exception const & e) {
            throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + e.what());
        } catch (Error const & e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<RunTrace>
read_traces(std::filesystem::path const & path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read " + path.string());
    }
    return read_traces(in);
}

bool
is_correct(RunTrace const & trace)
{
    if (trace.answer.empty() || trace.gold.empty()) {
        return false;
    }
    EquivOptions opts;
    opts.qa = trace.dataset == DatasetKind::HotpotStyle;
    return answer_equiv(trace.answer, trace.gold, opts);
}

Metrics
compute_metrics(std::span<RunTrace const> traces)
{
    Metrics m;
    m.n = traces.size();
    std::size_t tokens = 0;
    for (auto const & t : traces) {
        bool const correct = is_correct(t);
        m.correct += correct ? 1 : 0;
        tokens += t.generated_tokens;
        bool used = false;
        for (auto const & c : t.tool_calls) {
            ++m.tool_invocations;
            if (c.ok) {
                ++m.tool_successes;
                used = true;
            }
        }
        m.problems_using_tools += used ? 1 : 0;
        auto & cat = m.per_category[t.category];
        ++cat.n;
        cat.correct += correct ? 1 : 0;
    }
    for (auto & [name, cat] : m.per_category) {
        cat.accuracy = static_cast<double>(cat.correct) / static_cast<double>(cat.n);
    }
    if (m.n > 0) {
        m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.n);
        m.avg_generated_tokens = static_cast<double>(tokens) / static_cast<double>(m.n);
        m.tool_frequency = static_cast<double>(m.problems_using_tools) / static_cast<double>(m.n);
    }
    if (m.tool_invocations > 0) {
        m.tool_success = static_cast<double>(m.tool_successes) / static_cast<double>(m.tool_invocations);
    }
    return m;
}

nlohmann::json
Metrics::to_json() const
{
    nlohmann::json cats = nlohmann::json::object();
    for (auto const & [name, c] : per_category) {
        cats[name] = {{"n", c.n}, {"correct", c.correct}, {"accuracy", c.accuracy}};
    }
    return {
        {"n", n},
        {"correct", correct},
        {"accuracy", accuracy},
        {"avg_generated_tokens", avg_generated_tokens},
        {"tool_invocations", tool_invocations},
        {"tool_successes", tool_successes},
        {"problems_using_tools", problems_using_tools},
        {"tool_frequency", tool_frequency ? nlohmann::json(*tool_frequency) : nlohmann::json(nullptr)},
        {"tool_success", tool_success ? nlohmann::json(*tool_success) : nlohmann::json(nullptr)},
        {"per_category", cats},
    };
}

std::string
strategy_label(RunTrace const & trace)
{
    std::string label;
    try {
        label = std::string(display_name(strategy_from_string(trace.strategy)));
    } catch (Error const &) {
        label = trace.strategy;
    }
    if (trace.samples > 1) {
        label += " + SC";
    }
    return label;
}

std::string
token_report(std::span<RunTrace const> traces)
{
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::size_t, std::size_t>> sums;
    for (auto const & t : traces) {
        auto const label = strategy_label(t);
        auto [it, fresh] = sums.try_emplace(label, 0, 0);
        if (fresh) {
            order.push_back(label);
        }
        it->second.first += t.generated_tokens;
        ++it->second.second;
    }
    std::string out = "| Methods | Generated Tokens |\n| --- | --- |\n";
    for (auto const & label : order) {
        auto const [total, n] = sums[label];
        out += "| " + label + " | " + fixed(static_cast<double>(total) / static_cast<double>(n), 1) + " |\n";
    }
    return out;
}

std::string
format_metrics(Metrics const & m)
{
    auto pct = [](std::optional<double> v) { return v ? fixed(*v * 100.0, 1) + "%" : std::string("n/a"); };
    std::string out;
    out += "problems: " + std::to_string(m.n) + "\n";
    out += "accuracy: " + fixed(m.accuracy * 100.0, 1) + "% (" + std::to_string(m.correct) + "/" + std::to_string(m.n) + ")\n";
    out += "avg generated tokens: " + fixed(m.avg_generated_tokens, 1) + "\n";
    out += "tool frequency: " + pct(m.tool_frequency) + "\n";
    out += "tool success: " + pct(m.tool_success) + " (" + std::to_string(m.tool_successes) + "/" +
           std::to_string(m.tool_invocations) + ")\n";
    if (!m.per_category.empty()) {
        out += "| Category | N | Accuracy |\n| --- | --- | --- |\n";
        for (auto const & [name, c] : m.per_category) {
            out += "| " + (name.empty() ? std::string("-") : name) + " | " + std::to_string(c.n) + " | " +
                   fixed(c.accuracy * 100.0, 1) + " |\n";
        }
    }
    return out;
}

} // namespace chatcot::bench
