#include "chatcot/bench/evaluate.hpp"

#include "chatcot/bench/answer.hpp"
#include "chatcot/ensemble.hpp"
#include "chatcot/error.hpp"
#include "chatcot/text.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <optional>
#include <thread>

namespace chatcot::bench {

namespace {

constexpr std::string_view kRetrieverName = "Retriever";

ensemble::Equivalence
equivalence_for(DatasetKind kind)
{
    if (kind == DatasetKind::HotpotStyle) {
        return [](std::string_view a, std::string_view b) { return answer_equiv(a, b, {true, true}); };
    }
    return ensemble::math_match;
}

RunTrace
skeleton(ProblemRecord const & problem, EvalConfig const & cfg)
{
    RunTrace t;
    t.problem_id = problem.id;
    t.category = problem.category;
    t.dataset = problem.dataset;
    t.gold = problem.answer.value_or("");
    t.strategy = std::string(to_string(cfg.strategy));
    t.samples = cfg.k;
    return t;
}

void
fill_from_run(RunTrace & t, engine::RunResult const & run)
{
    t.messages = run.trace.messages();
    t.memory_len = run.trace.memory_len();
    t.answer = run.answer;
    t.token_count = 0;
    for (auto const & m : t.messages) {
        t.token_count += text::whitespace_token_count(m.content);
    }
    t.tool_calls.clear();
    for (auto const & c : run.tool_calls) {
        t.tool_calls.push_back({c.tool, c.ok});
    }
    t.forced_conclusion = run.forced_conclusion;
    t.generated_tokens = run.generated_tokens;
    t.notes.insert(t.notes.end(), run.notes.begin(), run.notes.end());
}

} // namespace

EvalConfig
EvalConfig::for_kind(DatasetKind kind, Strategy strategy)
{
    EvalConfig c;
    c.kind = kind;
    c.strategy = strategy;
    if (kind == DatasetKind::HotpotStyle) {
        c.memory = memory::hotpot_defaults();
        c.shots = kHotpotShots;
    }
    return c;
}

std::vector<memory::ToolSpec>
tools_for(DatasetKind kind, std::vector<memory::ToolSpec> const & all)
{
    std::vector<memory::ToolSpec> out;
    for (auto const & t : all) {
        bool const retriever = t.name == kRetrieverName;
        if (retriever == (kind == DatasetKind::HotpotStyle)) {
            out.push_back(t);
        }
    }
    return out;
}

std::vector<ProblemRecord>
exemplar_pool(std::vector<ProblemRecord> const & train)
{
    std::vector<ProblemRecord> out;
    out.reserve(train.size());
    for (auto r : train) {
        if ((!r.solution || r.solution->empty()) && r.answer) {
            r.solution = "So the answer is \\boxed{" + *r.answer + "}.";
        }
        out.push_back(std::move(r));
    }
    return out;
}

Evaluator::Evaluator(EvalResources resources, EvalConfig config)
    : resources_(std::move(resources))
    , config_(std::move(config))
{
    if (resources_.backend == nullptr) {
        throw Error(ErrorCode::InvalidConfig, "no backend configured");
    }
    if (config_.k == 0 || config_.workers == 0) {
        throw Error(ErrorCode::InvalidConfig, "k and workers must be positive");
    }
    config_.engine.validate();
    if (!resources_.provider) {
        resources_.provider = std::make_shared<retrieval::HashEmbedder const>();
    }
    tools_ = tools_for(config_.kind, resources_.tools);
    registry_ = engine::standard_registry(tools_);

    auto const pool = exemplar_pool(resources_.train);
    for (auto const & r : pool) {
        if (fixed_shots_.size() == config_.shots) {
            break;
        }
        if (r.solution) {
            fixed_shots_.push_back({r.statement, *r.solution, r.answer.value_or("")});
        }
    }

    bool const needs_selector = (config_.strategy == Strategy::ChatCoT && config_.memory.n_retrieval > 0) ||
                                config_.strategy == Strategy::CoTwRetri;
    if (needs_selector) {
        if (pool.empty()) {
            throw Error(ErrorCode::InvalidConfig, "retrieved exemplars need a training set");
        }
        selector_ = std::make_unique<retrieval::ExemplarSelector>(*resources_.provider, pool);
    }
    if (config_.strategy == Strategy::ChatCoT) {
        if (config_.memory.n_annotated > resources_.annotated.size()) {
            throw Error(ErrorCode::InvalidConfig,
                        "need " + std::to_string(config_.memory.n_annotated) + " annotated dialogues, have " +
                            std::to_string(resources_.annotated.size()));
        }
        if (config_.memory.tool_knowledge && tools_.empty()) {
            throw Error(ErrorCode::InvalidConfig, "tool knowledge needs tools for this dataset");
        }
    }
}

ConversationState
Evaluator::memory_for(ProblemRecord const & problem) const
{
    std::vector<memory::Exemplar> retrieved;
    if (selector_ && config_.memory.n_retrieval > 0) {
        retrieved = selector_->select(problem.statement, config_.memory.n_retrieval);
    }
    std::vector<memory::AnnotatedDialogue> const annotated(
        resources_.annotated.begin(), resources_.annotated.begin() + static_cast<long>(config_.memory.n_annotated));
    return memory::init_memory(config_.memory, tools_, retrieved, annotated);
}

std::vector<ChatMessage>
Evaluator::baseline_prompt(ProblemRecord const & problem) const
{
    auto const exemplars =
        config_.strategy == Strategy::CoTwRetri ? selector_->select(problem.statement, config_.shots) : fixed_shots_;
    std::string evidence;
    if (!problem.paragraphs.empty() && config_.evidence_paragraphs > 0) {
        auto const index = retrieval::paragraph_index(*resources_.provider, problem);
        auto const hits = retrieval::top_k(index, *resources_.provider, problem.statement, config_.evidence_paragraphs);
        evidence = retrieval::render_hits(index, hits);
    }
    return build_baseline_prompt(config_.strategy, problem, exemplars, tools_, evidence);
}

RunTrace
Evaluator::run_chatcot(ProblemRecord const & problem) const
{
    auto t = skeleton(problem, config_);
    auto const memory = memory_for(problem);
    if (config_.k == 1) {
        engine::ReasoningEngine const engine(config_.engine, registry_, *resources_.backend, resources_.provider);
        fill_from_run(t, engine.run(problem, memory));
        return t;
    }
    auto const equiv = equivalence_for(problem.dataset);
    auto const sc = ensemble::run_sc(
        config_.engine, registry_, *resources_.backend, problem, memory, {config_.k, config_.sample_temperature, equiv});
    std::size_t tokens = 0;
    engine::RunResult const * chosen = nullptr;
    for (auto const & run : sc.runs) {
        tokens += run.generated_tokens;
        if (chosen == nullptr && run.answer_found && equiv(run.answer, sc.answer)) {
            chosen = &run;
        }
    }
    fill_from_run(t, *chosen);
    t.answer = sc.answer;
    t.generated_tokens = tokens;
    t.notes.push_back("votes=" + std::to_string(sc.tally.winner_score) + "/" + std::to_string(sc.k_effective));
    return t;
}

RunTrace
Evaluator::run_single_prompt(ProblemRecord const & problem) const
{
    auto t = skeleton(problem, config_);
    auto const prompt = baseline_prompt(problem);
    BaselineConfig bc;
    bc.max_new_tokens = config_.engine.max_new_tokens;
    bc.temperature = config_.k > 1 ? config_.sample_temperature : config_.engine.temperature;

    std::vector<engine::RunResult> runs;
    std::vector<std::string> answers;
    std::size_t tokens = 0;
    for (std::size_t i = 0; i < config_.k; ++i) {
        bc.sample_seed = i;
        runs.push_back(run_baseline(config_.strategy, prompt, *resources_.backend, registry_, bc));
        tokens += runs.back().generated_tokens;
        if (runs.back().answer_found) {
            answers.push_back(runs.back().answer);
        }
    }
    if (config_.k == 1 || answers.empty()) {
        fill_from_run(t, runs.front());
        t.generated_tokens = tokens;
        return t;
    }
    auto const equiv = equivalence_for(problem.dataset);
    auto const tally = ensemble::self_consistency(answers, equiv);
    auto const chosen = std::find_if(runs.begin(), runs.end(), [&](engine::RunResult const & r) {
        return r.answer_found && equiv(r.answer, tally.winner);
    });
    fill_from_run(t, *chosen);
    t.answer = tally.winner;
    t.generated_tokens = tokens;
    t.notes.push_back("votes=" + std::to_string(tally.winner_score) + "/" + std::to_string(answers.size()));
    return t;
}

RunTrace
Evaluator::run_one(ProblemRecord const & problem) const
{
    try {
        return config_.strategy == Strategy::ChatCoT ? run_chatcot(problem) : run_single_prompt(problem);
    } catch (Error const & e) {
        auto t = skeleton(problem, config_);
        t.notes.push_back(std::string(to_string(e.code())) + ": " + e.what());
        return t;
    } catch (std::exception const & e) {
        auto t = skeleton(problem, config_);
        t.notes.push_back(std::string("Internal: ") + e.what());
        return t;
    }
}

EvalReport
Evaluator::evaluate(std::vector<ProblemRecord> const & dataset, TraceSink const & sink) const
{
    if (dataset.empty()) {
        throw Error(ErrorCode::InvalidConfig, "empty dataset");
    }
    std::vector<std::optional<RunTrace>> slots(dataset.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t flushed = 0;

    auto worker = [&] {
        for (std::size_t i = next++; i < dataset.size(); i = next++) {
            auto trace = run_one(dataset[i]);
            std::lock_guard lock(mu);
            slots[i] = std::move(trace);
            while (flushed < slots.size() && slots[flushed]) {
                if (sink) {
                    sink(*slots[flushed]);
                }
                ++flushed;
            }
        }
    };

    std::size_t const n_threads = std::min(config_.workers, dataset.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) {
            pool.emplace_back(worker);
        }
    }

    EvalReport report;
    report.traces.reserve(slots.size());
    for (auto & s : slots) {
        report.traces.push_back(std::move(*s));
    }
    report.metrics = compute_metrics(report.traces);
    return report;
}

EvalReport
evaluate(std::vector<ProblemRecord> const & dataset, EvalResources const & resources, EvalConfig const & config, TraceSink const & sink)
{
    return Evaluator(resources, config).evaluate(dataset, sink);
}

} // namespace chatcot::bench
