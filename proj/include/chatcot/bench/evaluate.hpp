#pragma once

#include "chatcot/bench/baselines.hpp"
#include "chatcot/bench/metrics.hpp"
#include "chatcot/engine.hpp"
#include "chatcot/llm.hpp"
#include "chatcot/memory.hpp"
#include "chatcot/retrieval.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace chatcot::bench {

/// Everything a sweep reads but never changes.
struct EvalResources
{
    llm::Backend const * backend = nullptr;
    /// Full tool list; the evaluator keeps the ones that fit the dataset.
    std::vector<memory::ToolSpec> tools;
    std::vector<memory::AnnotatedDialogue> annotated;
    /// Exemplar pool for retrieval and fixed-shot prompts.
    std::vector<ProblemRecord> train;
    std::shared_ptr<retrieval::EmbeddingProvider const> provider;
};

struct EvalConfig
{
    Strategy strategy = Strategy::ChatCoT;
    DatasetKind kind = DatasetKind::MathStyle;
    engine::EngineConfig engine;
    memory::MemoryConfig memory = memory::math_defaults();
    /// Samples per problem; more than one means self-consistency voting.
    std::size_t k = 1;
    double sample_temperature = 0.7;
    /// Exemplars in a baseline prompt.
    std::size_t shots = kMathShots;
    std::size_t evidence_paragraphs = kEvidenceParagraphs;
    std::size_t workers = 1;

    /// Defaults for the dataset kind (shot counts, memory split).
    static EvalConfig for_kind(DatasetKind kind, Strategy strategy);
};

/// Calculator and Equation Solver for MATH-style data, the retriever for
/// HotpotQA-style data.
std::vector<memory::ToolSpec> tools_for(DatasetKind kind, std::vector<memory::ToolSpec> const & all);

/// Training records as task-knowledge exemplars. HotpotQA records have
/// no worked solution, so a one-line answer sentence stands in.
std::vector<ProblemRecord> exemplar_pool(std::vector<ProblemRecord> const & train);

using TraceSink = std::function<void(RunTrace const &)>;

struct EvalReport
{
    Metrics metrics;
    std::vector<RunTrace> traces;
};

class Evaluator
{
public:
    /// Throws InvalidConfig when the configuration cannot run.
    Evaluator(EvalResources resources, EvalConfig config);

    /// Runs one problem; harness-level failures become a trace with an
    /// empty answer and a note.
    [[nodiscard]] RunTrace run_one(ProblemRecord const & problem) const;

    /// Runs the whole dataset on config.workers threads. sink sees the
    /// traces in dataset order, one call at a time.
    EvalReport evaluate(std::vector<ProblemRecord> const & dataset, TraceSink const & sink = {}) const;

    [[nodiscard]] engine::ToolRegistry const & registry() const noexcept { return registry_; }
    [[nodiscard]] EvalConfig const & config() const noexcept { return config_; }

    /// The conversation memory ChatCoT would start from.
    [[nodiscard]] ConversationState memory_for(ProblemRecord const & problem) const;
    /// Prompt a baseline strategy would send.
    [[nodiscard]] std::vector<ChatMessage> baseline_prompt(ProblemRecord const & problem) const;

private:
    RunTrace run_chatcot(ProblemRecord const & problem) const;
    RunTrace run_single_prompt(ProblemRecord const & problem) const;

    EvalResources resources_;
    EvalConfig config_;
    std::vector<memory::ToolSpec> tools_;
    engine::ToolRegistry registry_;
    std::vector<memory::Exemplar> fixed_shots_;
    std::unique_ptr<retrieval::ExemplarSelector> selector_;
};

/// Convenience wrapper over Evaluator.
EvalReport evaluate(
    std::vector<ProblemRecord> const & dataset,
    EvalResources const & resources,
    EvalConfig const & config,
    TraceSink const & sink = {});

} // namespace chatcot::bench
