#include "chatcot/bench/baselines.hpp"
#include "chatcot/bench/dataset.hpp"
#include "chatcot/bench/evaluate.hpp"
#include "chatcot/bench/metrics.hpp"
#include "chatcot/error.hpp"
#include "chatcot/llm.hpp"
#include "chatcot/memory.hpp"
#include "chatcot/retrieval.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

namespace fs = std::filesystem;
using namespace chatcot;

namespace {

struct RunOptions
{
    std::string dataset;
    std::string kind = "math";
    std::string strategy = "chatcot";
    std::string backend = "scripted";
    std::string policy;
    std::size_t k = 1;
    std::optional<double> temperature;
    std::optional<std::size_t> max_turns;
    std::optional<std::size_t> n_retrieval;
    std::optional<std::size_t> n_annotated;
    std::optional<std::size_t> shots;
    std::size_t max_feedback = retrieval::kMaxFeedbackRounds;
    std::size_t retrieval_k = 1;
    bool no_tool_knowledge = false;
    bool conclude_counts = false;
    std::string trace_out;
    std::size_t workers = 1;
    std::string train;
    std::string annotated;
    std::string tools;
    std::string url;
    std::string model;
    std::string embed_url;
    std::string embed_model;
    bool json = false;
};

std::string
default_data(std::string const & data_dir, std::string const & given, std::string const & relative)
{
    return given.empty() ? (fs::path(data_dir) / relative).string() : given;
}

int
cmd_run(RunOptions const & o, std::string const & data_dir)
{
    auto const kind = dataset_kind_from_string(o.kind);
    auto const strategy = bench::strategy_from_string(o.strategy);

    std::unique_ptr<llm::Backend> backend;
    if (o.backend == "scripted") {
        if (o.policy.empty()) {
            throw Error(ErrorCode::InvalidConfig, "--policy is required with the scripted backend");
        }
        backend = std::make_unique<llm::ScriptedBackend>(llm::ScriptedPolicy::load(o.policy));
    } else if (o.backend == "live") {
        llm::LiveConfig live;
        live.url = o.url;
        live.model = o.model;
        backend = std::make_unique<llm::LiveBackend>(llm::live_config_from_env(live));
    } else {
        throw Error(ErrorCode::InvalidConfig, "unknown backend '" + o.backend + "'");
    }

    auto cfg = bench::EvalConfig::for_kind(kind, strategy);
    cfg.k = o.k;
    cfg.workers = o.workers;
    if (o.temperature) {
        (o.k > 1 ? cfg.sample_temperature : cfg.engine.temperature) = *o.temperature;
    }
    if (o.max_turns) {
        cfg.engine.max_turns = *o.max_turns;
    }
    cfg.engine.max_feedback = o.max_feedback;
    cfg.engine.retrieval_k = o.retrieval_k;
    cfg.engine.conclude_counts_as_turn = o.conclude_counts;
    if (o.n_retrieval) {
        cfg.memory.n_retrieval = *o.n_retrieval;
    }
    if (o.n_annotated) {
        cfg.memory.n_annotated = *o.n_annotated;
    }
    if (o.shots) {
        cfg.shots = *o.shots;
    }
    cfg.memory.tool_knowledge = !o.no_tool_knowledge;

    bench::EvalResources res;
    res.backend = backend.get();
    res.tools = memory::load_tool_specs(default_data(data_dir, o.tools, "tools.json"));
    res.annotated = memory::load_annotated_dialogues(
        default_data(data_dir, o.annotated, kind == DatasetKind::MathStyle ? "annotated/math.json" : "annotated/hotpot.json"));
    if (!o.train.empty()) {
        res.train = bench::load_dataset(o.train, kind);
    }
    if (!o.embed_url.empty()) {
        res.provider = std::make_shared<retrieval::RemoteEmbedder>(o.embed_url, o.embed_model);
    }

    auto const dataset = bench::load_dataset(o.dataset, kind);
    std::ofstream trace_file;
    if (!o.trace_out.empty()) {
        trace_file.open(o.trace_out, std::ios::binary | std::ios::trunc);
        if (!trace_file) {
            throw Error(ErrorCode::Io, "cannot write " + o.trace_out);
        }
    }
    bench::Evaluator const evaluator(std::move(res), cfg);
    auto const report = evaluator.evaluate(dataset, [&](bench::RunTrace const & t) {
        if (trace_file.is_open()) {
            bench::write_jsonl(trace_file, t);
            trace_file.flush();
        }
        for (auto const & note : t.notes) {
            if (note.find(':') != std::string::npos) {
                std::cerr << "problem " << t.problem_id << ": " << note << "\n";
            }
        }
    });
    if (o.json) {
        std::cout << report.metrics.to_json().dump(2) << "\n";
    } else {
        std::cout << bench::format_metrics(report.metrics) << "\n" << bench::token_report(report.traces);
    }
    return 0;
}

int
cmd_report(std::string const & traces, bool json)
{
    auto const all = bench::read_traces(traces);
    auto const m = bench::compute_metrics(all);
    if (json) {
        std::cout << m.to_json().dump(2) << "\n";
    } else {
        std::cout << bench::format_metrics(m) << "\n" << bench::token_report(all);
    }
    return 0;
}

int
cmd_inspect(std::string const & traces, std::string const & id, bool with_memory)
{
    for (auto const & t : bench::read_traces(traces)) {
        if (t.problem_id != id) {
            continue;
        }
        std::cout << "problem:   " << t.problem_id << "\n"
                  << "category:  " << t.category << "\n"
                  << "strategy:  " << bench::strategy_label(t) << "\n"
                  << "answer:    " << (t.answer.empty() ? "(none)" : t.answer) << "\n"
                  << "gold:      " << t.gold << (bench::is_correct(t) ? "  [correct]" : "  [wrong]") << "\n"
                  << "tokens:    " << t.generated_tokens << " generated, " << t.token_count << " in conversation\n"
                  << "tools:    ";
        for (auto const & c : t.tool_calls) {
            std::cout << " " << c.tool << (c.ok ? "(ok)" : "(failed)");
        }
        std::cout << (t.tool_calls.empty() ? " none" : "") << "\n";
        if (t.forced_conclusion) {
            std::cout << "forced conclusion\n";
        }
        for (auto const & n : t.notes) {
            std::cout << "note:      " << n << "\n";
        }
        std::size_t const from = with_memory ? 0 : std::min(t.memory_len, t.messages.size());
        if (from > 0) {
            std::cout << "(" << from << " memory messages hidden)\n";
        }
        for (std::size_t i = from; i < t.messages.size(); ++i) {
            auto const & m = t.messages[i];
            std::cout << "\n--- " << i << " " << to_string(m.role) << " / " << to_string(m.phase) << "\n" << m.content << "\n";
        }
        return 0;
    }
    throw Error(ErrorCode::MalformedRecord, "no trace for problem '" + id + "'");
}

int
cmd_stats(std::string const & path, std::string const & kind_name, std::string const & split)
{
    auto const kind = dataset_kind_from_string(kind_name);
    auto const records = bench::load_dataset(path, kind);
    for (auto const & [category, n] : bench::category_counts(records)) {
        std::cout << (category.empty() ? "-" : category) << "\t" << n << "\n";
    }
    if (split.empty()) {
        return 0;
    }
    bool all_ok = true;
    std::cout << "\nreference (" << split << "):\n";
    for (auto const & c : bench::check_split(records, kind, split == "train")) {
        std::cout << c.category << "\texpected " << c.expected << "\tfound " << c.actual << "\t" << (c.ok() ? "ok" : "MISMATCH")
                  << "\n";
        all_ok = all_ok && c.ok();
    }
    return all_ok ? 0 : 3;
}

} // namespace

int
main(int argc, char ** argv)
{
    CLI::App app{"ChatCoT reasoning harness"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML or INI file with option values");
    std::string data_dir = CHATCOT_DEFAULT_DATA_DIR;
    app.add_option("--data-dir", data_dir, "Directory with tools.json and annotated dialogues");

    RunOptions run;
    auto * r = app.add_subcommand("run", "Evaluate a strategy on a dataset");
    r->add_option("--dataset", run.dataset, "Dataset file or directory")->required();
    r->add_option("--kind", run.kind, "math or hotpot")->check(CLI::IsMember({"math", "hotpot"}));
    r->add_option("--strategy", run.strategy, "chatcot, cot, cot-tool or cot-retri")
        ->check(CLI::IsMember({"chatcot", "cot", "cot-tool", "cot-retri"}));
    r->add_option("--backend", run.backend, "live or scripted")->check(CLI::IsMember({"live", "scripted"}));
    r->add_option("--policy", run.policy, "Scripted policy file");
    r->add_option("--k", run.k, "Samples per problem (self-consistency when > 1)")->check(CLI::PositiveNumber);
    r->add_option("--temperature", run.temperature, "Decoding temperature");
    r->add_option("--max-turns", run.max_turns, "Turn budget per conversation");
    r->add_option("--n-retrieval", run.n_retrieval, "Retrieved task-knowledge exemplars");
    r->add_option("--n-annotated", run.n_annotated, "Annotated reasoning-format dialogues");
    r->add_option("--shots", run.shots, "Exemplars in baseline prompts");
    r->add_option("--max-feedback", run.max_feedback, "Retriever feedback rounds");
    r->add_option("--retrieval-k", run.retrieval_k, "Paragraphs per retriever batch");
    r->add_flag("--no-tool-knowledge", run.no_tool_knowledge, "Drop the tool knowledge block");
    r->add_flag("--conclude-counts-as-turn", run.conclude_counts, "Count the forced conclusion against the budget");
    r->add_option("--trace-out", run.trace_out, "JSONL trace output");
    r->add_option("--workers", run.workers, "Problems evaluated in parallel")->check(CLI::PositiveNumber);
    r->add_option("--train", run.train, "Training split for exemplar retrieval");
    r->add_option("--annotated", run.annotated, "Annotated dialogue file");
    r->add_option("--tools", run.tools, "Tool spec file");
    r->add_option("--url", run.url, "Chat completions endpoint (default $CHATCOT_API_URL)");
    r->add_option("--model", run.model, "Model name (default $CHATCOT_MODEL)");
    r->add_option("--embed-url", run.embed_url, "Embedding service; feature hashing when unset");
    r->add_option("--embed-model", run.embed_model, "Embedding model name");
    r->add_flag("--json", run.json, "Print metrics as JSON");

    std::string traces;
    std::string id;
    bool json = false;
    bool with_memory = false;
    auto * rep = app.add_subcommand("report", "Recompute metrics from a trace file");
    rep->add_option("--traces", traces, "JSONL trace file")->required();
    rep->add_flag("--json", json, "Print metrics as JSON");

    auto * ins = app.add_subcommand("inspect", "Print one conversation");
    ins->add_option("--traces", traces, "JSONL trace file")->required();
    ins->add_option("--id", id, "Problem id")->required();
    ins->add_flag("--memory", with_memory, "Include the knowledge memory");

    std::string stats_path;
    std::string stats_kind = "math";
    std::string split;
    auto * st = app.add_subcommand("stats", "Count records per category");
    st->add_option("--dataset", stats_path, "Dataset file or directory")->required();
    st->add_option("--kind", stats_kind, "math or hotpot")->check(CLI::IsMember({"math", "hotpot"}));
    st->add_option("--split", split, "Compare with the published train or test sizes")
        ->check(CLI::IsMember({"train", "test"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*r) {
            return cmd_run(run, data_dir);
        }
        if (*rep) {
            return cmd_report(traces, json);
        }
        if (*ins) {
            return cmd_inspect(traces, id, with_memory);
        }
        return cmd_stats(stats_path, stats_kind, split);
    } catch (Error const & e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return 2;
    } catch (std::exception const & e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
