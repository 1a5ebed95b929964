#pragma once

#include "chatcot/conversation.hpp"
#include "chatcot/http.hpp"
#include "chatcot/memory.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <set>
#include <unordered_map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chatcot::retrieval {

using Vector = std::vector<double>;

class EmbeddingProvider
{
public:
    virtual ~EmbeddingProvider() = default;

    /// Identifies the provider configuration; indexes remember it so that
    /// queries are never embedded by a different model.
    [[nodiscard]] virtual std::string id() const = 0;

    /// Throws EmptyText for blank input.
    [[nodiscard]] virtual Vector embed(std::string_view text) const = 0;

    [[nodiscard]] virtual std::vector<Vector> embed_batch(std::span<std::string const> texts) const;
};

/// Word unigrams and character trigrams hashed into dim buckets, then
/// L2-normalised. Needs no network and is stable across platforms.
class HashEmbedder final : public EmbeddingProvider
{
public:
    explicit HashEmbedder(std::size_t dim = 1024);

    [[nodiscard]] std::string id() const override;
    [[nodiscard]] Vector embed(std::string_view text) const override;
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

private:
    std::size_t dim_;
};

/// Client for an embedding service speaking {texts:[...]} -> {vectors:[[...]]}.
class RemoteEmbedder final : public EmbeddingProvider
{
public:
    RemoteEmbedder(std::string url, std::string model, std::chrono::seconds timeout = std::chrono::seconds(30));

    [[nodiscard]] std::string id() const override;
    [[nodiscard]] Vector embed(std::string_view text) const override;
    [[nodiscard]] std::vector<Vector> embed_batch(std::span<std::string const> texts) const override;

private:
    std::string url_;
    std::string model_;
    http::Endpoint endpoint_;
    std::chrono::seconds timeout_;
};

/// dot(a, b) / (|a| |b|). Throws DimMismatch or ZeroVector.
double cosine(std::span<double const> a, std::span<double const> b);

struct IndexEntry
{
    std::string id;
    std::string title;
    std::string text;
    Vector vector;
};

struct Document
{
    std::string id;
    std::string title;
    std::string text;
};

struct Hit
{
    std::string id;
    double score = 0.0;

    friend bool operator==(Hit const &, Hit const &) = default;
};

/// Exhaustively scored, immutable after build.
class DocIndex
{
public:
    DocIndex() = default;
    DocIndex(std::string provider_id, std::size_t dim, std::vector<IndexEntry> entries);

    /// Embeds every document with the provider. Throws DuplicateId.
    static DocIndex build(EmbeddingProvider const & provider, std::vector<Document> const & docs);

    [[nodiscard]] std::string const & provider_id() const noexcept { return provider_id_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::vector<IndexEntry> const & entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] IndexEntry const & entry(std::string const & id) const;

    /// Highest cosine first, ties by ascending id. Entries whose id is in
    /// exclude are skipped. Throws EmptyIndex.
    [[nodiscard]] std::vector<Hit>
    top_k(std::span<double const> query, std::size_t k, std::set<std::string> const & exclude = {}) const;

    void save(std::filesystem::path const & path) const;
    static DocIndex load(std::filesystem::path const & path);

    friend void to_json(nlohmann::json & j, DocIndex const & index);
    friend void from_json(nlohmann::json const & j, DocIndex & index);

private:
    std::string provider_id_;
    std::size_t dim_ = 0;
    std::vector<IndexEntry> entries_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Embeds query with provider after checking it produced the index.
std::vector<Hit> top_k(DocIndex const & index, EmbeddingProvider const & provider, std::string_view query, std::size_t k);

inline constexpr std::size_t kMaxFeedbackRounds = 5;

/// One retriever invocation with bounded requests for further results.
/// The first batch is the plain top_k; each next_batch() is a feedback
/// round and returns the best entries not shown yet.
class RetrievalSession
{
public:
    RetrievalSession(
        DocIndex const & index,
        EmbeddingProvider const & provider,
        std::string query,
        std::size_t max_rounds = kMaxFeedbackRounds);

    /// For callers that already hold the query embedding.
    RetrievalSession(DocIndex const & index, Vector query_vector, std::string query, std::size_t max_rounds = kMaxFeedbackRounds);

    /// Initial results. Does not count as a feedback round.
    std::vector<Hit> first_batch(std::size_t k);

    /// Throws FeedbackExhausted once max_rounds rounds were used and
    /// IndexExhausted when every entry was already shown.
    std::vector<Hit> next_batch(std::size_t k);

    [[nodiscard]] std::string const & query() const noexcept { return query_; }
    [[nodiscard]] std::set<std::string> const & shown() const noexcept { return shown_; }
    [[nodiscard]] std::size_t rounds_used() const noexcept { return rounds_used_; }
    [[nodiscard]] std::size_t max_rounds() const noexcept { return max_rounds_; }

private:
    std::vector<Hit> take(std::size_t k);

    DocIndex const * index_;
    std::string query_;
    Vector query_vector_;
    std::set<std::string> shown_;
    std::size_t rounds_used_ = 0;
    std::size_t max_rounds_;
};

/// Picks task-knowledge exemplars from a training set by similarity to the
/// problem statement.
class ExemplarSelector
{
public:
    /// index_solutions: embed "Q S" for the index entries instead of Q alone.
    ExemplarSelector(
        EmbeddingProvider const & provider,
        std::vector<ProblemRecord> const & train,
        bool index_solutions = true);

    /// Most similar n exemplars; training records whose statement equals
    /// the query are skipped.
    [[nodiscard]] std::vector<memory::Exemplar> select(std::string_view statement, std::size_t n) const;

    [[nodiscard]] DocIndex const & index() const noexcept { return index_; }

private:
    EmbeddingProvider const * provider_;
    std::vector<memory::Exemplar> exemplars_;
    DocIndex index_;
};

/// Paragraph index for one multi-hop question.
DocIndex paragraph_index(EmbeddingProvider const & provider, ProblemRecord const & problem);

/// "[title] text [title] text" for display in the conversation.
std::string render_hits(DocIndex const & index, std::span<Hit const> hits);

} // namespace chatcot::retrieval
