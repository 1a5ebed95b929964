#include "chatcot/retrieval.hpp"

#include "chatcot/error.hpp"
#include "chatcot/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

namespace chatcot::retrieval {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t
fnv1a(std::string_view tag, std::string_view s)
{
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : tag) {
        h = (h ^ c) * kFnvPrime;
    }
    for (unsigned char c : s) {
        h = (h ^ c) * kFnvPrime;
    }
    return h;
}

std::vector<std::string>
words_of(std::string_view text)
{
    std::vector<std::string> words;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        words.push_back(std::move(current));
    }
    return words;
}

void
check_text(std::string_view text)
{
    if (text::trim(text).empty()) {
        throw Error(ErrorCode::EmptyText, "cannot embed empty text");
    }
}

Vector
parse_vector(nlohmann::json const & j)
{
    Vector v;
    v.reserve(j.size());
    for (auto const & x : j) {
        double const value = x.get<double>();
        if (!std::isfinite(value)) {
            throw Error(ErrorCode::ProviderUnavailable, "embedding service returned a non-finite value");
        }
        v.push_back(value);
    }
    return v;
}

} // namespace

std::vector<Vector>
EmbeddingProvider::embed_batch(std::span<std::string const> texts) const
{
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (auto const & t : texts) {
        out.push_back(embed(t));
    }
    return out;
}

HashEmbedder::HashEmbedder(std::size_t dim)
    : dim_(dim)
{
    if (dim_ == 0) {
        throw Error(ErrorCode::InvalidConfig, "embedding dimension must be positive");
    }
}

std::string
HashEmbedder::id() const
{
    return "hash-v1-" + std::to_string(dim_);
}

Vector
HashEmbedder::embed(std::string_view text) const
{
    check_text(text);
    Vector v(dim_, 0.0);
    auto bump = [&](std::string_view tag, std::string_view feature) { v[fnv1a(tag, feature) % dim_] += 1.0; };
    auto const words = words_of(text);
    for (auto const & w : words) {
        bump("w:", w);
        std::string const padded = "#" + w + "#";
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
            bump("c:", std::string_view(padded).substr(i, 3));
        }
    }
    if (words.empty()) {
        // punctuation only
        for (unsigned char c : text) {
            if (!std::isspace(c)) {
                bump("p:", std::string_view(reinterpret_cast<char const *>(&c), 1));
            }
        }
    }
    double norm = 0.0;
    for (double x : v) {
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double & x : v) {
        x /= norm;
    }
    return v;
}

RemoteEmbedder::RemoteEmbedder(std::string url, std::string model, std::chrono::seconds timeout)
    : url_(std::move(url))
    , model_(std::move(model))
    , endpoint_(http::parse_endpoint(url_))
    , timeout_(timeout)
{}

std::string
RemoteEmbedder::id() const
{
    return "remote:" + url_ + "#" + model_;
}

Vector
RemoteEmbedder::embed(std::string_view text) const
{
    std::string const one(text);
    return embed_batch(std::span<std::string const>(&one, 1)).front();
}

std::vector<Vector>
RemoteEmbedder::embed_batch(std::span<std::string const> texts) const
{
    for (auto const & t : texts) {
        check_text(t);
    }
    if (texts.empty()) {
        return {};
    }
    nlohmann::json body{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    if (!model_.empty()) {
        body["model"] = model_;
    }
    http::Response response;
    try {
        response = http::post_json(endpoint_, body, {}, timeout_);
    } catch (Error const & e) {
        throw Error(ErrorCode::ProviderUnavailable, e.what());
    }
    if (response.status != 200) {
        throw Error(ErrorCode::ProviderUnavailable, "embedding service answered HTTP " + std::to_string(response.status));
    }
    std::vector<Vector> out;
    try {
        auto const j = nlohmann::json::parse(response.body);
        for (auto const & row : j.at("vectors")) {
            out.push_back(parse_vector(row));
        }
    } catch (nlohmann::json::exception const & e) {
        throw Error(ErrorCode::ProviderUnavailable, std::string("malformed embedding response: ") + e.what());
    }
    if (out.size() != texts.size()) {
        throw Error(ErrorCode::ProviderUnavailable, "embedding service returned the wrong number of vectors");
    }
    for (auto const & v : out) {
        if (v.empty() || v.size() != out.front().size()) {
            throw Error(ErrorCode::DimMismatch, "embedding service returned vectors of differing length");
        }
    }
    return out;
}

double
cosine(std::span<double const> a, std::span<double const> b)
{
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimMismatch,
                    "vector dimensions differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

DocIndex::DocIndex(std::string provider_id, std::size_t dim, std::vector<IndexEntry> entries)
    : provider_id_(std::move(provider_id))
    , dim_(dim)
    , entries_(std::move(entries))
{
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto const & e = entries_[i];
        if (e.vector.size() != dim_) {
            throw Error(ErrorCode::DimMismatch, "entry '" + e.id + "' has dimension " + std::to_string(e.vector.size()));
        }
        if (!by_id_.emplace(e.id, i).second) {
            throw Error(ErrorCode::DuplicateId, "duplicate index id '" + e.id + "'");
        }
    }
}

DocIndex
DocIndex::build(EmbeddingProvider const & provider, std::vector<Document> const & docs)
{
    std::vector<std::string> texts;
    texts.reserve(docs.size());
    for (auto const & d : docs) {
        texts.push_back(d.text);
    }
    auto vectors = provider.embed_batch(texts);
    std::vector<IndexEntry> entries;
    entries.reserve(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        entries.push_back({docs[i].id, docs[i].title, docs[i].text, std::move(vectors[i])});
    }
    std::size_t const dim = entries.empty() ? 0 : entries.front().vector.size();
    return DocIndex(provider.id(), dim, std::move(entries));
}

IndexEntry const &
DocIndex::entry(std::string const & id) const
{
    auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        throw Error(ErrorCode::InvalidRequest, "no index entry '" + id + "'");
    }
    return entries_[it->second];
}

std::vector<Hit>
DocIndex::top_k(std::span<double const> query, std::size_t k, std::set<std::string> const & exclude) const
{
    if (entries_.empty()) {
        throw Error(ErrorCode::EmptyIndex, "index is empty");
    }
    if (k == 0) {
        throw Error(ErrorCode::InvalidRequest, "k must be positive");
    }
    std::vector<Hit> hits;
    hits.reserve(entries_.size());
    for (auto const & e : entries_) {
        if (!exclude.contains(e.id)) {
            hits.push_back({e.id, cosine(query, e.vector)});
        }
    }
    auto const better = [](Hit const & x, Hit const & y) {
        return x.score != y.score ? x.score > y.score : x.id < y.id;
    };
    std::size_t const n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), better);
    hits.resize(n);
    return hits;
}

void
to_json(nlohmann::json & j, DocIndex const & index)
{
    nlohmann::json entries = nlohmann::json::array();
    for (auto const & e : index.entries_) {
        entries.push_back({{"id", e.id}, {"title", e.title}, {"text", e.text}, {"vector", e.vector}});
    }
    j = {{"provider_id", index.provider_id_}, {"dim", index.dim_}, {"entries", std::move(entries)}};
}

void
from_json(nlohmann::json const & j, DocIndex & index)
{
    std::vector<IndexEntry> entries;
    for (auto const & e : j.at("entries")) {
        entries.push_back({
            e.at("id").get<std::string>(),
            e.value("title", std::string{}),
            e.at("text").get<std::string>(),
            e.at("vector").get<Vector>(),
        });
    }
    index = DocIndex(j.at("provider_id").get<std::string>(), j.at("dim").get<std::size_t>(), std::move(entries));
}

void
DocIndex::save(std::filesystem::path const & path) const
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path.string());
    }
    out << nlohmann::json(*this).dump();
}

DocIndex
DocIndex::load(std::filesystem::path const & path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in).get<DocIndex>();
    } catch (nlohmann::json::exception const & e) {
        throw Error(ErrorCode::MalformedRecord, path.string() + ": " + e.what());
    }
}

std::vector<Hit>
top_k(DocIndex const & index, EmbeddingProvider const & provider, std::string_view query, std::size_t k)
{
    if (provider.id() != index.provider_id()) {
        throw Error(ErrorCode::ProviderMismatch,
                    "index built by '" + index.provider_id() + "', query embedded by '" + provider.id() + "'");
    }
    auto const q = provider.embed(query);
    return index.top_k(q, k);
}

RetrievalSession::RetrievalSession(
    DocIndex const & index,
    EmbeddingProvider const & provider,
    std::string query,
    std::size_t max_rounds)
    : index_(&index)
    , query_(std::move(query))
    , max_rounds_(max_rounds)
{
    if (max_rounds_ > kMaxFeedbackRounds) {
        throw Error(ErrorCode::InvalidConfig, "at most 5 feedback rounds are allowed");
    }
    if (provider.id() != index.provider_id()) {
        throw Error(ErrorCode::ProviderMismatch,
                    "index built by '" + index.provider_id() + "', query embedded by '" + provider.id() + "'");
    }
    query_vector_ = provider.embed(query_);
}

RetrievalSession::RetrievalSession(DocIndex const & index, Vector query_vector, std::string query, std::size_t max_rounds)
    : index_(&index)
    , query_(std::move(query))
    , query_vector_(std::move(query_vector))
    , max_rounds_(max_rounds)
{
    if (max_rounds_ > kMaxFeedbackRounds) {
        throw Error(ErrorCode::InvalidConfig, "at most 5 feedback rounds are allowed");
    }
}

std::vector<Hit>
RetrievalSession::take(std::size_t k)
{
    if (shown_.size() >= index_->size()) {
        throw Error(ErrorCode::IndexExhausted, "every result has already been shown");
    }
    auto hits = index_->top_k(query_vector_, k, shown_);
    for (auto const & h : hits) {
        shown_.insert(h.id);
    }
    return hits;
}

std::vector<Hit>
RetrievalSession::first_batch(std::size_t k)
{
    return take(k);
}

std::vector<Hit>
RetrievalSession::next_batch(std::size_t k)
{
    if (rounds_used_ >= max_rounds_) {
        throw Error(ErrorCode::FeedbackExhausted,
                    "no feedback rounds left after " + std::to_string(rounds_used_));
    }
    ++rounds_used_;
    return take(k);
}

ExemplarSelector::ExemplarSelector(
    EmbeddingProvider const & provider,
    std::vector<ProblemRecord> const & train,
    bool index_solutions)
    : provider_(&provider)
{
    std::vector<Document> docs;
    for (auto const & r : train) {
        if (!r.solution || r.solution->empty()) {
            continue;
        }
        std::string const id = std::to_string(exemplars_.size());
        exemplars_.push_back({r.statement, *r.solution, r.answer.value_or("")});
        docs.push_back({id, {}, index_solutions ? r.statement + " " + *r.solution : r.statement});
    }
    index_ = DocIndex::build(provider, docs);
}

std::vector<memory::Exemplar>
ExemplarSelector::select(std::string_view statement, std::size_t n) const
{
    if (n == 0) {
        return {};
    }
    std::set<std::string> same;
    for (std::size_t i = 0; i < exemplars_.size(); ++i) {
        if (exemplars_[i].statement == statement) {
            same.insert(std::to_string(i));
        }
    }
    auto const q = provider_->embed(statement);
    std::vector<memory::Exemplar> out;
    for (auto const & hit : index_.top_k(q, n, same)) {
        out.push_back(exemplars_[std::stoul(hit.id)]);
    }
    return out;
}

DocIndex
paragraph_index(EmbeddingProvider const & provider, ProblemRecord const & problem)
{
    std::vector<Document> docs;
    docs.reserve(problem.paragraphs.size());
    for (std::size_t i = 0; i < problem.paragraphs.size(); ++i) {
        auto const & p = problem.paragraphs[i];
        // zero-padded so id order is paragraph order
        char id[16];
        std::snprintf(id, sizeof id, "p%03zu", i);
        docs.push_back({id, p.title, p.title + " " + p.text});
    }
    return DocIndex::build(provider, docs);
}

std::string
render_hits(DocIndex const & index, std::span<Hit const> hits)
{
    std::string out;
    for (auto const & h : hits) {
        auto const & e = index.entry(h.id);
        if (!out.empty()) {
            out += ' ';
        }
        if (!e.title.empty()) {
            out += "[" + e.title + "] ";
        }
        auto const body = e.text.rfind(e.title + " ", 0) == 0 && !e.title.empty() ? e.text.substr(e.title.size() + 1) : e.text;
        out += body;
    }
    return out;
}

} // namespace chatcot::retrieval
