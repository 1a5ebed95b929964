#include "chatcot/error.hpp"
#include "chatcot/retrieval.hpp"

#include "support/retrieval_oracles.hpp"
#include "support/stub_server.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

using namespace chatcot;
using namespace chatcot::retrieval;
using namespace testing_support;

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

} // namespace

TEST_CASE("hash embedder")
{
    HashEmbedder const h;
    CHECK(h.embed("abc") == h.embed("abc"));
    CHECK(code_of([&] { (void)h.embed(""); }) == ErrorCode::EmptyText);
    CHECK(code_of([&] { (void)h.embed("   "); }) == ErrorCode::EmptyText);

    auto const near = cosine(h.embed("prime number"), h.embed("prime numbers"));
    auto const far = cosine(h.embed("prime number"), h.embed("triangle area"));
    CAPTURE(near);
    CAPTURE(far);
    CHECK(near > far);

    auto const v = h.embed("What is the remainder when 13^13 + 5 is divided by 6?");
    double norm = 0;
    for (double x : v) {
        CHECK(std::isfinite(x));
        norm += x * x;
    }
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.size() == 1024);
    CHECK_NOTHROW((void)cosine(h.embed("?!"), h.embed("?!")));
}

TEST_CASE("cosine")
{
    std::mt19937_64 rng(11);
    auto const v = random_vector(rng, 16);
    CHECK(std::abs(cosine(v, v) - 1.0) <= 1e-12);
    CHECK(cosine(Vector{1, 0}, Vector{0, 1}) == 0.0);
    CHECK(code_of([] { (void)cosine(Vector{1, 0}, Vector{1, 0, 0}); }) == ErrorCode::DimMismatch);
    CHECK(code_of([] { (void)cosine(Vector{0, 0}, Vector{1, 0}); }) == ErrorCode::ZeroVector);
    for (int i = 0; i < 500; ++i) {
        auto const dim = 1 + rng() % 64;
        auto const a = random_vector(rng, dim);
        auto const b = random_vector(rng, dim);
        CHECK(std::abs(cosine(a, b) - naive_cosine(a, b)) <= 1e-12);
    }
}

TEST_CASE("top_k")
{
    std::mt19937_64 rng(5);

    SUBCASE("k equal to the index size is a full ranking")
    {
        auto const index = random_index(rng, 30, 8);
        auto const hits = index.top_k(random_vector(rng, 8), 30);
        auto got = ids(hits);
        std::sort(got.begin(), got.end());
        std::vector<std::string> all;
        for (std::size_t i = 0; i < 30; ++i) {
            all.push_back(id_of(i));
        }
        CHECK(got == all);
    }
    SUBCASE("k larger than the index")
    {
        auto const index = random_index(rng, 4, 8);
        CHECK(index.top_k(random_vector(rng, 8), 10).size() == 4);
    }
    SUBCASE("k=5 on 50 docs matches exhaustive sort")
    {
        auto const index = random_index(rng, 50, 12);
        auto const q = random_vector(rng, 12);
        auto const expected = brute_force(index, q);
        CHECK(ids(index.top_k(q, 5)) == ids({expected.begin(), expected.begin() + 5}));
    }
    SUBCASE("empty index")
    {
        DocIndex const empty;
        CHECK(code_of([&] { (void)empty.top_k(Vector{1.0}, 1); }) == ErrorCode::EmptyIndex);
    }
}

TEST_CASE("top_k is the head of the brute-force ranking")
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t const n = 1 + rng() % 200;
        std::size_t const dim = 1 + rng() % 16;
        auto const index = random_index(rng, n, dim);
        auto const q = random_vector(rng, dim);
        std::size_t const k = 1 + rng() % n;
        auto const got = index.top_k(q, k);
        auto const expected = brute_force(index, q);
        REQUIRE(got.size() == k);
        CHECK(ids(got) == ids({expected.begin(), expected.begin() + static_cast<std::ptrdiff_t>(k)}));
        CHECK(std::is_sorted(got.begin(), got.end(), [](Hit const & a, Hit const & b) { return a.score > b.score; }));
    }
}

TEST_CASE("scaling stored vectors keeps every ranking")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto const index = random_index(rng, 40, 6);
        double const factor = std::uniform_real_distribution<double>(0.01, 100.0)(rng);
        std::vector<IndexEntry> scaled = index.entries();
        for (auto & e : scaled) {
            for (auto & x : e.vector) {
                x *= factor;
            }
        }
        DocIndex const other("test", 6, scaled);
        auto const q = random_vector(rng, 6);
        CHECK(ids(index.top_k(q, 40)) == ids(other.top_k(q, 40)));
    }
}

TEST_CASE("index construction")
{
    HashEmbedder const h(64);
    CHECK(code_of([&] { (void)DocIndex::build(h, {{"a", "", "x"}, {"a", "", "y"}}); }) == ErrorCode::DuplicateId);
    CHECK(code_of([] { DocIndex("p", 2, {{"a", "", "x", Vector{1, 2, 3}}}); }) == ErrorCode::DimMismatch);

    auto const index = DocIndex::build(h, {{"a", "", "prime number"}, {"b", "", "triangle area"}});
    HashEmbedder const other(32);
    CHECK(code_of([&] { (void)top_k(index, other, "prime", 1); }) == ErrorCode::ProviderMismatch);
    CHECK(top_k(index, h, "prime numbers", 1).front().id == "a");

    auto const path = std::filesystem::temp_directory_path() / "chatcot_index_test.json";
    index.save(path);
    auto const loaded = DocIndex::load(path);
    std::filesystem::remove(path);
    CHECK(loaded.provider_id() == index.provider_id());
    CHECK(loaded.dim() == 64);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded.entries()[1].vector == index.entries()[1].vector);
    CHECK(loaded.entries()[1].text == "triangle area");
}

TEST_CASE("feedback sessions")
{
    HashEmbedder const h(128);
    std::vector<Document> docs;
    for (int i = 0; i < 10; ++i) {
        docs.push_back({id_of(static_cast<std::size_t>(i)), "", "document number " + std::to_string(i) + " about primes"});
    }
    auto const index = DocIndex::build(h, docs);

    SUBCASE("first call equals top_k")
    {
        RetrievalSession s(index, h, "primes");
        CHECK(s.next_batch(3) == top_k(index, h, "primes", 3));
        CHECK(s.rounds_used() == 1);
        RetrievalSession t(index, h, "primes");
        CHECK(t.first_batch(3) == top_k(index, h, "primes", 3));
        CHECK(t.rounds_used() == 0);
    }
    SUBCASE("three calls cover nine distinct documents")
    {
        RetrievalSession s(index, h, "document 4");
        std::set<std::string> seen;
        for (int call = 0; call < 3; ++call) {
            for (auto const & hit : s.next_batch(3)) {
                CHECK(seen.insert(hit.id).second);
            }
        }
        CHECK(seen.size() == 9);
        CHECK(s.next_batch(3).size() == 1);
        CHECK(code_of([&] { (void)s.next_batch(3); }) == ErrorCode::IndexExhausted);
    }
    SUBCASE("sixth call is refused")
    {
        RetrievalSession s(index, h, "primes");
        for (int call = 0; call < 5; ++call) {
            CHECK(s.next_batch(1).size() == 1);
        }
        CHECK(s.rounds_used() == 5);
        CHECK(code_of([&] { (void)s.next_batch(1); }) == ErrorCode::FeedbackExhausted);
        CHECK(s.shown().size() == 5);
    }
}

TEST_CASE("sessions never repeat ids and stop at round six")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t const n = 1 + rng() % 200;
        std::size_t const k = 1 + rng() % 8;
        auto const index = random_index(rng, n, 8);
        RetrievalSession s(index, random_vector(rng, 8), "q");
        std::set<std::string> seen;
        std::size_t calls = 0;
        ErrorCode stop = ErrorCode::Io;
        for (;;) {
            try {
                auto const batch = s.next_batch(k);
                ++calls;
                for (auto const & hit : batch) {
                    CHECK(seen.insert(hit.id).second);
                }
            } catch (Error const & e) {
                stop = e.code();
                break;
            }
        }
        CAPTURE(n);
        CAPTURE(k);
        if ((n + k - 1) / k >= 5) {
            CHECK(calls == 5);
            CHECK(stop == ErrorCode::FeedbackExhausted);
        } else {
            CHECK(calls == (n + k - 1) / k);
            CHECK(stop == ErrorCode::IndexExhausted);
        }
        CHECK(seen == s.shown());
    }
}

TEST_CASE("remote embedder over loopback")
{
    testing_support::StubServer server("/embed", [](httplib::Request const & req, httplib::Response & res) {
        auto const body = nlohmann::json::parse(req.body);
        nlohmann::json vectors = nlohmann::json::array();
        for (auto const & t : body.at("texts")) {
            auto const s = t.get<std::string>();
            vectors.push_back({static_cast<double>(s.size()), 1.0, s == "boom" ? 0.0 : 2.0});
        }
        res.set_content(nlohmann::json{{"vectors", vectors}}.dump(), "application/json");
    });
    RemoteEmbedder const remote(server.url("/embed"), "test-model");
    CHECK(remote.embed("abcd") == Vector{4.0, 1.0, 2.0});
    std::vector<std::string> const texts{"a", "bb"};
    auto const batch = remote.embed_batch(texts);
    REQUIRE(batch.size() == 2);
    CHECK(batch[1] == Vector{2.0, 1.0, 2.0});
    CHECK(code_of([&] { (void)remote.embed(""); }) == ErrorCode::EmptyText);

    auto const index = DocIndex::build(remote, {{"x", "", "aaaa"}, {"y", "", "a"}});
    CHECK(index.dim() == 3);
    CHECK(top_k(index, remote, "aaa", 1).front().id == "x");
}

TEST_CASE("remote embedder failures")
{
    testing_support::StubServer server("/embed", [](httplib::Request const &, httplib::Response & res) {
        res.status = 503;
    });
    RemoteEmbedder const failing(server.url("/embed"), "");
    CHECK(code_of([&] { (void)failing.embed("x"); }) == ErrorCode::ProviderUnavailable);

    RemoteEmbedder const unreachable("http://127.0.0.1:1/embed", "", std::chrono::seconds(2));
    CHECK(code_of([&] { (void)unreachable.embed("x"); }) == ErrorCode::ProviderUnavailable);
}

TEST_CASE("exemplar selector")
{
    HashEmbedder const h;
    std::vector<ProblemRecord> train{
        {"t1", "What is the area of a triangle with base 4 and height 6?", "Area is 1/2*4*6 = \\boxed{12}.", "12", "Geometry"},
        {"t2", "Find the remainder when 2^10 is divided by 7.", "2^10 = 1024 and 1024 mod 7 = \\boxed{2}.", "2", "Number Theory"},
        {"t3", "Solve x + 3 = 5.", "x = \\boxed{2}.", "2", "Algebra"},
        {"t4", "Find the remainder when 3^5 is divided by 4.", "3^5 = 243, remainder \\boxed{3}.", "3", "Number Theory"},
    };
    ExemplarSelector const selector(h, train);
    auto const picked = selector.select("What is the remainder when 13^13 + 5 is divided by 6?", 2);
    REQUIRE(picked.size() == 2);
    for (auto const & e : picked) {
        CHECK(e.statement.find("remainder") != std::string::npos);
    }
    auto const self = selector.select(train[2].statement, 3);
    CHECK(std::none_of(self.begin(), self.end(), [&](auto const & e) { return e.statement == train[2].statement; }));
    CHECK(selector.select("anything", 0).empty());
}

TEST_CASE("paragraph index and rendering")
{
    HashEmbedder const h;
    ProblemRecord q{"h1", "Where was the director of Harbor Lights born?", std::nullopt, "Rushville", "bridge",
                    DatasetKind::HotpotStyle,
                    {{"Harbor Lights", "Harbor Lights is a 1963 film directed by Maurice Geraghty."},
                     {"Rushville", "Rushville is a city in Indiana."},
                     {"Apple pie", "Apple pie is a dessert."}}};
    auto const index = paragraph_index(h, q);
    REQUIRE(index.size() == 3);
    CHECK(index.entries()[0].id == "p000");
    auto const hits = top_k(index, h, "Harbor Lights director", 1);
    CHECK(render_hits(index, hits) == "[Harbor Lights] Harbor Lights is a 1963 film directed by Maurice Geraghty.");
    std::vector<Hit> const two{{"p001", 0.5}, {"p002", 0.1}};
    CHECK(render_hits(index, two) == "[Rushville] Rushville is a city in Indiana. [Apple pie] Apple pie is a dessert.");
}
