#pragma once

#include "chatcot/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

using chatcot::retrieval::DocIndex;
using chatcot::retrieval::Hit;
using chatcot::retrieval::IndexEntry;
using chatcot::retrieval::Vector;

inline double
naive_cosine(Vector const & a, Vector const & b)
{
    long double dot = 0;
    long double na = 0;
    long double nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<long double>(a[i]) * b[i];
        na += static_cast<long double>(a[i]) * a[i];
        nb += static_cast<long double>(b[i]) * b[i];
    }
    return static_cast<double>(dot / std::sqrt(na * nb));
}

inline Vector
random_vector(std::mt19937_64 & rng, std::size_t dim)
{
    std::normal_distribution<double> normal;
    Vector v(dim);
    for (auto & x : v) {
        x = normal(rng);
    }
    return v;
}

inline std::string
id_of(std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "d%04zu", i);
    return buf;
}

/// Random index; roughly one entry in five duplicates an earlier vector so
/// that ties actually occur.
inline DocIndex
random_index(std::mt19937_64 & rng, std::size_t n, std::size_t dim)
{
    std::vector<IndexEntry> entries;
    for (std::size_t i = 0; i < n; ++i) {
        Vector v = (i > 0 && rng() % 5 == 0) ? entries[rng() % i].vector : random_vector(rng, dim);
        entries.push_back({id_of(i), "", "doc " + std::to_string(i), std::move(v)});
    }
    std::shuffle(entries.begin(), entries.end(), rng);
    return DocIndex("test", dim, std::move(entries));
}

/// Every entry scored and sorted; no partial sorting.
inline std::vector<Hit>
brute_force(DocIndex const & index, Vector const & q)
{
    std::vector<Hit> all;
    for (auto const & e : index.entries()) {
        all.push_back({e.id, naive_cosine(q, e.vector)});
    }
    std::stable_sort(all.begin(), all.end(), [](Hit const & a, Hit const & b) { return a.id < b.id; });
    std::stable_sort(all.begin(), all.end(), [](Hit const & a, Hit const & b) { return a.score > b.score; });
    return all;
}

inline std::vector<std::string>
ids(std::vector<Hit> const & hits)
{
    std::vector<std::string> out;
    for (auto const & h : hits) {
        out.push_back(h.id);
    }
    return out;
}

} // namespace testing_support
