#pragma once

#include "chatcot/conversation.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace chatcot::bench {

/// MATH-style input may be a directory tree of one-record JSON files, a
/// JSONL file or a JSON array. HotpotQA-style input is the official JSON
/// array (or JSONL with the same objects).
///
/// Throws Io, MalformedRecord (the message names the record index) and
/// MissingBoxedAnswer.
std::vector<ProblemRecord> load_dataset(std::filesystem::path const & path, DatasetKind kind);

ProblemRecord math_record(nlohmann::json const & j, std::string id, std::size_t index);
ProblemRecord hotpot_record(nlohmann::json const & j, std::string id, std::size_t index);

inline constexpr std::array<std::string_view, 7> kMathCategories{
    "Algebra",
    "Counting & Probability",
    "Geometry",
    "Intermediate Algebra",
    "Number Theory",
    "Prealgebra",
    "Precalculus",
};

struct SplitSize
{
    std::string_view dataset;
    std::string_view category;
    std::size_t train = 0;
    std::size_t test = 0;
};

/// Published split sizes of the two benchmarks.
inline constexpr std::array<SplitSize, 8> kReferenceSplits{{
    {"MATH", "Algebra", 1744, 1187},
    {"MATH", "Counting & Probability", 771, 474},
    {"MATH", "Precalculus", 746, 546},
    {"MATH", "Prealgebra", 1205, 871},
    {"MATH", "Geometry", 870, 479},
    {"MATH", "Intermediate Algebra", 1295, 903},
    {"MATH", "Number Theory", 869, 540},
    {"HotpotQA", "Distractor", 90477, 7405},
}};

/// Record count per category, plus "total".
std::map<std::string, std::size_t> category_counts(std::vector<ProblemRecord> const & records);

struct SplitCheck
{
    std::string category;
    std::size_t expected = 0;
    std::size_t actual = 0;
    [[nodiscard]] bool ok() const noexcept { return expected == actual; }
};

/// Compares a loaded split against the published sizes. HotpotQA records
/// are compared as one "Distractor" category.
std::vector<SplitCheck>
check_split(std::vector<ProblemRecord> const & records, DatasetKind kind, bool train_split);

} // namespace chatcot::bench
