#include "chatcot/bench/dataset.hpp"

#include "chatcot/error.hpp"
#include "chatcot/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace chatcot::bench {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void
malformed(std::size_t index, std::string const & what)
{
    throw Error(ErrorCode::MalformedRecord, "record " + std::to_string(index) + ": " + what);
}

std::string
required_string(nlohmann::json const & j, char const * key, std::size_t index)
{
    auto const it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        malformed(index, std::string("missing string field '") + key + "'");
    }
    return it->get<std::string>();
}

std::string
read_all(fs::path const & path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json
parse_json(std::string const & text, std::size_t index)
{
    try {
        return nlohmann::json::parse(text);
    } catch (nlohmann::json::exception const & e) {
        malformed(index, e.what());
    }
}

std::string
record_id(nlohmann::json const & j, std::size_t index)
{
    for (auto const * key : {"_id", "id", "unique_id"}) {
        auto const it = j.find(key);
        if (it != j.end()) {
            return it->is_string() ? it->get<std::string>() : it->dump();
        }
    }
    return std::to_string(index);
}

/// One JSON value per record, with the ids they would get.
std::vector<std::pair<std::string, nlohmann::json>>
read_records(fs::path const & path, bool from_directory)
{
    std::vector<std::pair<std::string, nlohmann::json>> out;
    if (from_directory) {
        std::vector<fs::path> files;
        for (auto const & entry : fs::recursive_directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (auto const & f : files) {
            auto j = parse_json(read_all(f), out.size());
            auto rel = fs::relative(f, path).replace_extension().generic_string();
            out.emplace_back(std::move(rel), std::move(j));
        }
        return out;
    }

    auto const text = read_all(path);
    auto const first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '[') {
        auto const all = parse_json(text, 0);
        for (auto const & j : all) {
            out.emplace_back(record_id(j, out.size()), j);
        }
        return out;
    }
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (text::trim(line).empty()) {
            continue;
        }
        auto j = parse_json(line, out.size());
        out.emplace_back(record_id(j, out.size()), std::move(j));
    }
    return out;
}

} // namespace

ProblemRecord
math_record(nlohmann::json const & j, std::string id, std::size_t index)
{
    if (!j.is_object()) {
        malformed(index, "not an object");
    }
    ProblemRecord r;
    r.id = std::move(id);
    r.dataset = DatasetKind::MathStyle;
    r.statement = required_string(j, "problem", index);
    r.solution = required_string(j, "solution", index);
    r.category = j.value("type", "");
    auto boxed = text::last_boxed(*r.solution);
    if (!boxed) {
        throw Error(ErrorCode::MissingBoxedAnswer, "record " + std::to_string(index) + " (" + r.id + ") has no boxed answer");
    }
    r.answer = std::move(*boxed);
    return r;
}

ProblemRecord
hotpot_record(nlohmann::json const & j, std::string id, std::size_t index)
{
    if (!j.is_object()) {
        malformed(index, "not an object");
    }
    ProblemRecord r;
    r.id = std::move(id);
    r.dataset = DatasetKind::HotpotStyle;
    r.statement = required_string(j, "question", index);
    if (j.contains("answer")) {
        r.answer = required_string(j, "answer", index);
    }
    r.category = j.value("type", "");
    auto const ctx = j.find("context");
    if (ctx == j.end() || !ctx->is_array() || ctx->empty()) {
        malformed(index, "empty context");
    }
    for (auto const & item : *ctx) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_array()) {
            malformed(index, "context entries must be [title, [sentences]]");
        }
        Paragraph p;
        p.title = item[0].get<std::string>();
        for (auto const & s : item[1]) {
            if (!s.is_string()) {
                malformed(index, "sentence is not a string");
            }
            auto const & raw = s.get_ref<std::string const &>();
            auto const sentence = text::trim(raw);
            if (sentence.empty()) {
                continue;
            }
            if (!p.text.empty()) {
                p.text += ' ';
            }
            p.text += sentence;
        }
        r.paragraphs.push_back(std::move(p));
    }
    return r;
}

std::vector<ProblemRecord>
load_dataset(fs::path const & path, DatasetKind kind)
{
    std::error_code ec;
    bool const dir = fs::is_directory(path, ec);
    if (!dir && !fs::is_regular_file(path, ec)) {
        throw Error(ErrorCode::Io, "no such dataset: " + path.string());
    }
    auto raw = read_records(path, dir);
    std::vector<ProblemRecord> out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        auto & [id, j] = raw[i];
        out.push_back(kind == DatasetKind::MathStyle ? math_record(j, std::move(id), i) : hotpot_record(j, std::move(id), i));
    }
    return out;
}

std::map<std::string, std::size_t>
category_counts(std::vector<ProblemRecord> const & records)
{
    std::map<std::string, std::size_t> out;
    for (auto const & r : records) {
        ++out[r.category];
    }
    out["total"] = records.size();
    return out;
}

std::vector<SplitCheck>
check_split(std::vector<ProblemRecord> const & records, DatasetKind kind, bool train_split)
{
    auto const counts = category_counts(records);
    std::vector<SplitCheck> out;
    for (auto const & ref : kReferenceSplits) {
        bool const math = ref.dataset == "MATH";
        if (math != (kind == DatasetKind::MathStyle)) {
            continue;
        }
        SplitCheck c;
        c.category = std::string(ref.category);
        c.expected = train_split ? ref.train : ref.test;
        if (math) {
            auto const it = counts.find(c.category);
            c.actual = it == counts.end() ? 0 : it->second;
        } else {
            c.actual = records.size();
        }
        out.push_back(std::move(c));
    }
    return out;
}

} // namespace chatcot::bench
