#include "curator/sieve.hpp"

#include <algorithm>
#include <random>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>

#include "curator/jsonl.hpp"

namespace curator {

namespace {

// Looks up both judges; returns nullopt when one is missing and skipping is
// allowed, throws otherwise.
template <typename Map>
std::optional<std::array<typename Map::mapped_type, 2>> judge_values(
    const AnnotationRecord& rec, const Map& map, const SieveConfig& cfg,
    const char* field) {
    std::array<typename Map::mapped_type, 2> out{};
    for (size_t j = 0; j < 2; ++j) {
        auto it = map.find(cfg.judges[j]);
        if (it == map.end()) {
            if (cfg.skip_missing) return std::nullopt;
            throw MissingJudgeError(rec.id, cfg.judges[j], field);
        }
        out[j] = it->second;
    }
    return out;
}

}  // namespace

std::string_view domain_name(Domain d) {
    switch (d) {
        case Domain::Code: return "code";
        case Domain::Math: return "math";
        case Domain::Stem: return "stem";
        case Domain::Chat: return "chat";
        case Domain::Tool: return "tool";
    }
    return "chat";
}

std::optional<Domain> domain_from_name(std::string_view name) {
    if (name == "code") return Domain::Code;
    if (name == "math") return Domain::Math;
    if (name == "stem") return Domain::Stem;
    if (name == "chat") return Domain::Chat;
    if (name == "tool") return Domain::Tool;
    return std::nullopt;
}

std::string_view difficulty_name(Difficulty d) {
    switch (d) {
        case Difficulty::Easy: return "easy";
        case Difficulty::Medium: return "medium";
        case Difficulty::Hard: return "hard";
    }
    return "easy";
}

std::optional<Difficulty> difficulty_from_name(std::string_view name) {
    if (name == "easy") return Difficulty::Easy;
    if (name == "medium") return Difficulty::Medium;
    if (name == "hard") return Difficulty::Hard;
    return std::nullopt;
}

std::vector<AnnotationRecord> stage1_filter(const std::vector<AnnotationRecord>& records,
                                            const SieveConfig& cfg) {
    std::vector<AnnotationRecord> pool;
    for (const auto& rec : records) {
        if (cfg.stage1_bypass.count(rec.domain)) {
            pool.push_back(rec);
            continue;
        }
        auto correct = judge_values(rec, rec.correctness, cfg, "correctness");
        if (!correct) continue;
        if (!(*correct)[0] && !(*correct)[1]) pool.push_back(rec);
    }
    return pool;
}

std::vector<AnnotationRecord> stage2_consensus(const std::vector<AnnotationRecord>& pool,
                                               const SieveConfig& cfg) {
    std::vector<AnnotationRecord> final_set;
    for (const auto& rec : pool) {
        auto difficulty = judge_values(rec, rec.difficulty, cfg, "difficulty");
        if (!difficulty) continue;
        if ((*difficulty)[0] == Difficulty::Hard && (*difficulty)[1] == Difficulty::Hard)
            final_set.push_back(rec);
    }
    return final_set;
}

std::pair<std::vector<AnnotationRecord>, SieveReport> sieve(
    const std::vector<AnnotationRecord>& records, const SieveConfig& cfg) {
    SieveReport report;
    report.input_count = records.size();
    for (const auto& rec : records)
        ++report.per_domain[std::string(domain_name(rec.domain))].input;

    auto pool = stage1_filter(records, cfg);
    report.stage1_count = pool.size();
    for (const auto& rec : pool)
        ++report.per_domain[std::string(domain_name(rec.domain))].stage1;

    auto final_set = stage2_consensus(pool, cfg);
    report.final_count = final_set.size();
    for (const auto& rec : final_set)
        ++report.per_domain[std::string(domain_name(rec.domain))].final_count;

    return {std::move(final_set), report};
}

std::vector<size_t> balance_sample_indices(const std::vector<char>& flags, uint64_t seed) {
    std::vector<size_t> true_idx;
    std::vector<size_t> false_idx;
    for (size_t i = 0; i < flags.size(); ++i)
        (flags[i] ? true_idx : false_idx).push_back(i);
    if (true_idx.empty() || false_idx.empty())
        throw std::invalid_argument("balance_sample needs both classes non-empty");

    const size_t take = std::min(true_idx.size(), false_idx.size());
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates with raw engine outputs keeps the selection
    // identical across standard libraries.
    auto select = [&](std::vector<size_t>& idx) {
        for (size_t i = 0; i < take; ++i) {
            size_t j = i + size_t(rng() % uint64_t(idx.size() - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(take);
    };
    select(true_idx);
    select(false_idx);

    std::vector<size_t> out;
    out.reserve(take * 2);
    out.insert(out.end(), true_idx.begin(), true_idx.end());
    out.insert(out.end(), false_idx.begin(), false_idx.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<AnnotationRecord> read_annotations(const std::string& path) {
    LineReader reader(path);
    std::vector<AnnotationRecord> records;
    std::string line;
    while (reader.next(line)) {
        rapidjson::Document d;
        d.ParseInsitu(line.data());
        if (d.HasParseError())
            throw JsonlError(path, reader.line_number(),
                             rapidjson::GetParseError_En(d.GetParseError()));
        if (!d.IsObject() || !d.HasMember("id") || !d["id"].IsString())
            throw JsonlError(path, reader.line_number(), "missing 'id'");

        AnnotationRecord rec;
        rec.id = d["id"].GetString();
        if (!d.HasMember("domain") || !d["domain"].IsString())
            throw JsonlError(path, reader.line_number(), "missing 'domain'");
        auto domain = domain_from_name(d["domain"].GetString());
        if (!domain)
            throw JsonlError(path, reader.line_number(),
                             std::string("unknown domain '") + d["domain"].GetString() + "'");
        rec.domain = *domain;

        if (d.HasMember("correctness")) {
            if (!d["correctness"].IsObject())
                throw JsonlError(path, reader.line_number(), "'correctness' not an object");
            for (auto it = d["correctness"].MemberBegin(); it != d["correctness"].MemberEnd();
                 ++it) {
                if (!it->value.IsBool())
                    throw JsonlError(path, reader.line_number(),
                                     "correctness values must be booleans");
                rec.correctness[it->name.GetString()] = it->value.GetBool();
            }
        }
        if (d.HasMember("difficulty")) {
            if (!d["difficulty"].IsObject())
                throw JsonlError(path, reader.line_number(), "'difficulty' not an object");
            for (auto it = d["difficulty"].MemberBegin(); it != d["difficulty"].MemberEnd();
                 ++it) {
                if (!it->value.IsString())
                    throw JsonlError(path, reader.line_number(),
                                     "difficulty values must be strings");
                auto diff = difficulty_from_name(it->value.GetString());
                if (!diff)
                    throw JsonlError(path, reader.line_number(),
                                     std::string("unknown difficulty '") +
                                         it->value.GetString() + "'");
                rec.difficulty[it->name.GetString()] = *diff;
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_annotations(const std::vector<AnnotationRecord>& records,
                       const std::string& path) {
    JsonlWriter writer(path);
    std::string line;
    for (const auto& rec : records) {
        line.clear();
        line += "{\"id\":";
        append_json_string(line, rec.id);
        line += ",\"domain\":\"";
        line += domain_name(rec.domain);
        line += "\",\"correctness\":{";
        bool first = true;
        for (const auto& [judge, correct] : rec.correctness) {
            if (!first) line.push_back(',');
            first = false;
            append_json_string(line, judge);
            line += correct ? ":true" : ":false";
        }
        line += "},\"difficulty\":{";
        first = true;
        for (const auto& [judge, diff] : rec.difficulty) {
            if (!first) line.push_back(',');
            first = false;
            append_json_string(line, judge);
            line += ":\"";
            line += difficulty_name(diff);
            line += "\"";
        }
        line += "}}";
        writer.write_line(line);
    }
    writer.close();
}

}  // namespace curator
