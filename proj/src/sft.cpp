#include "curator/sft.hpp"

#include <unordered_set>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>

#include "curator/jsonl.hpp"

namespace curator {

namespace {

constexpr std::string_view kUserOpen = "<|user|>\n";
constexpr std::string_view kAssistantOpen = "<|assistant|>\n";
constexpr std::string_view kTurnClose = "<|end|>\n";
constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kEmptyThink = "<think>\n\n</think>";

void check_sample(const ChatSample& sample) {
    if (sample.turns.empty())
        throw std::invalid_argument("sample '" + sample.id + "' has no turns");
    for (size_t i = 0; i < sample.turns.size(); ++i) {
        const std::string& expected = (i % 2 == 0) ? "user" : "assistant";
        if (sample.turns[i].role != expected)
            throw std::invalid_argument("sample '" + sample.id + "' turn " +
                                        std::to_string(i) + " has role '" +
                                        sample.turns[i].role + "', expected '" + expected +
                                        "'");
    }
    if (sample.turns.back().role != "assistant")
        throw std::invalid_argument("sample '" + sample.id +
                                    "' must end with an assistant turn");
    if (sample.mode == ChatMode::Reasoning && !sample.reasoning_trace)
        throw std::invalid_argument("reasoning sample '" + sample.id +
                                    "' is missing its trace");
}

}  // namespace

std::vector<ChatSample> uuid_dedup(const std::vector<ChatSample>& samples) {
    std::vector<ChatSample> kept;
    std::unordered_set<std::string_view> seen;
    for (const auto& sample : samples) {
        if (seen.insert(sample.id).second) kept.push_back(sample);
    }
    return kept;
}

std::string render_hybrid(const ChatSample& sample) {
    check_sample(sample);
    std::string out;
    for (size_t i = 0; i < sample.turns.size(); ++i) {
        const ChatTurn& turn = sample.turns[i];
        const bool final_turn = i + 1 == sample.turns.size();
        out += turn.role == "user" ? kUserOpen : kAssistantOpen;
        if (final_turn) {
            if (sample.mode == ChatMode::Reasoning) {
                out += kThinkOpen;
                out += *sample.reasoning_trace;
                out += kThinkClose;
            } else {
                out += kEmptyThink;
            }
            out += '\n';
        }
        out += turn.text;
        out += kTurnClose;
    }
    return out;
}

ChatSample parse_hybrid(std::string_view text) {
    ChatSample sample;
    size_t pos = 0;
    while (pos < text.size()) {
        std::string role;
        if (text.compare(pos, kUserOpen.size(), kUserOpen) == 0) {
            role = "user";
            pos += kUserOpen.size();
        } else if (text.compare(pos, kAssistantOpen.size(), kAssistantOpen) == 0) {
            role = "assistant";
            pos += kAssistantOpen.size();
        } else {
            throw std::invalid_argument("expected a turn marker at offset " +
                                        std::to_string(pos));
        }
        size_t end = text.find(kTurnClose, pos);
        if (end == std::string_view::npos)
            throw std::invalid_argument("unterminated turn at offset " + std::to_string(pos));
        std::string_view body = text.substr(pos, end - pos);
        pos = end + kTurnClose.size();
        const bool final_turn = pos >= text.size();

        if (final_turn && role == "assistant") {
            if (body.compare(0, kThinkOpen.size(), kThinkOpen) != 0)
                throw std::invalid_argument("final assistant turn lacks a think block");
            size_t close = body.find(kThinkClose, kThinkOpen.size());
            if (close == std::string_view::npos)
                throw std::invalid_argument("unterminated think block");
            std::string_view block = body.substr(kThinkOpen.size(),
                                                 close - kThinkOpen.size());
            size_t answer_at = close + kThinkClose.size();
            if (answer_at < body.size() && body[answer_at] == '\n') ++answer_at;
            if (block == "\n\n") {
                sample.mode = ChatMode::NonReasoning;
            } else {
                sample.mode = ChatMode::Reasoning;
                sample.reasoning_trace = std::string(block);
            }
            sample.turns.push_back({role, std::string(body.substr(answer_at))});
        } else {
            sample.turns.push_back({role, std::string(body)});
        }
    }
    if (sample.turns.empty()) throw std::invalid_argument("empty rendering");
    return sample;
}

std::vector<TaggedChatSample> mode_assign(const std::vector<TaggedChatSample>& records,
                                          const ModeAssignOptions& opts) {
    std::vector<char> reasoning_flag(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        switch (records[i].difficulty) {
            case Difficulty::Easy: reasoning_flag[i] = 0; break;
            case Difficulty::Medium: reasoning_flag[i] = opts.medium_to_reasoning; break;
            case Difficulty::Hard: reasoning_flag[i] = 1; break;
        }
    }
    auto selected = balance_sample_indices(reasoning_flag, opts.seed);

    std::vector<TaggedChatSample> out;
    out.reserve(selected.size());
    for (size_t idx : selected) {
        TaggedChatSample rec = records[idx];
        rec.sample.mode = reasoning_flag[idx] ? ChatMode::Reasoning : ChatMode::NonReasoning;
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<TaggedChatSample> read_chat_samples(const std::string& path) {
    LineReader reader(path);
    std::vector<TaggedChatSample> records;
    std::string line;
    while (reader.next(line)) {
        rapidjson::Document d;
        d.ParseInsitu(line.data());
        if (d.HasParseError())
            throw JsonlError(path, reader.line_number(),
                             rapidjson::GetParseError_En(d.GetParseError()));
        if (!d.IsObject() || !d.HasMember("id") || !d["id"].IsString())
            throw JsonlError(path, reader.line_number(), "missing 'id'");

        TaggedChatSample rec;
        rec.sample.id = d["id"].GetString();
        if (!d.HasMember("turns") || !d["turns"].IsArray())
            throw JsonlError(path, reader.line_number(), "missing 'turns'");
        for (const auto& t : d["turns"].GetArray()) {
            if (!t.IsObject() || !t.HasMember("role") || !t["role"].IsString() ||
                !t.HasMember("text") || !t["text"].IsString())
                throw JsonlError(path, reader.line_number(), "malformed turn");
            rec.sample.turns.push_back({t["role"].GetString(),
                                        std::string(t["text"].GetString(),
                                                    t["text"].GetStringLength())});
        }
        if (d.HasMember("reasoning_trace") && d["reasoning_trace"].IsString())
            rec.sample.reasoning_trace =
                std::string(d["reasoning_trace"].GetString(),
                            d["reasoning_trace"].GetStringLength());
        if (d.HasMember("mode") && d["mode"].IsString()) {
            std::string_view mode = d["mode"].GetString();
            if (mode == "reasoning")
                rec.sample.mode = ChatMode::Reasoning;
            else if (mode == "non_reasoning")
                rec.sample.mode = ChatMode::NonReasoning;
            else
                throw JsonlError(path, reader.line_number(),
                                 "unknown mode '" + std::string(mode) + "'");
        }
        if (d.HasMember("difficulty") && d["difficulty"].IsString()) {
            auto diff = difficulty_from_name(d["difficulty"].GetString());
            if (!diff)
                throw JsonlError(path, reader.line_number(),
                                 std::string("unknown difficulty '") +
                                     d["difficulty"].GetString() + "'");
            rec.difficulty = *diff;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_chat_samples(const std::vector<TaggedChatSample>& records,
                        const std::string& path, bool include_rendered) {
    JsonlWriter writer(path);
    std::string line;
    for (const auto& rec : records) {
        line.clear();
        line += "{\"id\":";
        append_json_string(line, rec.sample.id);
        line += ",\"turns\":[";
        for (size_t i = 0; i < rec.sample.turns.size(); ++i) {
            if (i) line.push_back(',');
            line += "{\"role\":";
            append_json_string(line, rec.sample.turns[i].role);
            line += ",\"text\":";
            append_json_string(line, rec.sample.turns[i].text);
            line += "}";
        }
        line += "]";
        if (rec.sample.reasoning_trace) {
            line += ",\"reasoning_trace\":";
            append_json_string(line, *rec.sample.reasoning_trace);
        }
        line += ",\"mode\":\"";
        line += rec.sample.mode == ChatMode::Reasoning ? "reasoning" : "non_reasoning";
        line += "\",\"difficulty\":\"";
        line += difficulty_name(rec.difficulty);
        line += "\"";
        if (include_rendered) {
            line += ",\"text\":";
            append_json_string(line, render_hybrid(rec.sample));
        }
        line += "}";
        writer.write_line(line);
    }
    writer.close();
}

}  // namespace curator
