#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "curator/sieve.hpp"

namespace curator {

enum class ChatMode { Reasoning, NonReasoning };

struct ChatTurn {
    std::string role;  // "user" or "assistant"
    std::string text;

    bool operator==(const ChatTurn&) const = default;
};

// One chat training sample. Roles alternate starting with "user" and the
// final turn is the assistant answer; reasoning mode requires a trace.
struct ChatSample {
    std::string id;
    std::vector<ChatTurn> turns;
    std::optional<std::string> reasoning_trace;
    ChatMode mode = ChatMode::NonReasoning;

    bool operator==(const ChatSample&) const = default;
};

// First occurrence wins; later samples with a seen id are dropped.
std::vector<ChatSample> uuid_dedup(const std::vector<ChatSample>& samples);

// Chat template v1. Each turn renders as
//   <|user|>\n{text}<|end|>\n   or   <|assistant|>\n{text}<|end|>\n
// and the final assistant turn opens with a think block before the answer:
// reasoning mode wraps the trace as <think>{trace}</think>\n, non-reasoning
// mode inserts the literal empty block <think>\n\n</think> followed by \n.
std::string render_hybrid(const ChatSample& sample);

// Inverse of render_hybrid for well-formed renderings.
ChatSample parse_hybrid(std::string_view text);

struct TaggedChatSample {
    ChatSample sample;
    Difficulty difficulty = Difficulty::Easy;

    bool operator==(const TaggedChatSample&) const = default;
};

struct ModeAssignOptions {
    bool medium_to_reasoning = true;  // medium-difficulty samples get a trace
    uint64_t seed = 0;
};

// Easy samples become non-reasoning, hard ones reasoning, then the larger
// side is down-sampled for an exact 1:1 mode balance. Difficulty tags are
// preserved on the output.
std::vector<TaggedChatSample> mode_assign(const std::vector<TaggedChatSample>& records,
                                          const ModeAssignOptions& opts);

// JSONL: {id, turns: [{role, text}...], reasoning_trace?, mode, difficulty?}.
std::vector<TaggedChatSample> read_chat_samples(const std::string& path);
void write_chat_samples(const std::vector<TaggedChatSample>& records,
                        const std::string& path, bool include_rendered = false);

}  // namespace curator
