#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace curator {

// One text sample flowing through the pipeline. `meta` carries free-form
// string attributes (source name, stage tag, reasoning flag, quality score,
// difficulty label); keys used by built-in stages are documented per stage.
struct Document {
    std::string id;
    std::string text;
    std::string lang;                         // empty = unknown
    std::map<std::string, std::string> meta;  // ordered for stable serialization

    bool operator==(const Document&) const = default;
};

// Byte range of one word within the text it was computed from.
struct WordSpan {
    size_t begin = 0;
    size_t end = 0;  // exclusive

    size_t size() const { return end - begin; }
};

struct TextStats {
    size_t char_count = 0;  // Unicode codepoints
    size_t byte_count = 0;
    size_t word_count = 0;  // maximal runs of non-whitespace
    size_t line_count = 0;  // newline-separated, counting a trailing partial line
    std::vector<WordSpan> words;
};

// Word separators: ASCII whitespace. Words are space-delimited tokens, so
// anything that is not one of these characters belongs to a word.
inline bool is_word_separator(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

TextStats stats(std::string_view text);

// Thrown when a document's text is not valid UTF-8.
class Utf8Error : public std::runtime_error {
public:
    Utf8Error(std::string doc_id, size_t byte_offset);

    const std::string& doc_id() const { return doc_id_; }
    size_t byte_offset() const { return byte_offset_; }

private:
    std::string doc_id_;
    size_t byte_offset_;
};

}  // namespace curator
