#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace curator {

// Decoded codepoint plus the number of bytes it consumed.
struct DecodedChar {
    char32_t cp = 0;
    unsigned len = 0;
};

// Strict UTF-8 decode of the sequence starting at text[pos].
// Returns nullopt on malformed input (overlong forms, surrogates,
// out-of-range codepoints, truncated sequences).
std::optional<DecodedChar> utf8_decode(std::string_view text, size_t pos);

// Byte offset of the first invalid sequence, or npos if valid.
size_t utf8_find_invalid(std::string_view text);

inline bool utf8_valid(std::string_view text) {
    return utf8_find_invalid(text) == std::string_view::npos;
}

// Number of codepoints; invalid bytes each count as one.
size_t utf8_length(std::string_view text);

// Appends the UTF-8 encoding of cp to out.
void utf8_append(std::string& out, char32_t cp);

// Unicode general category tests (letter = L*, digit = Nd).
bool is_letter(char32_t cp);
bool is_digit(char32_t cp);

// Hangul per the Syllables, Jamo, and Compatibility Jamo blocks.
inline bool is_hangul(char32_t cp) {
    return (cp >= 0xAC00 && cp <= 0xD7A3) || (cp >= 0x1100 && cp <= 0x11FF) ||
           (cp >= 0x3130 && cp <= 0x318F);
}

bool contains_hangul(std::string_view text);

}  // namespace curator
