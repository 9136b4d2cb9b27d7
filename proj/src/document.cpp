#include "curator/document.hpp"

#include "curator/unicode.hpp"

namespace curator {

TextStats stats(std::string_view text) {
    TextStats st;
    const size_t n = text.size();
    st.byte_count = n;
    st.words.reserve(n / 6 + 1);

    // Single pass: chars (non-continuation bytes), word spans, newlines.
    size_t newlines = 0;
    size_t chars = 0;
    size_t word_begin = 0;
    bool in_word = false;
    for (size_t i = 0; i < n; ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        chars += (c & 0xC0) != 0x80;
        newlines += c == '\n';
        if (is_word_separator(char(c))) {
            if (in_word) {
                st.words.push_back({word_begin, i});
                in_word = false;
            }
        } else if (!in_word) {
            word_begin = i;
            in_word = true;
        }
    }
    if (in_word) st.words.push_back({word_begin, n});

    st.char_count = chars;
    st.word_count = st.words.size();
    if (n > 0) {
        st.line_count = newlines + 1;
        if (text.back() == '\n') --st.line_count;
    }
    return st;
}

Utf8Error::Utf8Error(std::string doc_id, size_t byte_offset)
    : std::runtime_error("invalid UTF-8 in document '" + doc_id + "' at byte offset " +
                         std::to_string(byte_offset)),
      doc_id_(std::move(doc_id)),
      byte_offset_(byte_offset) {}

}  // namespace curator
