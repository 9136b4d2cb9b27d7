#include "curator/normalize.hpp"

#include <algorithm>

#include "curator/unicode.hpp"

namespace curator {

namespace {

enum class NormalizeOutcome { Unchanged, Changed, Empty };

// Detects text that normalization would not change: no tabs or CRs, no
// double spaces, no 3+ newline runs, valid UTF-8. Returns false on the
// first byte that needs the rewriting pass.
bool is_already_normal(std::string_view text, bool& has_content, size_t& resume_at) {
    size_t space_run = 0;
    size_t newline_run = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (c == ' ') {
            if (++space_run > 1) {
                resume_at = i;
                return false;
            }
            newline_run = 0;
        } else if (c == '\n') {
            if (++newline_run > 2) {
                resume_at = i;
                return false;
            }
            space_run = 0;
        } else if (c == '\t' || c == '\r' || c >= 0x80) {
            resume_at = i;
            return false;
        } else {
            space_run = 0;
            newline_run = 0;
            has_content = has_content || !is_word_separator(char(c));
        }
    }
    return true;
}

NormalizeOutcome normalize_into(std::string_view text, std::string& out) {
    bool has_content = false;
    size_t start = 0;
    if (is_already_normal(text, has_content, start))
        return has_content ? NormalizeOutcome::Unchanged : NormalizeOutcome::Empty;

    out.clear();
    out.reserve(text.size());
    // Trailing space/newline runs before `start` are re-processed so the run
    // logic sees them whole.
    while (start > 0 && (text[start - 1] == ' ' || text[start - 1] == '\n')) --start;
    out.append(text.substr(0, start));

    size_t i = start;
    const size_t n = text.size();
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (c == ' ' || c == '\t') {
            while (i < n && (text[i] == ' ' || text[i] == '\t')) ++i;
            out.push_back(' ');
        } else if (c == '\n' || c == '\r') {
            // Each \n, \r\n, or bare \r counts as one line break.
            size_t breaks = 0;
            while (i < n && (text[i] == '\n' || text[i] == '\r')) {
                if (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n')
                    i += 2;
                else
                    ++i;
                ++breaks;
            }
            out.append(std::min<size_t>(breaks, 2), '\n');
        } else if (c < 0x80) {
            out.push_back(char(c));
            ++i;
            has_content = has_content || !is_word_separator(char(c));
        } else {
            auto dc = utf8_decode(text, i);
            if (!dc) throw Utf8Error("", i);
            out.append(text.substr(i, dc->len));
            i += dc->len;
            has_content = true;
        }
    }
    return has_content ? NormalizeOutcome::Changed : NormalizeOutcome::Empty;
}

}  // namespace

std::optional<std::string> normalize_text(std::string_view text) {
    std::string out;
    switch (normalize_into(text, out)) {
        case NormalizeOutcome::Empty: return std::nullopt;
        case NormalizeOutcome::Unchanged: return std::string(text);
        case NormalizeOutcome::Changed: return out;
    }
    return std::nullopt;
}

std::optional<Document> normalize(const Document& doc) {
    Document copy = doc;
    return normalize(std::move(copy));
}

std::optional<Document> normalize(Document&& doc) {
    std::string rewritten;
    NormalizeOutcome outcome;
    try {
        outcome = normalize_into(doc.text, rewritten);
    } catch (const Utf8Error& e) {
        throw Utf8Error(doc.id, e.byte_offset());
    }
    if (outcome == NormalizeOutcome::Empty) return std::nullopt;
    Document out = std::move(doc);
    if (outcome == NormalizeOutcome::Changed) out.text = std::move(rewritten);
    return out;
}

}  // namespace curator
