#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "curator/document.hpp"

namespace curator {

// Whitespace normalization applied before any filtering:
//   1. CR and CRLF line endings become `\n`.
//   2. Runs of ASCII spaces/tabs collapse to a single space.
//   3. Runs of three or more `\n` collapse to exactly two.
// Other Unicode whitespace is left untouched.
//
// Returns nullopt when the result is empty or whitespace-only; such
// documents are dropped. Throws Utf8Error on malformed input.
std::optional<std::string> normalize_text(std::string_view text);

// Document-level wrappers; rethrow Utf8Error with the document id attached.
std::optional<Document> normalize(const Document& doc);
std::optional<Document> normalize(Document&& doc);

}  // namespace curator
