#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "curator/document.hpp"

namespace curator {

// Buffered line reader over a plain or gzip-compressed file ("-" = stdin,
// selected by file extension). Lines are returned without the trailing
// newline; a trailing \r is stripped as well.
class LineReader {
public:
    explicit LineReader(const std::string& path);
    ~LineReader();
    LineReader(LineReader&&) noexcept;
    LineReader& operator=(LineReader&&) noexcept;

    bool next(std::string& line);
    size_t line_number() const { return line_no_; }
    const std::string& path() const { return path_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string path_;
    size_t line_no_ = 0;
};

class JsonlError : public std::runtime_error {
public:
    JsonlError(const std::string& path, size_t line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
          line_(line) {}

    size_t line() const { return line_; }

private:
    size_t line_;
};

enum class OnBadLine { Abort, Skip };

// Streaming reader of Document records, one JSON object per line.
// Records require non-empty `id` and a `text` string; `lang` and a
// string-valued `meta` object are optional. Unknown fields are ignored.
class JsonlReader {
public:
    explicit JsonlReader(const std::string& path, OnBadLine policy = OnBadLine::Abort);

    std::optional<Document> next();

    size_t skipped() const { return skipped_; }
    size_t line_number() const { return reader_.line_number(); }

private:
    LineReader reader_;
    OnBadLine policy_;
    size_t skipped_ = 0;
    std::string line_;
};

// Streaming writer ("-" = stdout). Field order is fixed (id, text, lang,
// meta) and meta keys serialize in map order, so output is deterministic.
class JsonlWriter {
public:
    explicit JsonlWriter(const std::string& path);
    ~JsonlWriter();
    JsonlWriter(JsonlWriter&&) noexcept;
    JsonlWriter& operator=(JsonlWriter&&) noexcept;

    void write(const Document& doc);
    void write_line(std::string_view raw);  // raw must be a serialized JSON object
    void close();

    uint64_t documents_written() const { return docs_; }
    uint64_t bytes_written() const { return bytes_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    uint64_t docs_ = 0;
    uint64_t bytes_ = 0;
};

// Serialization helpers shared by every module that emits JSON lines.
void append_json_string(std::string& out, std::string_view s);
std::string serialize_document(const Document& doc);

// Parses one JSONL record; returns nullopt with `error` set on failure.
std::optional<Document> parse_document_line(std::string& line, std::string& error);

}  // namespace curator
