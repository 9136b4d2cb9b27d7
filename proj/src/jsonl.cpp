#include "curator/jsonl.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <vector>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>

namespace curator {

namespace {

constexpr size_t kBufSize = 1 << 20;

bool has_suffix(const std::string& s, const char* suffix) {
    size_t n = std::strlen(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

}  // namespace

struct LineReader::Impl {
    FILE* file = nullptr;
    gzFile gz = nullptr;
    bool owns_file = false;
    std::vector<char> buf;
    size_t pos = 0;
    size_t end = 0;
    bool eof = false;

    ~Impl() {
        if (gz) gzclose(gz);
        if (file && owns_file) std::fclose(file);
    }

    size_t refill(char* dst, size_t cap) {
        if (gz) {
            int n = gzread(gz, dst, static_cast<unsigned>(cap));
            if (n < 0) {
                int errnum = 0;
                const char* msg = gzerror(gz, &errnum);
                throw std::runtime_error(std::string("gzip read error: ") +
                                         (msg ? msg : "unknown"));
            }
            return static_cast<size_t>(n);
        }
        return std::fread(dst, 1, cap, file);
    }

    bool next_line(std::string& line) {
        line.clear();
        while (true) {
            if (pos == end) {
                if (eof) return !line.empty();
                end = refill(buf.data(), buf.size());
                pos = 0;
                if (end == 0) {
                    eof = true;
                    return !line.empty();
                }
            }
            const char* nl =
                static_cast<const char*>(std::memchr(buf.data() + pos, '\n', end - pos));
            if (nl) {
                line.append(buf.data() + pos, nl - (buf.data() + pos));
                pos = static_cast<size_t>(nl - buf.data()) + 1;
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return true;
            }
            line.append(buf.data() + pos, end - pos);
            pos = end;
        }
    }
};

LineReader::LineReader(const std::string& path) : impl_(new Impl), path_(path) {
    impl_->buf.resize(kBufSize);
    if (path == "-") {
        impl_->file = stdin;
    } else if (has_suffix(path, ".gz")) {
        impl_->gz = gzopen(path.c_str(), "rb");
        if (!impl_->gz) throw std::runtime_error("cannot open " + path);
        gzbuffer(impl_->gz, kBufSize);
    } else if (has_suffix(path, ".zst") || has_suffix(path, ".zstd")) {
        throw std::runtime_error("zstd input is not supported in this build: " + path);
    } else {
        impl_->file = std::fopen(path.c_str(), "rb");
        if (!impl_->file) throw std::runtime_error("cannot open " + path);
        impl_->owns_file = true;
    }
}

LineReader::~LineReader() = default;
LineReader::LineReader(LineReader&&) noexcept = default;
LineReader& LineReader::operator=(LineReader&&) noexcept = default;

bool LineReader::next(std::string& line) {
    if (!impl_->next_line(line)) return false;
    ++line_no_;
    return true;
}

std::optional<Document> parse_document_line(std::string& line, std::string& error) {
    rapidjson::Document d;
    d.ParseInsitu(line.data());
    if (d.HasParseError()) {
        error = rapidjson::GetParseError_En(d.GetParseError());
        return std::nullopt;
    }
    if (!d.IsObject()) {
        error = "record is not a JSON object";
        return std::nullopt;
    }

    Document doc;
    auto id = d.FindMember("id");
    if (id == d.MemberEnd() || !id->value.IsString() || id->value.GetStringLength() == 0) {
        error = "missing or empty 'id'";
        return std::nullopt;
    }
    doc.id.assign(id->value.GetString(), id->value.GetStringLength());

    auto text = d.FindMember("text");
    if (text == d.MemberEnd() || !text->value.IsString()) {
        error = "missing 'text'";
        return std::nullopt;
    }
    doc.text.assign(text->value.GetString(), text->value.GetStringLength());

    auto lang = d.FindMember("lang");
    if (lang != d.MemberEnd()) {
        if (!lang->value.IsString()) {
            error = "'lang' is not a string";
            return std::nullopt;
        }
        doc.lang.assign(lang->value.GetString(), lang->value.GetStringLength());
    }

    auto meta = d.FindMember("meta");
    if (meta != d.MemberEnd()) {
        if (!meta->value.IsObject()) {
            error = "'meta' is not an object";
            return std::nullopt;
        }
        for (auto it = meta->value.MemberBegin(); it != meta->value.MemberEnd(); ++it) {
            if (!it->value.IsString()) {
                error = std::string("meta value for '") + it->name.GetString() +
                        "' is not a string";
                return std::nullopt;
            }
            doc.meta.emplace(
                std::string(it->name.GetString(), it->name.GetStringLength()),
                std::string(it->value.GetString(), it->value.GetStringLength()));
        }
    }
    return doc;
}

JsonlReader::JsonlReader(const std::string& path, OnBadLine policy)
    : reader_(path), policy_(policy) {}

std::optional<Document> JsonlReader::next() {
    std::string error;
    while (reader_.next(line_)) {
        auto doc = parse_document_line(line_, error);
        if (doc) return doc;
        if (policy_ == OnBadLine::Abort)
            throw JsonlError(reader_.path(), reader_.line_number(), error);
        ++skipped_;
    }
    return std::nullopt;
}

void append_json_string(std::string& out, std::string_view s) {
    static const char* hex = "0123456789abcdef";
    out.push_back('"');
    for (unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (c < 0x20) {
                    out += "\\u00";
                    out.push_back(hex[c >> 4]);
                    out.push_back(hex[c & 0xF]);
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
    out.push_back('"');
}

std::string serialize_document(const Document& doc) {
    std::string out;
    out.reserve(doc.text.size() + doc.id.size() + 32);
    out += "{\"id\":";
    append_json_string(out, doc.id);
    out += ",\"text\":";
    append_json_string(out, doc.text);
    if (!doc.lang.empty()) {
        out += ",\"lang\":";
        append_json_string(out, doc.lang);
    }
    if (!doc.meta.empty()) {
        out += ",\"meta\":{";
        bool first = true;
        for (const auto& [key, value] : doc.meta) {
            if (!first) out.push_back(',');
            first = false;
            append_json_string(out, key);
            out.push_back(':');
            append_json_string(out, value);
        }
        out.push_back('}');
    }
    out.push_back('}');
    return out;
}

struct JsonlWriter::Impl {
    FILE* file = nullptr;
    bool owns_file = false;
    std::string buf;

    void flush_buf() {
        if (buf.empty()) return;
        if (std::fwrite(buf.data(), 1, buf.size(), file) != buf.size())
            throw std::runtime_error("write failed");
        buf.clear();
    }

    ~Impl() {
        try {
            if (file) {
                flush_buf();
                std::fflush(file);
            }
        } catch (...) {
        }
        if (file && owns_file) std::fclose(file);
    }
};

JsonlWriter::JsonlWriter(const std::string& path) : impl_(new Impl) {
    if (path == "-") {
        impl_->file = stdout;
    } else {
        impl_->file = std::fopen(path.c_str(), "wb");
        if (!impl_->file) throw std::runtime_error("cannot open " + path + " for writing");
        impl_->owns_file = true;
    }
    impl_->buf.reserve(kBufSize);
}

JsonlWriter::~JsonlWriter() = default;
JsonlWriter::JsonlWriter(JsonlWriter&&) noexcept = default;
JsonlWriter& JsonlWriter::operator=(JsonlWriter&&) noexcept = default;

void JsonlWriter::write(const Document& doc) { write_line(serialize_document(doc)); }

void JsonlWriter::write_line(std::string_view raw) {
    impl_->buf.append(raw);
    impl_->buf.push_back('\n');
    ++docs_;
    bytes_ += raw.size() + 1;
    if (impl_->buf.size() >= kBufSize) impl_->flush_buf();
}

void JsonlWriter::close() {
    if (!impl_->file) return;
    impl_->flush_buf();
    std::fflush(impl_->file);
    if (impl_->owns_file) std::fclose(impl_->file);
    impl_->file = nullptr;
}

}  // namespace curator
