#include "curator/packer.hpp"

#include <cstring>
#include <fstream>

#include <rapidjson/document.h>

#include "curator/jsonl.hpp"

namespace curator {

namespace {

constexpr char kMagic[4] = {'C', 'P', 'K', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
}

}  // namespace

Packer::Packer(const PackerConfig& cfg) : cfg_(cfg) {
    if (cfg.sequence_length == 0) throw std::invalid_argument("sequence_length must be > 0");
    open_.tokens.reserve(cfg.sequence_length);
    open_.boundaries.push_back(0);
}

void Packer::append_segment(const std::string& id, const uint32_t* data, size_t len,
                            std::vector<PackedSequence>& out) {
    if (open_.tokens.size() + len > cfg_.sequence_length) flush(out);
    open_.tokens.insert(open_.tokens.end(), data, data + len);
    open_.boundaries.push_back(uint32_t(open_.tokens.size()));
    open_.source_ids.push_back(id);
    if (open_.tokens.size() == cfg_.sequence_length) flush(out);
}

void Packer::flush(std::vector<PackedSequence>& out) {
    if (open_.tokens.empty()) return;
    open_.pad_len = cfg_.sequence_length - uint32_t(open_.tokens.size());
    open_.tokens.resize(cfg_.sequence_length, cfg_.pad_id);
    out.push_back(std::move(open_));
    open_ = PackedSequence{};
    open_.tokens.reserve(cfg_.sequence_length);
    open_.boundaries.push_back(0);
}

void Packer::add(const TokenizedDoc& doc, std::vector<PackedSequence>& out) {
    if (doc.tokens.empty()) {
        ++skipped_empty_;
        return;
    }
    const uint32_t L = cfg_.sequence_length;
    size_t offset = 0;
    while (doc.tokens.size() - offset > L) {
        append_segment(doc.id, doc.tokens.data() + offset, L, out);
        offset += L;
    }
    append_segment(doc.id, doc.tokens.data() + offset, doc.tokens.size() - offset, out);
}

void Packer::finish(std::vector<PackedSequence>& out) { flush(out); }

std::vector<PackedSequence> pack(const std::vector<TokenizedDoc>& docs,
                                 const PackerConfig& cfg) {
    Packer packer(cfg);
    std::vector<PackedSequence> out;
    for (const auto& doc : docs) packer.add(doc, out);
    packer.finish(out);
    return out;
}

std::vector<PackedSequence> pad_only(const std::vector<TokenizedDoc>& docs,
                                     const PackerConfig& cfg) {
    std::vector<PackedSequence> out;
    for (const auto& doc : docs) {
        if (doc.tokens.empty()) continue;
        if (doc.tokens.size() > cfg.sequence_length)
            throw OversizeDocError(doc.id, doc.tokens.size(), cfg.sequence_length);
        PackedSequence seq;
        seq.tokens = doc.tokens;
        seq.pad_len = cfg.sequence_length - uint32_t(doc.tokens.size());
        seq.tokens.resize(cfg.sequence_length, cfg.pad_id);
        seq.boundaries = {0, uint32_t(doc.tokens.size())};
        seq.source_ids = {doc.id};
        out.push_back(std::move(seq));
    }
    return out;
}

std::pair<std::vector<TokenizedDoc>, LengthGateReport> length_gate(
    const std::vector<TokenizedDoc>& docs, size_t max_tokens) {
    std::vector<TokenizedDoc> kept;
    LengthGateReport report;
    report.docs_in = docs.size();
    for (const auto& doc : docs) {
        if (doc.tokens.size() <= max_tokens) {
            kept.push_back(doc);
        } else {
            report.tokens_dropped += doc.tokens.size();
            report.dropped_ids.push_back(doc.id);
        }
    }
    report.docs_kept = kept.size();
    return {std::move(kept), report};
}

RouteResult route(const std::vector<TokenizedDoc>& docs, const PackerConfig& cfg) {
    RouteResult result;
    Packer packer(cfg);
    for (const auto& doc : docs) {
        if (doc.reasoning) {
            if (doc.tokens.empty()) continue;
            if (doc.tokens.size() > cfg.sequence_length)
                throw OversizeDocError(doc.id, doc.tokens.size(), cfg.sequence_length);
            std::vector<TokenizedDoc> one = {doc};
            auto seqs = pad_only(one, cfg);
            result.padded.insert(result.padded.end(), seqs.begin(), seqs.end());
        } else {
            packer.add(doc, result.packed);
        }
    }
    packer.finish(result.packed);
    return result;
}

void write_shard(const std::vector<PackedSequence>& sequences, const PackerConfig& cfg,
                 const std::string& bin_path, const std::string& index_path) {
    std::ofstream os(bin_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + bin_path + " for writing");
    os.write(kMagic, 4);
    write_pod(os, uint32_t(1));  // version
    write_pod(os, cfg.sequence_length);
    write_pod(os, cfg.pad_id);
    write_pod(os, uint64_t(sequences.size()));

    JsonlWriter index(index_path);
    std::string line;
    for (size_t i = 0; i < sequences.size(); ++i) {
        const auto& seq = sequences[i];
        os.write(reinterpret_cast<const char*>(seq.tokens.data()),
                 std::streamsize(seq.tokens.size() * sizeof(uint32_t)));
        write_pod(os, uint32_t(seq.boundaries.size()));
        os.write(reinterpret_cast<const char*>(seq.boundaries.data()),
                 std::streamsize(seq.boundaries.size() * sizeof(uint32_t)));

        line.clear();
        line += "{\"seq\":" + std::to_string(i) + ",\"pad_len\":" +
                std::to_string(seq.pad_len) + ",\"ids\":[";
        for (size_t j = 0; j < seq.source_ids.size(); ++j) {
            if (j) line.push_back(',');
            append_json_string(line, seq.source_ids[j]);
        }
        line += "]}";
        index.write_line(line);
    }
    index.close();
    if (!os) throw std::runtime_error("write failed: " + bin_path);
}

std::vector<PackedSequence> read_shard(const std::string& bin_path,
                                       const std::string& index_path) {
    std::ifstream is(bin_path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + bin_path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a packed shard file: " + bin_path);
    uint32_t version = 0, length = 0, pad_id = 0;
    uint64_t count = 0;
    read_pod(is, version);
    read_pod(is, length);
    read_pod(is, pad_id);
    read_pod(is, count);
    if (!is || version != 1) throw std::runtime_error("unsupported shard version");

    std::vector<PackedSequence> sequences(count);
    for (auto& seq : sequences) {
        seq.tokens.resize(length);
        is.read(reinterpret_cast<char*>(seq.tokens.data()),
                std::streamsize(length * sizeof(uint32_t)));
        uint32_t boundary_count = 0;
        read_pod(is, boundary_count);
        seq.boundaries.resize(boundary_count);
        is.read(reinterpret_cast<char*>(seq.boundaries.data()),
                std::streamsize(boundary_count * sizeof(uint32_t)));
        if (!is) throw std::runtime_error("truncated shard file: " + bin_path);
        seq.pad_len = length - (seq.boundaries.empty() ? 0 : seq.boundaries.back());
    }

    LineReader reader(index_path);
    std::string line;
    size_t i = 0;
    while (reader.next(line) && i < sequences.size()) {
        rapidjson::Document d;
        d.ParseInsitu(line.data());
        if (d.HasParseError() || !d.IsObject() || !d.HasMember("ids") || !d["ids"].IsArray())
            throw JsonlError(index_path, reader.line_number(), "malformed index row");
        for (const auto& v : d["ids"].GetArray()) {
            if (!v.IsString())
                throw JsonlError(index_path, reader.line_number(), "index id not a string");
            sequences[i].source_ids.emplace_back(v.GetString(), v.GetStringLength());
        }
        ++i;
    }
    return sequences;
}

}  // namespace curator
