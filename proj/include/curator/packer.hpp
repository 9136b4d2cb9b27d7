#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace curator {

struct TokenizedDoc {
    std::string id;
    std::vector<uint32_t> tokens;
    bool reasoning = false;
};

// One fixed-length training sequence. `boundaries` are fenceposts over the
// non-pad region: boundaries.front() == 0, strictly ascending, and
// boundaries.back() == length - pad_len; segment i covers
// [boundaries[i], boundaries[i+1]) and belongs to source_ids[i].
struct PackedSequence {
    std::vector<uint32_t> tokens;
    std::vector<uint32_t> boundaries;
    uint32_t pad_len = 0;
    std::vector<std::string> source_ids;

    bool operator==(const PackedSequence&) const = default;
};

struct PackerConfig {
    uint32_t sequence_length = 4096;
    uint32_t pad_id = 0;
};

class OversizeDocError : public std::runtime_error {
public:
    OversizeDocError(std::string id, size_t tokens, size_t limit)
        : std::runtime_error("document '" + id + "' has " + std::to_string(tokens) +
                             " tokens, over the per-sequence limit " +
                             std::to_string(limit)),
          id_(std::move(id)) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

// Streaming first-fit packer; one logical packer per output shard.
// Oversize documents split into consecutive full-length parts, with every
// part entering the same first-fit flow. Zero-token documents are skipped.
class Packer {
public:
    explicit Packer(const PackerConfig& cfg);

    void add(const TokenizedDoc& doc, std::vector<PackedSequence>& out);
    void finish(std::vector<PackedSequence>& out);

    uint64_t docs_skipped_empty() const { return skipped_empty_; }

private:
    void append_segment(const std::string& id, const uint32_t* data, size_t len,
                        std::vector<PackedSequence>& out);
    void flush(std::vector<PackedSequence>& out);

    PackerConfig cfg_;
    PackedSequence open_;
    uint64_t skipped_empty_ = 0;
};

std::vector<PackedSequence> pack(const std::vector<TokenizedDoc>& docs,
                                 const PackerConfig& cfg);

// One document per sequence, padded to full length; documents longer than
// the sequence length raise OversizeDocError.
std::vector<PackedSequence> pad_only(const std::vector<TokenizedDoc>& docs,
                                     const PackerConfig& cfg);

struct LengthGateReport {
    uint64_t docs_in = 0;
    uint64_t docs_kept = 0;
    uint64_t tokens_dropped = 0;
    std::vector<std::string> dropped_ids;
};

// Keep iff token count <= max_tokens.
std::pair<std::vector<TokenizedDoc>, LengthGateReport> length_gate(
    const std::vector<TokenizedDoc>& docs, size_t max_tokens = 16384);

// Reasoning-flagged documents go to pad_only, the rest to pack.
struct RouteResult {
    std::vector<PackedSequence> packed;
    std::vector<PackedSequence> padded;
};

RouteResult route(const std::vector<TokenizedDoc>& docs, const PackerConfig& cfg);

// Binary shard format plus a JSONL index of per-sequence source ids.
void write_shard(const std::vector<PackedSequence>& sequences, const PackerConfig& cfg,
                 const std::string& bin_path, const std::string& index_path);
std::vector<PackedSequence> read_shard(const std::string& bin_path,
                                       const std::string& index_path);

}  // namespace curator
