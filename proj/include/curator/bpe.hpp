#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace curator {

// One merge rule; merging (left, right) produces id 256 + its index.
struct BpeMerge {
    uint32_t left = 0;
    uint32_t right = 0;

    bool operator==(const BpeMerge&) const = default;
};

struct BpeTrainOptions {
    size_t target_vocab = 0;
    std::vector<std::string> special_tokens;
    // When set, merges never cross whitespace/non-whitespace boundaries.
    bool pre_split = false;
};

class UnknownTokenError : public std::runtime_error {
public:
    explicit UnknownTokenError(uint32_t id)
        : std::runtime_error("unknown token id " + std::to_string(id)), id_(id) {}
    uint32_t id() const { return id_; }

private:
    uint32_t id_;
};

// Byte-level BPE vocabulary: 256 byte symbols, an ordered merge list, and
// special tokens reserved at the top of the id space.
class BpeModel {
public:
    static constexpr uint32_t kByteVocab = 256;

    BpeModel() = default;
    BpeModel(std::vector<BpeMerge> merges, std::vector<std::string> special_tokens,
             bool pre_split);

    uint32_t vocab_size() const {
        return kByteVocab + uint32_t(merges_.size()) + uint32_t(special_tokens_.size());
    }
    const std::vector<BpeMerge>& merges() const { return merges_; }
    const std::vector<std::string>& special_tokens() const { return special_tokens_; }
    bool pre_split() const { return pre_split_; }

    // Specials occupy [vocab_size - |specials|, vocab_size).
    std::optional<uint32_t> special_id(std::string_view name) const;
    uint32_t pad_id_or_throw() const;  // the "<pad>" special

    std::vector<uint32_t> encode(std::string_view text) const;
    void encode_into(std::string_view text, std::vector<uint32_t>& out) const;
    std::string decode(std::span<const uint32_t> ids) const;

    // Raw bytes of one token (special tokens decode to their names).
    const std::string& token_string(uint32_t id) const;

    // Prefix model over the first merge_count merges; the nested-vocabulary
    // companion of this model.
    BpeModel truncated(size_t merge_count) const;

    void save(const std::string& path) const;
    static BpeModel load(const std::string& path);

private:
    void build_tables();

    std::vector<BpeMerge> merges_;
    std::vector<std::string> special_tokens_;
    bool pre_split_ = false;

    std::vector<std::string> token_bytes_;             // id -> decoded bytes
    std::unordered_map<uint64_t, uint32_t> merge_rank_;  // (left<<32|right) -> rank
};

// Greedy highest-frequency pair merging until target_vocab symbols exist
// (fewer when no pair occurs at least twice). Ties break toward the lowest
// (left, right) pair, which pins the learned merge order.
BpeModel bpe_train(const std::vector<std::string>& corpus, const BpeTrainOptions& opts);

// --- Compression evaluation ---------------------------------------------

struct DomainBpt {
    uint64_t bytes = 0;
    uint64_t tokens = 0;

    double bpt() const { return tokens ? double(bytes) / double(tokens) : 0.0; }
};

struct BptReport {
    std::map<std::string, DomainBpt> per_domain;
    DomainBpt overall;
    std::vector<std::string> warnings;  // e.g. skipped empty domains
};

BptReport bpt_eval(const BpeModel& model,
                   const std::map<std::string, std::vector<std::string>>& eval_sets);

// One tokenizer per mixture ratio, each trained on a byte-budgeted sample.
struct SweepRow {
    std::string ratio_label;
    std::string domain;  // eval domain or "overall"
    uint64_t bytes = 0;
    uint64_t tokens = 0;
    double bpt = 0.0;
};

std::vector<SweepRow> mixture_sweep(
    const std::map<std::string, std::vector<std::string>>& sources,
    const std::vector<std::map<std::string, double>>& ratios, size_t target_vocab,
    uint64_t byte_budget, const std::map<std::string, std::vector<std::string>>& eval_sets,
    const BpeTrainOptions& base_opts = {});

// --- Vocabulary audits ----------------------------------------------------

struct HarmfulHit {
    uint32_t token_id = 0;
    std::string token;
    std::string lexicon_entry;
};

struct VocabAuditResult {
    uint64_t kr_tokens = 0;
    uint64_t other_tokens = 0;
    double kr_share = 0.0;
    std::vector<HarmfulHit> harmful_hits;
};

// A token counts as KR when its bytes are valid UTF-8 containing at least
// one Hangul codepoint; harmful hits are substring matches of lexicon
// entries against decoded tokens.
VocabAuditResult vocab_audit(const BpeModel& model,
                             const std::vector<std::string>& harmful_lexicon);

}  // namespace curator
