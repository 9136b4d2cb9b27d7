#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "curator/bloom.hpp"
#include "curator/document.hpp"

namespace curator {

// Document mode drops whole documents whose n-gram containment crosses the
// threshold; OldBoth additionally removes individual duplicated paragraphs
// and is the stricter of the two.
enum class DedupMode { Document, OldBoth };

std::string_view dedup_mode_name(DedupMode mode);
std::optional<DedupMode> dedup_mode_from_name(std::string_view name);

struct DedupConfig {
    DedupMode mode = DedupMode::Document;
    size_t ngram_words = 13;  // 0 forces whole-unit hashing (exact dedup)
    double containment_threshold = 0.80;
    uint64_t expected_items = 1'000'000;
    double target_fpr = 0.01;
    uint64_t seed = 0x5eedULL;
    size_t min_words_after = 10;  // OldBoth floor on the surviving text
};

struct DedupReport {
    uint64_t docs_in = 0;
    uint64_t docs_kept = 0;
    uint64_t bytes_in = 0;
    uint64_t bytes_kept = 0;
    uint64_t tokens_in = 0;    // whitespace-delimited words
    uint64_t tokens_kept = 0;
    uint64_t paragraphs_removed = 0;

    uint64_t docs_removed() const { return docs_in - docs_kept; }
    double removal_fraction() const {
        return docs_in ? double(docs_in - docs_kept) / double(docs_in) : 0.0;
    }
};

// Fraction of the unit's word n-grams already present in the filter
// (whole-unit hash when the unit is shorter than n words). Does not insert.
// When hashes_out is given, the unit's key hashes are appended to it.
double containment(std::string_view unit, const BloomFilter& filter, const DedupConfig& cfg,
                   std::vector<uint64_t>* hashes_out = nullptr);

// Sequential dedup pass. The filter is owned here and mutated per document;
// process one stream at a time, in order.
class Deduper {
public:
    explicit Deduper(const DedupConfig& cfg);
    Deduper(const DedupConfig& cfg, BloomFilter filter);

    // Returns the surviving document (possibly with paragraphs removed in
    // OldBoth mode) or nullopt when the document is dropped.
    std::optional<Document> process(const Document& doc);

    const DedupReport& report() const { return report_; }
    void reset_report() { report_ = DedupReport{}; }

    const BloomFilter& filter() const { return filter_; }
    BloomFilter& filter() { return filter_; }

private:
    std::optional<std::string> process_document_mode(const std::string& text);
    std::optional<std::string> process_old_both_mode(const std::string& text);

    DedupConfig cfg_;
    BloomFilter filter_;
    DedupReport report_;
    std::vector<uint64_t> scratch_hashes_;
};

std::pair<std::vector<Document>, DedupReport> dedup_stream(const std::vector<Document>& docs,
                                                           const DedupConfig& cfg);

// Sequential cross-corpus pass sharing one filter; earlier corpora win ties.
struct CorpusDedupResult {
    std::string name;
    std::vector<Document> kept;
    DedupReport report;
};

std::vector<CorpusDedupResult> cross_dedup(
    const std::vector<std::pair<std::string, std::vector<Document>>>& corpora,
    const DedupConfig& cfg);

}  // namespace curator
