#include "curator/dedup.hpp"

#include <string_view>

namespace curator {

namespace {

// Appends the key hash of every word n-gram of `unit` (whole unit when it
// has fewer than n words, or when n = 0).
void unit_hashes(std::string_view unit, const BloomFilter& filter, size_t ngram_words,
                 std::vector<uint64_t>& out) {
    if (ngram_words == 0) {
        out.push_back(filter.key(unit));
        return;
    }
    TextStats st = stats(unit);
    if (st.word_count < ngram_words) {
        out.push_back(filter.key(unit));
        return;
    }
    const size_t positions = st.word_count - ngram_words + 1;
    for (size_t i = 0; i < positions; ++i) {
        size_t begin = st.words[i].begin;
        size_t end = st.words[i + ngram_words - 1].end;
        out.push_back(filter.key(unit.substr(begin, end - begin)));
    }
}

std::vector<std::string_view> split_paragraphs(std::string_view text) {
    std::vector<std::string_view> paragraphs;
    size_t start = 0;
    while (start <= text.size()) {
        size_t sep = text.find("\n\n", start);
        if (sep == std::string_view::npos) {
            paragraphs.push_back(text.substr(start));
            break;
        }
        paragraphs.push_back(text.substr(start, sep - start));
        start = sep + 2;
    }
    return paragraphs;
}

}  // namespace

std::string_view dedup_mode_name(DedupMode mode) {
    return mode == DedupMode::Document ? "document" : "old-both";
}

std::optional<DedupMode> dedup_mode_from_name(std::string_view name) {
    if (name == "document") return DedupMode::Document;
    if (name == "old-both" || name == "old_both") return DedupMode::OldBoth;
    return std::nullopt;
}

double containment(std::string_view unit, const BloomFilter& filter, const DedupConfig& cfg,
                   std::vector<uint64_t>* hashes_out) {
    std::vector<uint64_t> local;
    std::vector<uint64_t>& hashes = hashes_out ? *hashes_out : local;
    size_t before = hashes.size();
    unit_hashes(unit, filter, cfg.ngram_words, hashes);
    size_t total = hashes.size() - before;
    if (total == 0) return 0.0;
    size_t present = 0;
    for (size_t i = before; i < hashes.size(); ++i)
        if (filter.contains_key(hashes[i])) ++present;
    return double(present) / double(total);
}

Deduper::Deduper(const DedupConfig& cfg)
    : cfg_(cfg), filter_(cfg.expected_items, cfg.target_fpr, cfg.seed) {}

Deduper::Deduper(const DedupConfig& cfg, BloomFilter filter)
    : cfg_(cfg), filter_(std::move(filter)) {}

std::optional<std::string> Deduper::process_document_mode(const std::string& text) {
    scratch_hashes_.clear();
    double c = containment(text, filter_, cfg_, &scratch_hashes_);
    if (c >= cfg_.containment_threshold) return std::nullopt;
    for (uint64_t h : scratch_hashes_) filter_.insert_key(h);
    return text;
}

std::optional<std::string> Deduper::process_old_both_mode(const std::string& text) {
    auto paragraphs = split_paragraphs(text);

    std::string rebuilt;
    rebuilt.reserve(text.size());
    size_t paragraph_bytes = 0;
    size_t dropped_bytes = 0;
    bool first = true;
    for (auto para : paragraphs) {
        paragraph_bytes += para.size();
        bool keep = true;
        if (!para.empty()) {
            scratch_hashes_.clear();
            double c = containment(para, filter_, cfg_, &scratch_hashes_);
            if (c >= cfg_.containment_threshold) {
                keep = false;
                dropped_bytes += para.size();
                ++report_.paragraphs_removed;
            } else {
                for (uint64_t h : scratch_hashes_) filter_.insert_key(h);
            }
        }
        if (keep) {
            if (!first) rebuilt += "\n\n";
            rebuilt.append(para.data(), para.size());
            first = false;
        }
    }

    if (paragraph_bytes > 0 &&
        double(dropped_bytes) / double(paragraph_bytes) >= cfg_.containment_threshold)
        return std::nullopt;
    if (dropped_bytes > 0 && stats(rebuilt).word_count < cfg_.min_words_after)
        return std::nullopt;
    return rebuilt;
}

std::optional<Document> Deduper::process(const Document& doc) {
    ++report_.docs_in;
    report_.bytes_in += doc.text.size();
    const size_t words_in = stats(doc.text).word_count;
    report_.tokens_in += words_in;

    std::optional<std::string> survived = cfg_.mode == DedupMode::Document
                                              ? process_document_mode(doc.text)
                                              : process_old_both_mode(doc.text);
    if (!survived) return std::nullopt;

    ++report_.docs_kept;
    report_.bytes_kept += survived->size();
    report_.tokens_kept +=
        *survived == doc.text ? words_in : stats(*survived).word_count;

    Document out = doc;
    out.text = std::move(*survived);
    return out;
}

std::pair<std::vector<Document>, DedupReport> dedup_stream(const std::vector<Document>& docs,
                                                           const DedupConfig& cfg) {
    Deduper deduper(cfg);
    std::vector<Document> kept;
    for (const auto& doc : docs) {
        auto out = deduper.process(doc);
        if (out) kept.push_back(std::move(*out));
    }
    return {std::move(kept), deduper.report()};
}

std::vector<CorpusDedupResult> cross_dedup(
    const std::vector<std::pair<std::string, std::vector<Document>>>& corpora,
    const DedupConfig& cfg) {
    Deduper deduper(cfg);
    std::vector<CorpusDedupResult> results;
    for (const auto& [name, docs] : corpora) {
        deduper.reset_report();
        CorpusDedupResult result;
        result.name = name;
        for (const auto& doc : docs) {
            auto out = deduper.process(doc);
            if (out) result.kept.push_back(std::move(*out));
        }
        result.report = deduper.report();
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace curator
