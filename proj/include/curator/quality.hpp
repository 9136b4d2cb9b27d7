#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "curator/classifier.hpp"
#include "curator/document.hpp"

namespace curator {

// Exactly one of the two fields must be set: keep documents scoring at
// least min_score, or keep the top-scoring keep_fraction of the stream.
struct QualityPolicy {
    std::optional<double> min_score;
    std::optional<double> keep_fraction;
};

struct QualityReport {
    uint64_t docs_in = 0;
    uint64_t docs_kept = 0;
    std::array<uint64_t, 20> score_histogram = {};  // [0,1) in 0.05 bins, 1.0 in last

    void add_score(double score);
};

// Kept documents preserve input order; with keep_fraction exactly
// ceil(f * N) documents survive and ties break by input position.
std::pair<std::vector<Document>, QualityReport> quality_filter(
    const std::vector<Document>& docs, const LinearTextClassifier& model,
    const QualityPolicy& policy);

struct AnnotatedDoc {
    Document doc;
    int score = 0;  // 0..5
};

class AnnotationError : public std::runtime_error {
public:
    AnnotationError(const std::string& id, const std::string& what)
        : std::runtime_error("annotation record '" + id + "': " + what), id_(id) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

// Reads {id, text, score} records; scores are validated to integers 0..5.
std::vector<AnnotatedDoc> annotation_ingest(const std::string& path);

// Splits annotated records into classifier training classes: positives are
// records scoring >= pos_min_score, negatives those scoring <= neg_max_score.
std::pair<std::vector<std::string>, std::vector<std::string>> split_by_score(
    const std::vector<AnnotatedDoc>& records, int pos_min_score = 3, int neg_max_score = 0);

struct LangGateConfig {
    std::string target_lang = "ko";
    double threshold = 0.8;
    std::string scores_field;  // empty = "p_<target_lang>"
    bool hangul_fallback = true;

    std::string field_name() const {
        return scores_field.empty() ? "p_" + target_lang : scores_field;
    }
};

struct LangGateReport {
    uint64_t docs_in = 0;
    uint64_t docs_kept = 0;
};

// Fraction of Hangul codepoints among letter codepoints; the built-in
// stand-in for an external Korean language-id probability.
double hangul_letter_fraction(std::string_view text);

// Keep iff P(target_lang) >= threshold. The probability comes from doc.meta
// (field_name); without it the Hangul fallback applies when target_lang is
// "ko" and the fallback is enabled, otherwise the record errors.
std::pair<std::vector<Document>, LangGateReport> lang_gate(const std::vector<Document>& docs,
                                                           const LangGateConfig& cfg);

bool lang_gate_keep(const Document& doc, const LangGateConfig& cfg);

}  // namespace curator
