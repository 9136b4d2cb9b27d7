#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "curator/document.hpp"

namespace curator {

// Thresholds for the rule-based web-text filters. Defaults follow the
// curation recipe this pipeline implements; all ratios are fractions in [0,1].
struct FilterConfig {
    size_t min_words = 10;
    size_t max_words = 10000;
    double non_alpha_word_ratio_max = 0.25;
    double alnum_char_ratio_min = 0.25;
    double symbol_ratio_max = 0.1;
    std::vector<std::string> symbol_list = {"#", "...", ". . .", "…"};
    size_t ngram_min = 8;
    size_t ngram_max = 10;
    double ngram_repetition_max = 0.2;
    // Default metric: fraction of word characters covered by n-grams that
    // occur more than once. The alternative counts duplicated n-gram
    // positions over total n-gram positions.
    enum class RepetitionMetric { DuplicateCharFraction, DuplicateNgramFraction };
    RepetitionMetric repetition_metric = RepetitionMetric::DuplicateCharFraction;
    double ellipsis_line_ratio_max = 0.3;
    std::vector<std::string> ellipsis_markers = {"...", ". . .", "…"};
    double bullet_line_ratio_max = 0.9;
    std::vector<std::string> bullets = {"●", "•", "*", "-"};
};

enum class Rule {
    WordCount,
    NonAlphaWordRatio,
    AlnumCharRatio,
    SymbolRatio,
    NgramRepetition,
    LineEllipsis,
    BulletRatio,
};

std::string_view rule_name(Rule rule);
std::optional<Rule> rule_from_name(std::string_view name);

struct FilterDecision {
    Rule rule;
    bool kept;
    double measured;
    double threshold;
};

// Each rule is a pure function of (text, stats, config). Rules whose
// precondition does not hold (no words, no lines) keep the document;
// the word-count rule already rejects degenerate inputs.
FilterDecision word_count_filter(std::string_view text, const TextStats& st,
                                 const FilterConfig& cfg);
FilterDecision non_alpha_word_ratio_filter(std::string_view text, const TextStats& st,
                                           const FilterConfig& cfg);
FilterDecision alnum_char_ratio_filter(std::string_view text, const TextStats& st,
                                       const FilterConfig& cfg);
FilterDecision symbol_ratio_filter(std::string_view text, const TextStats& st,
                                   const FilterConfig& cfg);
FilterDecision ngram_repetition_filter(std::string_view text, const TextStats& st,
                                       const FilterConfig& cfg);
FilterDecision line_ellipsis_filter(std::string_view text, const TextStats& st,
                                    const FilterConfig& cfg);
FilterDecision bullet_ratio_filter(std::string_view text, const TextStats& st,
                                   const FilterConfig& cfg);

FilterDecision apply_rule(Rule rule, std::string_view text, const TextStats& st,
                          const FilterConfig& cfg);

std::vector<Rule> default_rule_order();

struct PipelineReport {
    uint64_t docs_in = 0;
    uint64_t docs_kept = 0;
    uint64_t bytes_in = 0;
    uint64_t bytes_kept = 0;
    std::map<std::string, uint64_t> rejected_by_rule;

    void merge(const PipelineReport& other);
};

// Applies rules in order with short-circuit on the first rejection.
class FilterPipeline {
public:
    explicit FilterPipeline(FilterConfig cfg, std::vector<Rule> order = default_rule_order());

    // Returns the rejecting decision, or nullopt when the document is kept.
    std::optional<FilterDecision> evaluate(std::string_view text) const;
    std::optional<FilterDecision> evaluate(std::string_view text, const TextStats& st) const;

    const FilterConfig& config() const { return cfg_; }
    const std::vector<Rule>& order() const { return order_; }

private:
    FilterConfig cfg_;
    std::vector<Rule> order_;
};

// Convenience batch form used by tests and small corpora.
std::pair<std::vector<Document>, PipelineReport> run_pipeline(
    const std::vector<Document>& docs, const FilterPipeline& pipeline);

}  // namespace curator
