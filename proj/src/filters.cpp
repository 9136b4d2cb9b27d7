#include "curator/filters.hpp"

#include <algorithm>
#include <array>

#include "curator/hash.hpp"
#include "curator/unicode.hpp"

namespace curator {

namespace {

// Codepoints in a word span; continuation bytes do not start a character.
size_t word_char_count(std::string_view text, const WordSpan& w) {
    size_t count = 0;
    for (size_t i = w.begin; i < w.end; ++i)
        if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) ++count;
    return count;
}

bool word_has_letter(std::string_view text, const WordSpan& w) {
    size_t i = w.begin;
    while (i < w.end) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return true;
            ++i;
            continue;
        }
        auto dc = utf8_decode(text, i);
        if (!dc) {
            ++i;
            continue;
        }
        if (is_letter(dc->cp)) return true;
        i += dc->len;
    }
    return false;
}

// Emits every newline-separated line; a trailing empty segment after a
// final newline is not a line. Matches TextStats::line_count.
template <typename Fn>
size_t for_each_line(std::string_view text, Fn&& fn) {
    size_t count = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) {
                fn(text.substr(start));
                ++count;
            }
            break;
        }
        fn(text.substr(start, nl - start));
        ++count;
        start = nl + 1;
    }
    return count;
}

std::string_view rstrip(std::string_view s) {
    while (!s.empty() && is_word_separator(s.back())) s.remove_suffix(1);
    return s;
}

std::string_view lstrip(std::string_view s) {
    while (!s.empty() && is_word_separator(s.front())) s.remove_prefix(1);
    return s;
}

// Flat open-addressing counter keyed by 64-bit hashes, reused across
// documents via generation stamping so no per-call clearing is needed.
class PairCounter {
public:
    void reset(size_t expected) {
        size_t want = 16;
        while (want < expected * 2) want <<= 1;
        if (want > slots_.size()) slots_.assign(want, Slot{});
        mask_ = slots_.size() - 1;
        if (++generation_ == 0) {
            std::fill(slots_.begin(), slots_.end(), Slot{});
            generation_ = 1;
        }
    }

    uint32_t& count_for(uint64_t key) {
        size_t idx = key & mask_;
        while (true) {
            Slot& s = slots_[idx];
            if (s.gen != generation_) {
                s.gen = generation_;
                s.key = key;
                s.count = 0;
                return s.count;
            }
            if (s.key == key) return s.count;
            idx = (idx + 1) & mask_;
        }
    }

private:
    struct Slot {
        uint64_t key = 0;
        uint32_t gen = 0;
        uint32_t count = 0;
    };
    std::vector<Slot> slots_;
    size_t mask_ = 0;
    uint32_t generation_ = 0;
};

struct RepetitionScratch {
    std::vector<uint64_t> word_hashes;
    std::vector<uint64_t> gram_hashes;
    std::vector<uint32_t> word_chars;
    std::vector<int32_t> cover_diff;
    PairCounter counter;
};

// Duplicated-n-gram score for one n. N-gram identity goes through a
// polynomial combination of per-word hashes, computed with a rolling
// window, so the whole pass is linear in the word count.
double repetition_score_n(std::string_view text, const TextStats& st, size_t n,
                          FilterConfig::RepetitionMetric metric, RepetitionScratch& scratch) {
    if (n == 0 || st.word_count < n) return 0.0;
    const size_t words = st.word_count;
    const size_t positions = words - n + 1;
    constexpr uint64_t kPoly = 0x100000001b3ULL;

    if (scratch.word_hashes.size() != words) {
        // per-word hashes are shared across the n sweep
        scratch.word_hashes.resize(words);
        for (size_t i = 0; i < words; ++i) {
            const WordSpan& w = st.words[i];
            scratch.word_hashes[i] = hash64(text.substr(w.begin, w.size()));
        }
    }

    uint64_t top_power = 1;
    for (size_t j = 1; j < n; ++j) top_power *= kPoly;
    scratch.gram_hashes.resize(positions);
    uint64_t h = 0;
    for (size_t j = 0; j < n; ++j) h = h * kPoly + scratch.word_hashes[j];
    scratch.gram_hashes[0] = h;
    for (size_t i = 1; i < positions; ++i) {
        h = (h - scratch.word_hashes[i - 1] * top_power) * kPoly +
            scratch.word_hashes[i + n - 1];
        scratch.gram_hashes[i] = h;
    }

    scratch.counter.reset(positions);
    uint32_t max_count = 0;
    for (size_t i = 0; i < positions; ++i)
        max_count = std::max(max_count, ++scratch.counter.count_for(scratch.gram_hashes[i]));
    if (max_count < 2) return 0.0;

    if (metric == FilterConfig::RepetitionMetric::DuplicateNgramFraction) {
        size_t dup = 0;
        for (size_t i = 0; i < positions; ++i)
            if (scratch.counter.count_for(scratch.gram_hashes[i]) > 1) ++dup;
        return static_cast<double>(dup) / static_cast<double>(positions);
    }

    // Coverage via a difference array: words under any duplicated n-gram.
    if (scratch.word_chars.size() != words) {
        scratch.word_chars.resize(words);
        for (size_t i = 0; i < words; ++i)
            scratch.word_chars[i] = uint32_t(word_char_count(text, st.words[i]));
    }
    scratch.cover_diff.assign(words + 1, 0);
    for (size_t i = 0; i < positions; ++i) {
        if (scratch.counter.count_for(scratch.gram_hashes[i]) > 1) {
            ++scratch.cover_diff[i];
            --scratch.cover_diff[i + n];
        }
    }
    uint64_t covered_chars = 0;
    uint64_t total_chars = 0;
    int32_t depth = 0;
    for (size_t w = 0; w < words; ++w) {
        depth += scratch.cover_diff[w];
        total_chars += scratch.word_chars[w];
        if (depth > 0) covered_chars += scratch.word_chars[w];
    }
    if (total_chars == 0) return 0.0;
    return static_cast<double>(covered_chars) / static_cast<double>(total_chars);
}

}  // namespace

std::string_view rule_name(Rule rule) {
    switch (rule) {
        case Rule::WordCount: return "word_count";
        case Rule::NonAlphaWordRatio: return "non_alpha_word_ratio";
        case Rule::AlnumCharRatio: return "alnum_char_ratio";
        case Rule::SymbolRatio: return "symbol_ratio";
        case Rule::NgramRepetition: return "ngram_repetition";
        case Rule::LineEllipsis: return "line_ellipsis";
        case Rule::BulletRatio: return "bullet_ratio";
    }
    return "unknown";
}

std::optional<Rule> rule_from_name(std::string_view name) {
    for (Rule r : default_rule_order())
        if (rule_name(r) == name) return r;
    return std::nullopt;
}

FilterDecision word_count_filter(std::string_view, const TextStats& st,
                                 const FilterConfig& cfg) {
    const size_t wc = st.word_count;
    if (wc < cfg.min_words)
        return {Rule::WordCount, false, double(wc), double(cfg.min_words)};
    if (wc > cfg.max_words)
        return {Rule::WordCount, false, double(wc), double(cfg.max_words)};
    return {Rule::WordCount, true, double(wc), double(cfg.max_words)};
}

FilterDecision non_alpha_word_ratio_filter(std::string_view text, const TextStats& st,
                                           const FilterConfig& cfg) {
    if (st.word_count == 0)
        return {Rule::NonAlphaWordRatio, true, 0.0, cfg.non_alpha_word_ratio_max};
    size_t non_alpha = 0;
    for (const auto& w : st.words)
        if (!word_has_letter(text, w)) ++non_alpha;
    double ratio = static_cast<double>(non_alpha) / static_cast<double>(st.word_count);
    return {Rule::NonAlphaWordRatio, ratio <= cfg.non_alpha_word_ratio_max, ratio,
            cfg.non_alpha_word_ratio_max};
}

FilterDecision alnum_char_ratio_filter(std::string_view text, const TextStats& st,
                                       const FilterConfig& cfg) {
    if (st.char_count == 0)
        return {Rule::AlnumCharRatio, true, 1.0, cfg.alnum_char_ratio_min};
    static constexpr auto kAsciiAlnum = [] {
        std::array<uint8_t, 128> table{};
        for (int c = '0'; c <= '9'; ++c) table[size_t(c)] = 1;
        for (int c = 'A'; c <= 'Z'; ++c) table[size_t(c)] = 1;
        for (int c = 'a'; c <= 'z'; ++c) table[size_t(c)] = 1;
        return table;
    }();
    size_t alnum = 0;
    size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (c < 0x80) {
            alnum += kAsciiAlnum[c];
            ++i;
            continue;
        }
        auto dc = utf8_decode(text, i);
        if (!dc) {
            ++i;
            continue;
        }
        if (is_letter(dc->cp) || is_digit(dc->cp)) ++alnum;
        i += dc->len;
    }
    double ratio = static_cast<double>(alnum) / static_cast<double>(st.char_count);
    return {Rule::AlnumCharRatio, ratio >= cfg.alnum_char_ratio_min, ratio,
            cfg.alnum_char_ratio_min};
}

FilterDecision symbol_ratio_filter(std::string_view text, const TextStats& st,
                                   const FilterConfig& cfg) {
    if (st.word_count == 0)
        return {Rule::SymbolRatio, true, 0.0, cfg.symbol_ratio_max};

    // Longest listed string wins at each position; matches never overlap.
    // Candidates are bucketed by first byte so the scan skips everything else.
    std::vector<std::string_view> symbols(cfg.symbol_list.begin(), cfg.symbol_list.end());
    std::stable_sort(symbols.begin(), symbols.end(),
                     [](auto a, auto b) { return a.size() > b.size(); });
    bool lead_byte[256] = {};
    for (auto sym : symbols)
        if (!sym.empty()) lead_byte[uint8_t(sym[0])] = true;

    size_t occurrences = 0;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        if (!lead_byte[uint8_t(text[i])]) {
            ++i;
            continue;
        }
        bool matched = false;
        for (auto sym : symbols) {
            if (!sym.empty() && text.compare(i, sym.size(), sym) == 0) {
                ++occurrences;
                i += sym.size();
                matched = true;
                break;
            }
        }
        if (!matched) ++i;
    }
    double ratio = static_cast<double>(occurrences) / static_cast<double>(st.word_count);
    return {Rule::SymbolRatio, ratio <= cfg.symbol_ratio_max, ratio, cfg.symbol_ratio_max};
}

FilterDecision ngram_repetition_filter(std::string_view text, const TextStats& st,
                                       const FilterConfig& cfg) {
    thread_local RepetitionScratch scratch;
    scratch.word_hashes.clear();  // invalidates the per-document caches
    scratch.word_chars.clear();
    double worst = 0.0;
    if (cfg.repetition_metric == FilterConfig::RepetitionMetric::DuplicateCharFraction &&
        cfg.ngram_min >= 1) {
        // Coverage by duplicated n-grams is nested downward in n: a
        // duplicated n-gram's sub-(n-1)-grams are duplicated and cover the
        // same words. The max over the range is therefore attained at the
        // smallest n and the longer sweeps are redundant.
        worst = repetition_score_n(text, st, cfg.ngram_min, cfg.repetition_metric, scratch);
    } else {
        for (size_t n = cfg.ngram_min; n <= cfg.ngram_max; ++n)
            worst = std::max(
                worst, repetition_score_n(text, st, n, cfg.repetition_metric, scratch));
    }
    return {Rule::NgramRepetition, worst <= cfg.ngram_repetition_max, worst,
            cfg.ngram_repetition_max};
}

FilterDecision line_ellipsis_filter(std::string_view text, const TextStats& st,
                                    const FilterConfig& cfg) {
    size_t ellipsis_lines = 0;
    size_t lines = for_each_line(text, [&](std::string_view line) {
        line = rstrip(line);
        for (const auto& marker : cfg.ellipsis_markers) {
            if (line.size() >= marker.size() &&
                line.compare(line.size() - marker.size(), marker.size(), marker) == 0) {
                ++ellipsis_lines;
                return;
            }
        }
    });
    (void)st;
    if (lines == 0) return {Rule::LineEllipsis, true, 0.0, cfg.ellipsis_line_ratio_max};
    double ratio = static_cast<double>(ellipsis_lines) / static_cast<double>(lines);
    return {Rule::LineEllipsis, ratio <= cfg.ellipsis_line_ratio_max, ratio,
            cfg.ellipsis_line_ratio_max};
}

FilterDecision bullet_ratio_filter(std::string_view text, const TextStats& st,
                                   const FilterConfig& cfg) {
    size_t bullet_lines = 0;
    size_t lines = for_each_line(text, [&](std::string_view line) {
        line = lstrip(line);
        for (const auto& bullet : cfg.bullets) {
            if (!bullet.empty() && line.compare(0, bullet.size(), bullet) == 0) {
                ++bullet_lines;
                return;
            }
        }
    });
    (void)st;
    if (lines == 0) return {Rule::BulletRatio, true, 0.0, cfg.bullet_line_ratio_max};
    double ratio = static_cast<double>(bullet_lines) / static_cast<double>(lines);
    return {Rule::BulletRatio, ratio <= cfg.bullet_line_ratio_max, ratio,
            cfg.bullet_line_ratio_max};
}

FilterDecision apply_rule(Rule rule, std::string_view text, const TextStats& st,
                          const FilterConfig& cfg) {
    switch (rule) {
        case Rule::WordCount: return word_count_filter(text, st, cfg);
        case Rule::NonAlphaWordRatio: return non_alpha_word_ratio_filter(text, st, cfg);
        case Rule::AlnumCharRatio: return alnum_char_ratio_filter(text, st, cfg);
        case Rule::SymbolRatio: return symbol_ratio_filter(text, st, cfg);
        case Rule::NgramRepetition: return ngram_repetition_filter(text, st, cfg);
        case Rule::LineEllipsis: return line_ellipsis_filter(text, st, cfg);
        case Rule::BulletRatio: return bullet_ratio_filter(text, st, cfg);
    }
    return {rule, true, 0.0, 0.0};
}

std::vector<Rule> default_rule_order() {
    return {Rule::WordCount,       Rule::NonAlphaWordRatio, Rule::AlnumCharRatio,
            Rule::SymbolRatio,     Rule::NgramRepetition,   Rule::LineEllipsis,
            Rule::BulletRatio};
}

void PipelineReport::merge(const PipelineReport& other) {
    docs_in += other.docs_in;
    docs_kept += other.docs_kept;
    bytes_in += other.bytes_in;
    bytes_kept += other.bytes_kept;
    for (const auto& [rule, count] : other.rejected_by_rule) rejected_by_rule[rule] += count;
}

FilterPipeline::FilterPipeline(FilterConfig cfg, std::vector<Rule> order)
    : cfg_(std::move(cfg)), order_(std::move(order)) {}

std::optional<FilterDecision> FilterPipeline::evaluate(std::string_view text) const {
    return evaluate(text, stats(text));
}

std::optional<FilterDecision> FilterPipeline::evaluate(std::string_view text,
                                                       const TextStats& st) const {
    for (Rule rule : order_) {
        FilterDecision d = apply_rule(rule, text, st, cfg_);
        if (!d.kept) return d;
    }
    return std::nullopt;
}

std::pair<std::vector<Document>, PipelineReport> run_pipeline(
    const std::vector<Document>& docs, const FilterPipeline& pipeline) {
    std::vector<Document> kept;
    PipelineReport report;
    for (const auto& doc : docs) {
        ++report.docs_in;
        report.bytes_in += doc.text.size();
        auto rejection = pipeline.evaluate(doc.text);
        if (rejection) {
            ++report.rejected_by_rule[std::string(rule_name(rejection->rule))];
        } else {
            ++report.docs_kept;
            report.bytes_kept += doc.text.size();
            kept.push_back(doc);
        }
    }
    return {std::move(kept), report};
}

}  // namespace curator
