#include <doctest.h>

#include <map>
#include <unordered_map>

#include "curator/filters.hpp"
#include "test_util.hpp"

using namespace curator;

namespace {

const FilterConfig kCfg;

FilterDecision run(Rule rule, const std::string& text) {
    return apply_rule(rule, text, stats(text), kCfg);
}

std::string words_of(size_t n, const std::string& word = "word") {
    std::vector<std::string> ws(n, word);
    for (size_t i = 0; i < n; ++i) ws[i] += std::to_string(i);
    return testutil::join_words(ws);
}

// Independent repetition oracle: exhaustive n-gram table over word vectors,
// then the duplicated-n-gram character fraction.
double oracle_repetition(const std::string& text, size_t nmin, size_t nmax) {
    TextStats st = stats(text);
    std::vector<std::string> words;
    for (const auto& w : st.words) words.push_back(std::string(text.substr(w.begin, w.size())));

    double worst = 0.0;
    for (size_t n = nmin; n <= nmax; ++n) {
        if (words.size() < n) continue;
        std::map<std::vector<std::string>, size_t> table;
        for (size_t i = 0; i + n <= words.size(); ++i)
            ++table[std::vector<std::string>(words.begin() + i, words.begin() + i + n)];
        std::vector<char> covered(words.size(), 0);
        for (size_t i = 0; i + n <= words.size(); ++i) {
            std::vector<std::string> gram(words.begin() + i, words.begin() + i + n);
            if (table[gram] > 1)
                for (size_t j = i; j < i + n; ++j) covered[j] = 1;
        }
        size_t covered_chars = 0;
        size_t total_chars = 0;
        for (size_t j = 0; j < words.size(); ++j) {
            size_t chars = curator::utf8_length(words[j]);
            total_chars += chars;
            if (covered[j]) covered_chars += chars;
        }
        if (total_chars)
            worst = std::max(worst, double(covered_chars) / double(total_chars));
    }
    return worst;
}

}  // namespace

TEST_CASE("word count filter boundaries are strict") {
    CHECK(!run(Rule::WordCount, words_of(9)).kept);
    CHECK(run(Rule::WordCount, words_of(10)).kept);
    CHECK(run(Rule::WordCount, words_of(10000)).kept);
    CHECK(!run(Rule::WordCount, words_of(10001)).kept);
}

TEST_CASE("non-alphabetic word ratio rejects above 0.25") {
    auto d = run(Rule::NonAlphaWordRatio, "123 45 abc def");
    CHECK(d.measured == doctest::Approx(0.5));
    CHECK(!d.kept);

    CHECK(run(Rule::NonAlphaWordRatio, "all letter words here").kept);

    // exactly 0.25 is kept
    d = run(Rule::NonAlphaWordRatio, "12 a b c");
    CHECK(d.measured == doctest::Approx(0.25));
    CHECK(d.kept);

    // Hangul words count as alphabetic
    CHECK(run(Rule::NonAlphaWordRatio, "안녕 세계 hello world").measured == 0.0);
}

TEST_CASE("alphanumeric character ratio rejects below 0.25") {
    CHECK(!run(Rule::AlnumCharRatio, "!!!!! ???? ;;;;").kept);
    CHECK(run(Rule::AlnumCharRatio, "plain prose with many letters").kept);

    auto d = run(Rule::AlnumCharRatio, "a !?#");
    CHECK(d.measured == doctest::Approx(0.2));
    CHECK(!d.kept);

    // Hangul counts toward the ratio; whitespace stays in the denominator.
    CHECK(run(Rule::AlnumCharRatio, "안녕 세계").kept);
}

TEST_CASE("symbol ratio counts listed symbols per word") {
    auto d = run(Rule::SymbolRatio, "w1 # w2 w3 w4 w5 # w6 w7 w8");
    CHECK(d.measured == doctest::Approx(2.0 / 10.0));
    CHECK(!d.kept);

    CHECK(run(Rule::SymbolRatio, "no listed symbols here at all").kept);

    // 20 words, 2 ellipsis characters: exactly 0.1 is kept
    std::string text = words_of(18) + " … …";
    d = run(Rule::SymbolRatio, text);
    CHECK(d.measured == doctest::Approx(0.1));
    CHECK(d.kept);
}

TEST_CASE("symbol matching is longest-first and non-overlapping") {
    // ". . ." counts once (not as three words of dots); the trailing dots
    // contribute 3 words to the 20, giving 23 words total
    auto d = run(Rule::SymbolRatio, words_of(20) + " . . .");
    CHECK(d.measured == doctest::Approx(1.0 / 23.0));

    // "......" is one word counting as two non-overlapping "..." matches
    d = run(Rule::SymbolRatio, words_of(20) + " ......");
    CHECK(d.measured == doctest::Approx(2.0 / 21.0));
}

TEST_CASE("ngram repetition matches the spec examples") {
    CHECK(run(Rule::NgramRepetition, words_of(20)).kept);

    // an 8-word sentence repeated 10 times
    std::string sentence = "the quick brown fox jumps over lazy dogs";
    std::string repeated = sentence;
    for (int i = 0; i < 9; ++i) repeated += " " + sentence;
    auto d = run(Rule::NgramRepetition, repeated);
    CHECK(d.measured == doctest::Approx(oracle_repetition(repeated, 8, 10)));
    CHECK(d.measured > 0.99);
    CHECK(!d.kept);

    // one duplicated 8-gram inside 500 unique words
    std::string big = words_of(484);
    std::string gram = "g0 g1 g2 g3 g4 g5 g6 g7";
    big += " " + gram + " " + gram;
    d = run(Rule::NgramRepetition, big);
    double oracle = oracle_repetition(big, 8, 10);
    CHECK(d.measured == doctest::Approx(oracle));
    CHECK(oracle < 0.2);
    CHECK(d.kept);
}

TEST_CASE("ngram repetition equals the exhaustive oracle on random docs") {
    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 60; ++iter) {
        // small vocabulary forces repeats
        std::vector<std::string> vocab;
        for (int v = 0; v < 12; ++v) vocab.push_back("w" + std::to_string(v));
        std::vector<std::string> ws;
        size_t len = 10 + testutil::draw(rng, 60);
        for (size_t i = 0; i < len; ++i) ws.push_back(vocab[testutil::draw(rng, vocab.size())]);
        std::string text = testutil::join_words(ws);
        auto d = run(Rule::NgramRepetition, text);
        CHECK(d.measured == doctest::Approx(oracle_repetition(text, 8, 10)).epsilon(1e-12));
    }
}

TEST_CASE("line ellipsis ratio rejects above 0.3") {
    CHECK(!run(Rule::LineEllipsis, "one...\ntwo\nthree...\nfour").kept);
    CHECK(run(Rule::LineEllipsis, "one\ntwo\nthree").kept);

    std::string ten_lines;
    for (int i = 0; i < 10; ++i) {
        ten_lines += "line " + std::to_string(i);
        if (i < 3) ten_lines += "…";
        if (i < 9) ten_lines += "\n";
    }
    auto d = run(Rule::LineEllipsis, ten_lines);
    CHECK(d.measured == doctest::Approx(0.3));
    CHECK(d.kept);

    // trailing whitespace after the marker still counts
    CHECK(run(Rule::LineEllipsis, "a... \nb\nc").measured == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("bullet ratio rejects above 0.9") {
    std::string all_bullets;
    for (int i = 0; i < 10; ++i) all_bullets += "- item " + std::to_string(i) + "\n";
    auto d = run(Rule::BulletRatio, all_bullets);
    CHECK(d.measured == doctest::Approx(1.0));
    CHECK(!d.kept);

    CHECK(run(Rule::BulletRatio, "prose line\nanother line").kept);

    std::string nine_of_ten = "prose line\n";
    for (int i = 0; i < 9; ++i) nine_of_ten += "• item\n";
    d = run(Rule::BulletRatio, nine_of_ten);
    CHECK(d.measured == doctest::Approx(0.9));
    CHECK(d.kept);

    // indented bullets count by first non-whitespace character
    CHECK(run(Rule::BulletRatio, "  ● x\ny").measured == doctest::Approx(0.5));
}

TEST_CASE("pipeline short-circuits and reports per-rule rejections") {
    std::vector<Document> docs = {
        {"d1", words_of(20), "", {}},
        {"d2", "too short", "", {}},
        {"d3", words_of(30), "", {}},
    };
    FilterPipeline pipeline{kCfg};
    auto [kept, report] = run_pipeline(docs, pipeline);
    CHECK(kept.size() == 2);
    CHECK(kept[0].id == "d1");
    CHECK(kept[1].id == "d3");
    CHECK(report.docs_in == 3);
    CHECK(report.docs_kept == 2);
    CHECK(report.rejected_by_rule.at("word_count") == 1);

    // determinism: identical reruns produce identical reports
    auto [kept2, report2] = run_pipeline(docs, pipeline);
    CHECK(report2.docs_in == report.docs_in);
    CHECK(report2.rejected_by_rule == report.rejected_by_rule);
    CHECK(kept2 == kept);
}

TEST_CASE("empty rule order passes everything through") {
    FilterPipeline pipeline{kCfg, {}};
    std::vector<Document> docs = {{"d1", "x", "", {}}};
    auto [kept, report] = run_pipeline(docs, pipeline);
    CHECK(kept.size() == 1);
    CHECK(report.docs_kept == 1);
}

TEST_CASE("kept set is order-independent and equals the conjunction of rules") {
    std::mt19937_64 rng(43);
    std::vector<Rule> reversed = default_rule_order();
    std::reverse(reversed.begin(), reversed.end());
    FilterPipeline forward{kCfg};
    FilterPipeline backward{kCfg, reversed};

    for (int iter = 0; iter < 200; ++iter) {
        size_t len = testutil::draw(rng, 40);
        std::vector<std::string> ws;
        for (size_t i = 0; i < len; ++i) {
            switch (testutil::draw(rng, 4)) {
                case 0: ws.push_back("123"); break;
                case 1: ws.push_back("#"); break;
                case 2: ws.push_back("..."); break;
                default: ws.push_back(testutil::random_word(rng)); break;
            }
        }
        std::string text = testutil::join_words(ws);
        if (text.empty()) text = "x";

        TextStats st = stats(text);
        bool all_keep = true;
        for (Rule rule : default_rule_order()) {
            FilterDecision d = apply_rule(rule, text, st, kCfg);
            CHECK(d.measured >= 0.0);
            if (rule != Rule::WordCount) CHECK(d.measured <= 1.0);
            all_keep = all_keep && d.kept;
        }
        CHECK(!forward.evaluate(text).has_value() == all_keep);
        CHECK(!backward.evaluate(text).has_value() == all_keep);
    }
}

TEST_CASE("ratio rules are monotone in their thresholds") {
    const std::string text = "12 34 ab # ... cd\nef...\n- gh";
    TextStats st = stats(text);

    // max-type rules: threshold 1.0 keeps, threshold below measured rejects
    for (Rule rule : {Rule::NonAlphaWordRatio, Rule::SymbolRatio, Rule::NgramRepetition,
                      Rule::LineEllipsis, Rule::BulletRatio}) {
        FilterConfig open = kCfg;
        open.non_alpha_word_ratio_max = open.symbol_ratio_max = open.ngram_repetition_max =
            open.ellipsis_line_ratio_max = open.bullet_line_ratio_max = 1.0;
        CHECK(apply_rule(rule, text, st, open).kept);

        double measured = apply_rule(rule, text, st, kCfg).measured;
        if (measured > 0.0) {
            FilterConfig tight = kCfg;
            tight.non_alpha_word_ratio_max = tight.symbol_ratio_max =
                tight.ngram_repetition_max = tight.ellipsis_line_ratio_max =
                    tight.bullet_line_ratio_max = measured / 2.0;
            CHECK(!apply_rule(rule, text, st, tight).kept);
        }
    }

    // min-type rule: threshold 0 keeps all, threshold above measured rejects
    FilterConfig open = kCfg;
    open.alnum_char_ratio_min = 0.0;
    CHECK(alnum_char_ratio_filter(text, st, open).kept);
    double measured = alnum_char_ratio_filter(text, st, kCfg).measured;
    FilterConfig tight = kCfg;
    tight.alnum_char_ratio_min = std::min(1.0, measured * 1.5);
    CHECK(!alnum_char_ratio_filter(text, st, tight).kept);
}

TEST_CASE("alternative repetition metric is available behind the config switch") {
    FilterConfig cfg = kCfg;
    cfg.repetition_metric = FilterConfig::RepetitionMetric::DuplicateNgramFraction;
    std::string sentence = "a b c d e f g h";
    std::string text = sentence + " " + sentence;
    // all 8-grams of the doubled sentence: 9 positions, the duplicated one
    // appears at positions 0 and 8
    auto d = ngram_repetition_filter(text, stats(text), cfg);
    CHECK(d.measured == doctest::Approx(2.0 / 9.0));
}
