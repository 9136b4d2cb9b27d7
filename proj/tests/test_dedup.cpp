#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <unordered_set>

#include "curator/dedup.hpp"
#include "test_util.hpp"

using namespace curator;

namespace {

DedupConfig small_cfg(DedupMode mode) {
    DedupConfig cfg;
    cfg.mode = mode;
    cfg.expected_items = 100000;
    cfg.seed = 99;
    return cfg;
}

Document doc(std::string id, std::string text) { return {std::move(id), std::move(text), "", {}}; }

}  // namespace

TEST_CASE("bloom sizing follows the closed-form optimum") {
    // m = ceil(-1000 ln(0.01) / ln(2)^2) = 9586, k = ceil(m/n ln 2) = 7
    BloomFilter f(1000, 0.01, 1);
    CHECK(f.bit_count() == 9586);
    CHECK(f.hash_count() == 7);

    const double ln2 = std::log(2.0);
    CHECK(f.bit_count() == uint64_t(std::ceil(-1000.0 * std::log(0.01) / (ln2 * ln2))));
    CHECK(f.hash_count() ==
          uint32_t(std::ceil(double(f.bit_count()) / 1000.0 * ln2)));
}

TEST_CASE("fresh filter answers false; inserted keys are always found") {
    BloomFilter f(1000, 0.01, 42);
    CHECK(!f.contains("anything"));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        std::string unit = testutil::random_sentence(rng, 15);
        f.insert(unit);
        CHECK(f.contains(unit));
    }
    CHECK(f.inserted() == 500);
}

TEST_CASE("bloom filter state round-trips through its binary file") {
    std::string path =
        (std::filesystem::temp_directory_path() / "curator_bloom.bin").string();
    BloomFilter f(5000, 0.01, 77);
    std::mt19937_64 rng(6);
    std::vector<std::string> units;
    for (int i = 0; i < 200; ++i) units.push_back(testutil::random_sentence(rng, 20));
    for (const auto& u : units) f.insert(u);
    f.save(path);

    BloomFilter g = BloomFilter::load(path);
    CHECK(g.bit_count() == f.bit_count());
    CHECK(g.hash_count() == f.hash_count());
    CHECK(g.seed() == f.seed());
    CHECK(g.inserted() == f.inserted());
    for (const auto& u : units) CHECK(g.contains(u));
}

TEST_CASE("invalid bloom parameters are rejected") {
    CHECK_THROWS_AS(BloomFilter(0, 0.01, 1), std::invalid_argument);
    CHECK_THROWS_AS(BloomFilter(100, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(BloomFilter(100, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(BloomFilter(uint64_t(1) << 62, 0.01, 1), std::length_error);
}

TEST_CASE("containment is 0 on an empty filter and 1 on a replayed unit") {
    DedupConfig cfg = small_cfg(DedupMode::Document);
    BloomFilter f(cfg.expected_items, cfg.target_fpr, cfg.seed);
    std::mt19937_64 rng(8);
    std::string unit = testutil::random_sentence(rng, 30);
    CHECK(containment(unit, f, cfg) == 0.0);

    std::vector<uint64_t> hashes;
    containment(unit, f, cfg, &hashes);
    for (uint64_t h : hashes) f.insert_key(h);
    CHECK(containment(unit, f, cfg) == 1.0);
}

TEST_CASE("containment of a half-shared unit matches the exact-set oracle") {
    DedupConfig cfg = small_cfg(DedupMode::Document);
    BloomFilter f(cfg.expected_items, cfg.target_fpr, cfg.seed);

    std::mt19937_64 rng(9);
    std::vector<std::string> words;
    for (int i = 0; i < 20; ++i) words.push_back("w" + std::to_string(i));
    std::string prior = testutil::join_words(words);
    std::vector<uint64_t> hashes;
    containment(prior, f, cfg, &hashes);
    for (uint64_t h : hashes) f.insert_key(h);

    // new unit: first 16 words shared, last 4 novel
    std::vector<std::string> mixed(words.begin(), words.begin() + 16);
    for (int i = 0; i < 4; ++i) mixed.push_back("novel" + std::to_string(i));
    std::string unit = testutil::join_words(mixed);

    // oracle: exact set of 13-gram strings
    auto ngrams = [&](const std::vector<std::string>& ws) {
        std::set<std::string> out;
        for (size_t i = 0; i + 13 <= ws.size(); ++i)
            out.insert(testutil::join_words(
                std::vector<std::string>(ws.begin() + i, ws.begin() + i + 13)));
        return out;
    };
    auto prior_grams = ngrams(words);
    auto unit_grams_vec = [&] {
        std::vector<std::string> out;
        for (size_t i = 0; i + 13 <= mixed.size(); ++i)
            out.push_back(testutil::join_words(
                std::vector<std::string>(mixed.begin() + i, mixed.begin() + i + 13)));
        return out;
    }();
    size_t present = 0;
    for (const auto& g : unit_grams_vec)
        if (prior_grams.count(g)) ++present;
    double oracle = double(present) / double(unit_grams_vec.size());

    CHECK(containment(unit, f, cfg) == doctest::Approx(oracle).epsilon(0.02));
}

TEST_CASE("document mode drops an exact repeat and keeps distinct docs") {
    DedupConfig cfg = small_cfg(DedupMode::Document);
    std::mt19937_64 rng(10);
    std::string text = testutil::random_sentence(rng, 40);
    auto [kept, report] = dedup_stream({doc("a", text), doc("b", text)}, cfg);
    CHECK(kept.size() == 1);
    CHECK(kept[0].id == "a");
    CHECK(report.docs_in == 2);
    CHECK(report.docs_kept == 1);

    std::vector<Document> distinct;
    for (int i = 0; i < 100; ++i)
        distinct.push_back(doc("d" + std::to_string(i), testutil::random_sentence(rng, 30)));
    auto [kept2, report2] = dedup_stream(distinct, cfg);
    CHECK(kept2.size() == 100);
    CHECK(report2.tokens_kept == report2.tokens_in);
}

TEST_CASE("old-both removes a shared paragraph but keeps both documents") {
    DedupConfig cfg = small_cfg(DedupMode::OldBoth);
    std::mt19937_64 rng(12);
    std::string shared = testutil::random_sentence(rng, 20);
    std::string first_own = testutil::random_sentence(rng, 25);
    std::string second_own = testutil::random_sentence(rng, 25);

    auto [kept, report] = dedup_stream(
        {doc("a", first_own + "\n\n" + shared), doc("b", shared + "\n\n" + second_own)}, cfg);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].text == first_own + "\n\n" + shared);
    CHECK(kept[1].text == second_own);  // shared paragraph removed
    CHECK(report.paragraphs_removed == 1);
}

TEST_CASE("old-both drops a document whose paragraphs are mostly duplicated") {
    DedupConfig cfg = small_cfg(DedupMode::OldBoth);
    std::mt19937_64 rng(13);
    std::string p1 = testutil::random_sentence(rng, 20);
    std::string p2 = testutil::random_sentence(rng, 20);
    auto [kept, report] =
        dedup_stream({doc("a", p1 + "\n\n" + p2), doc("b", p1 + "\n\n" + p2)}, cfg);
    CHECK(kept.size() == 1);
    CHECK(kept[0].id == "a");
}

TEST_CASE("old-both never retains more tokens than document mode") {
    std::mt19937_64 rng(14);
    for (int iter = 0; iter < 10; ++iter) {
        // corpus with heavy paragraph-level duplication
        std::vector<std::string> paragraph_pool;
        for (int i = 0; i < 8; ++i)
            paragraph_pool.push_back(testutil::random_sentence(rng, 15 + i));
        std::vector<Document> docs;
        for (int i = 0; i < 40; ++i) {
            std::string text;
            size_t paras = 1 + testutil::draw(rng, 3);
            for (size_t j = 0; j < paras; ++j) {
                if (j) text += "\n\n";
                if (testutil::draw(rng, 2))
                    text += paragraph_pool[testutil::draw(rng, paragraph_pool.size())];
                else
                    text += testutil::random_sentence(rng, 18);
            }
            docs.push_back(doc("d" + std::to_string(i), text));
        }
        auto [kept_doc, rep_doc] = dedup_stream(docs, small_cfg(DedupMode::Document));
        auto [kept_ob, rep_ob] = dedup_stream(docs, small_cfg(DedupMode::OldBoth));
        CHECK(rep_ob.tokens_kept <= rep_doc.tokens_kept);
    }
}

TEST_CASE("whole-unit hashing at threshold 1.0 equals an exact hash-set oracle") {
    std::mt19937_64 rng(15);
    for (int corpus_i = 0; corpus_i < 25; ++corpus_i) {
        DedupConfig cfg = small_cfg(DedupMode::Document);
        cfg.ngram_words = 0;  // whole-unit hashing
        cfg.containment_threshold = 1.0;

        std::vector<std::string> pool;
        for (int i = 0; i < 12; ++i) pool.push_back(testutil::random_sentence(rng, 5));
        std::vector<Document> docs;
        size_t len = 1 + testutil::draw(rng, 60);
        for (size_t i = 0; i < len; ++i)
            docs.push_back(doc("d" + std::to_string(i), pool[testutil::draw(rng, pool.size())]));

        auto [kept, report] = dedup_stream(docs, cfg);

        std::unordered_set<std::string> seen;
        std::vector<std::string> oracle_ids;
        for (const auto& d : docs)
            if (seen.insert(d.text).second) oracle_ids.push_back(d.id);

        REQUIRE(kept.size() == oracle_ids.size());
        for (size_t i = 0; i < kept.size(); ++i) CHECK(kept[i].id == oracle_ids[i]);
    }
}

TEST_CASE("cross-dedup lets earlier corpora win ties") {
    std::mt19937_64 rng(16);
    std::string shared_text = testutil::random_sentence(rng, 30);
    std::vector<Document> corpus_a = {doc("a1", shared_text),
                                      doc("a2", testutil::random_sentence(rng, 30))};
    std::vector<Document> corpus_b = {doc("b1", shared_text),
                                      doc("b2", testutil::random_sentence(rng, 30))};

    auto results = cross_dedup({{"A", corpus_a}, {"B", corpus_b}},
                               small_cfg(DedupMode::Document));
    REQUIRE(results.size() == 2);
    CHECK(results[0].kept.size() == 2);
    CHECK(results[1].kept.size() == 1);
    CHECK(results[1].kept[0].id == "b2");

    // reversed priority keeps the copy in B instead
    auto reversed = cross_dedup({{"B", corpus_b}, {"A", corpus_a}},
                                small_cfg(DedupMode::Document));
    CHECK(reversed[0].kept.size() == 2);
    CHECK(reversed[1].kept.size() == 1);
    CHECK(reversed[1].kept[0].id == "a2");

    // disjoint corpora: nothing removed
    std::vector<Document> corpus_c = {doc("c1", testutil::random_sentence(rng, 30))};
    auto disjoint = cross_dedup({{"A", corpus_a}, {"C", corpus_c}},
                                small_cfg(DedupMode::Document));
    CHECK(disjoint[0].kept.size() == 2);
    CHECK(disjoint[1].kept.size() == 1);
}

TEST_CASE("short units fall back to whole-unit hashing") {
    DedupConfig cfg = small_cfg(DedupMode::Document);
    auto [kept, report] = dedup_stream(
        {doc("a", "short paragraph here"), doc("b", "short paragraph here"),
         doc("c", "different short text")},
        cfg);
    CHECK(kept.size() == 2);
    CHECK(kept[0].id == "a");
    CHECK(kept[1].id == "c");
}

TEST_CASE("measured false-positive rate stays near the target") {
    DedupConfig cfg = small_cfg(DedupMode::Document);
    BloomFilter f(20000, cfg.target_fpr, 3);
    std::mt19937_64 rng(17);
    for (int i = 0; i < 20000; ++i)
        f.insert("member-" + std::to_string(i) + testutil::random_word(rng));
    size_t false_hits = 0;
    const int probes = 20000;
    for (int i = 0; i < probes; ++i)
        if (f.contains("novel-" + std::to_string(i))) ++false_hits;
    CHECK(double(false_hits) / probes <= 2.0 * cfg.target_fpr);
}
