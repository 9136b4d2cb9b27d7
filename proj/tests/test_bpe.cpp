#include <doctest.h>

#include <filesystem>

#include "curator/bpe.hpp"
#include "test_util.hpp"

using namespace curator;

namespace {

BpeModel train_on(const std::vector<std::string>& corpus, size_t vocab,
                  bool pre_split = false, std::vector<std::string> specials = {}) {
    BpeTrainOptions opts;
    opts.target_vocab = vocab;
    opts.pre_split = pre_split;
    opts.special_tokens = std::move(specials);
    return bpe_train(corpus, opts);
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("'aaaa' learns the single (a,a) merge and encodes to two tokens") {
    auto model = train_on({"aaaa"}, 257);
    REQUIRE(model.merges().size() == 1);
    CHECK(model.merges()[0] == BpeMerge{uint32_t('a'), uint32_t('a')});

    auto ids = model.encode("aaaa");
    CHECK(ids.size() == 2);
    CHECK(model.decode(ids) == "aaaa");

    // the (aa,aa) pair occurs once, so a larger target learns nothing more
    auto bigger = train_on({"aaaa"}, 300);
    CHECK(bigger.merges().size() == 1);
}

TEST_CASE("target 256 yields the pure byte tokenizer") {
    auto model = train_on({"any text at all"}, 256);
    CHECK(model.merges().empty());
    CHECK(model.vocab_size() == 256);
    std::string text = "hello";
    CHECK(model.encode(text).size() == text.size());
}

TEST_CASE("'abababab' learns merges in frequency order") {
    auto model = train_on({"abababab"}, 258);
    REQUIRE(model.merges().size() == 2);
    CHECK(model.merges()[0] == BpeMerge{uint32_t('a'), uint32_t('b')});
    CHECK(model.merges()[1] == BpeMerge{256, 256});
    CHECK(model.encode("abababab").size() == 2);
}

TEST_CASE("equal-frequency ties break toward the lowest pair") {
    // (c,d) and (a,b) both occur twice; (a,b) is lexicographically lower
    auto model = train_on({"cd", "ab", "cd", "ab"}, 258);
    REQUIRE(model.merges().size() == 2);
    CHECK(model.merges()[0] == BpeMerge{uint32_t('a'), uint32_t('b')});
    CHECK(model.merges()[1] == BpeMerge{uint32_t('c'), uint32_t('d')});
}

TEST_CASE("round trip is exact for random UTF-8 and raw bytes") {
    std::mt19937_64 rng(55);
    std::vector<std::string> corpus;
    for (int i = 0; i < 50; ++i) corpus.push_back(testutil::random_utf8(rng, 80));
    auto model = train_on(corpus, 500);

    for (int i = 0; i < 1000; ++i) {
        std::string text = testutil::random_utf8(rng, testutil::draw(rng, 50));
        CHECK(model.decode(model.encode(text)) == text);
    }
    for (int i = 0; i < 1000; ++i) {
        std::string bytes = testutil::random_bytes(rng, testutil::draw(rng, 60));
        CHECK(model.decode(model.encode(bytes)) == bytes);
    }
}

TEST_CASE("extending the merge list never increases token counts") {
    std::mt19937_64 rng(56);
    std::vector<std::string> corpus;
    for (int i = 0; i < 80; ++i) corpus.push_back(testutil::random_sentence(rng, 30));
    auto full = train_on(corpus, 600);

    for (size_t cut : {size_t(0), size_t(10), size_t(100), full.merges().size()}) {
        auto truncated = full.truncated(std::min(cut, full.merges().size()));
        for (int i = 0; i < 50; ++i) {
            std::string text = i % 2 ? testutil::random_sentence(rng, 20)
                                     : testutil::random_utf8(rng, 40);
            CHECK(full.encode(text).size() <= truncated.encode(text).size());
            CHECK(truncated.decode(truncated.encode(text)) == text);
        }
    }
}

TEST_CASE("decode rejects unknown ids") {
    auto model = train_on({"abcabc"}, 257);
    std::vector<uint32_t> bad = {model.vocab_size()};
    CHECK_THROWS_AS(model.decode(bad), UnknownTokenError);
}

TEST_CASE("special tokens sit at the top of the id space") {
    auto model = train_on({"abcabcabc"}, 260, false, {"<pad>", "<eos>"});
    CHECK(model.vocab_size() == 260);
    CHECK(model.merges().size() == 2);  // 260 - 256 - 2 specials
    CHECK(*model.special_id("<pad>") == 258);
    CHECK(*model.special_id("<eos>") == 259);
    CHECK(model.pad_id_or_throw() == 258);
    CHECK(!model.special_id("<missing>"));
    CHECK(model.token_string(258) == "<pad>");

    auto plain = train_on({"abcabcabc"}, 260);
    CHECK_THROWS_AS(plain.pad_id_or_throw(), std::runtime_error);
}

TEST_CASE("model file round trip preserves merges, specials, and flags") {
    std::mt19937_64 rng(57);
    std::vector<std::string> corpus;
    for (int i = 0; i < 40; ++i) corpus.push_back(testutil::random_sentence(rng, 25));
    auto model = train_on(corpus, 400, true, {"<pad>", "<think>", "</think>"});

    std::string path = temp_path("curator_bpe_model.txt");
    model.save(path);
    auto loaded = BpeModel::load(path);
    CHECK(loaded.merges() == model.merges());
    CHECK(loaded.special_tokens() == model.special_tokens());
    CHECK(loaded.pre_split() == model.pre_split());
    std::string text = testutil::random_sentence(rng, 15);
    CHECK(loaded.encode(text) == model.encode(text));
}

TEST_CASE("pre-split merges never mix whitespace and non-whitespace") {
    std::mt19937_64 rng(58);
    std::vector<std::string> corpus;
    for (int i = 0; i < 60; ++i) corpus.push_back(testutil::random_sentence(rng, 20));
    auto model = train_on(corpus, 500, true);
    CHECK(model.merges().size() > 0);
    for (uint32_t id = 256; id < 256 + model.merges().size(); ++id) {
        const std::string& tok = model.token_string(id);
        bool has_space = tok.find_first_of(" \t\n\r\v\f") != std::string::npos;
        bool has_other = tok.find_first_not_of(" \t\n\r\v\f") != std::string::npos;
        CHECK(!(has_space && has_other));
    }
    std::string text = testutil::random_sentence(rng, 30);
    CHECK(model.decode(model.encode(text)) == text);
}

TEST_CASE("training validates its inputs") {
    CHECK_THROWS_AS(train_on({}, 300), std::invalid_argument);
    CHECK_THROWS_AS(train_on({"abc"}, 255), std::invalid_argument);
    CHECK_THROWS_AS(train_on({"abc"}, 256, false, {"<pad>"}), std::invalid_argument);
}

TEST_CASE("bpt equals bytes over tokens on the micro corpora") {
    // a zero-merge model emits one token per byte, so bpt is 1.0 for any
    // input; Hangul costs three tokens per character at this floor
    auto byte_model = train_on({"irrelevant"}, 256);
    auto report = bpt_eval(byte_model, {{"ascii", {"hello world", "more text"}}});
    CHECK(report.per_domain.at("ascii").bpt() == 1.0);

    auto hangul = bpt_eval(byte_model, {{"kr", {"안녕하세요"}}});
    CHECK(hangul.per_domain.at("kr").bpt() == 1.0);
    CHECK(hangul.per_domain.at("kr").bytes == 15);   // 3 bytes per syllable
    CHECK(hangul.per_domain.at("kr").tokens == 15);  // 1 token per byte

    auto merged = train_on({"aaaa"}, 257);
    auto aa = bpt_eval(merged, {{"a", {"aaaa"}}});
    CHECK(aa.per_domain.at("a").bpt() == 2.0);
}

TEST_CASE("bpt totals are additive across shards and empty domains warn") {
    std::mt19937_64 rng(59);
    std::vector<std::string> shard_a, shard_b;
    for (int i = 0; i < 20; ++i) shard_a.push_back(testutil::random_sentence(rng, 12));
    for (int i = 0; i < 20; ++i) shard_b.push_back(testutil::random_utf8(rng, 30));
    auto model = train_on(shard_a, 400);

    auto part_a = bpt_eval(model, {{"d", shard_a}});
    auto part_b = bpt_eval(model, {{"d", shard_b}});
    std::vector<std::string> both = shard_a;
    both.insert(both.end(), shard_b.begin(), shard_b.end());
    auto whole = bpt_eval(model, {{"d", both}});
    CHECK(whole.per_domain.at("d").bytes ==
          part_a.per_domain.at("d").bytes + part_b.per_domain.at("d").bytes);
    CHECK(whole.per_domain.at("d").tokens ==
          part_a.per_domain.at("d").tokens + part_b.per_domain.at("d").tokens);

    auto with_empty = bpt_eval(model, {{"d", shard_a}, {"empty", {}}});
    CHECK(with_empty.per_domain.count("empty") == 0);
    REQUIRE(with_empty.warnings.size() == 1);
    CHECK(with_empty.warnings[0].find("empty") != std::string::npos);

    // overall totals equal the per-domain sums
    auto multi = bpt_eval(model, {{"a", shard_a}, {"b", shard_b}});
    CHECK(multi.overall.bytes ==
          multi.per_domain.at("a").bytes + multi.per_domain.at("b").bytes);
    CHECK(multi.overall.tokens ==
          multi.per_domain.at("a").tokens + multi.per_domain.at("b").tokens);
}

TEST_CASE("vocab audit classifies Hangul tokens and flags lexicon hits") {
    // zero-merge model: no single byte is Hangul
    auto byte_model = train_on({"x"}, 256);
    auto audit = vocab_audit(byte_model, {});
    CHECK(audit.kr_tokens == 0);
    CHECK(audit.kr_share == 0.0);
    CHECK(audit.kr_tokens + audit.other_tokens == byte_model.vocab_size());

    // Hangul-trained model grows Hangul tokens
    std::vector<std::string> kr_corpus(30, "안녕하세요 세계 안녕하세요 세계");
    auto kr_model = train_on(kr_corpus, 320);
    auto kr_audit = vocab_audit(kr_model, {});
    CHECK(kr_audit.kr_tokens > 0);

    std::vector<std::string> ascii_corpus(30, "hello world hello world again");
    auto ascii_model = train_on(ascii_corpus, 320);
    auto ascii_audit = vocab_audit(ascii_model, {});
    CHECK(kr_audit.kr_share > ascii_audit.kr_share);

    // lexicon hits are substring matches over decoded tokens
    std::vector<std::string> bad_corpus(30, "badword badword badword");
    auto bad_model = train_on(bad_corpus, 300);
    auto bad_audit = vocab_audit(bad_model, {"badword"});
    CHECK(!bad_audit.harmful_hits.empty());
    CHECK(bad_audit.harmful_hits[0].lexicon_entry == "badword");
    auto clean_audit = vocab_audit(bad_model, {"absent"});
    CHECK(clean_audit.harmful_hits.empty());
}

TEST_CASE("mixture sweep trains one deterministic model per ratio") {
    std::vector<std::string> synth(40, "synthetic synthetic synthetic data data");
    std::vector<std::string> crawl(40, "crawl web pages crawl web pages");
    std::map<std::string, std::vector<std::string>> sources = {{"synthetic", synth},
                                                               {"crawl", crawl}};
    std::map<std::string, std::vector<std::string>> evals = {
        {"synthetic", {synth[0]}}, {"crawl", {crawl[0]}}};

    std::vector<std::map<std::string, double>> ratios = {
        {{"synthetic", 1.0}, {"crawl", 0.0}}, {{"synthetic", 0.0}, {"crawl", 1.0}}};
    auto rows = mixture_sweep(sources, ratios, 300, 800, evals);
    CHECK(rows.size() == 6);  // 2 ratios x (2 domains + overall)

    // pure-synthetic and pure-crawl tokenizers compress their own domain best
    double synth_on_synth = 0, crawl_on_synth = 0;
    for (const auto& row : rows) {
        if (row.domain == "synthetic") {
            if (row.ratio_label.find("synthetic=1.000") != std::string::npos)
                synth_on_synth = row.bpt;
            else
                crawl_on_synth = row.bpt;
        }
    }
    CHECK(synth_on_synth > crawl_on_synth);

    // determinism: identical call, identical rows
    auto again = mixture_sweep(sources, ratios, 300, 800, evals);
    REQUIRE(again.size() == rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(again[i].ratio_label == rows[i].ratio_label);
        CHECK(again[i].tokens == rows[i].tokens);
    }
}

TEST_CASE("mixture sweep reports infeasible byte budgets by source") {
    std::map<std::string, std::vector<std::string>> sources = {{"tiny", {"abc"}}};
    std::map<std::string, std::vector<std::string>> evals = {{"d", {"abc"}}};
    std::vector<std::map<std::string, double>> ratios = {{{"tiny", 1.0}}};
    CHECK_THROWS_WITH_AS(mixture_sweep(sources, ratios, 300, 1 << 20, evals),
                         doctest::Contains("tiny"), std::runtime_error);

    std::vector<std::map<std::string, double>> bad_ratio = {{{"tiny", 0.5}}};
    CHECK_THROWS_AS(mixture_sweep(sources, bad_ratio, 300, 10, evals),
                    std::invalid_argument);
}
