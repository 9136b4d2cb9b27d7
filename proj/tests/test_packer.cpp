#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "curator/packer.hpp"
#include "test_util.hpp"

using namespace curator;

namespace {

constexpr uint32_t kPad = 0xFFFFFFFF;

PackerConfig cfg(uint32_t length = 4096) { return {length, kPad}; }

// Doc whose tokens encode (doc number, position) so segment checks can
// verify no interleaving.
TokenizedDoc make_doc(uint32_t number, uint32_t len, bool reasoning = false) {
    TokenizedDoc d;
    d.id = "doc-" + std::to_string(number);
    d.tokens.resize(len);
    for (uint32_t i = 0; i < len; ++i) d.tokens[i] = (number << 16) | (i & 0xFFFF);
    d.reasoning = reasoning;
    return d;
}

void check_invariants(const PackedSequence& seq, uint32_t length) {
    REQUIRE(seq.tokens.size() == length);
    REQUIRE(!seq.boundaries.empty());
    CHECK(seq.boundaries.front() == 0);
    for (size_t i = 1; i < seq.boundaries.size(); ++i)
        CHECK(seq.boundaries[i] > seq.boundaries[i - 1]);
    CHECK(seq.boundaries.back() == length - seq.pad_len);
    CHECK(seq.pad_len < length);
    CHECK(seq.source_ids.size() == seq.boundaries.size() - 1);
    for (uint32_t i = seq.boundaries.back(); i < length; ++i)
        CHECK(seq.tokens[i] == kPad);
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("the [2000, 2000, 4000] trace packs exactly as expected") {
    auto seqs = pack({make_doc(1, 2000), make_doc(2, 2000), make_doc(3, 4000)}, cfg());
    REQUIRE(seqs.size() == 2);

    CHECK(seqs[0].boundaries == std::vector<uint32_t>{0, 2000, 4000});
    CHECK(seqs[0].pad_len == 96);
    CHECK(seqs[0].source_ids == std::vector<std::string>{"doc-1", "doc-2"});

    CHECK(seqs[1].boundaries == std::vector<uint32_t>{0, 4000});
    CHECK(seqs[1].pad_len == 96);
    CHECK(seqs[1].source_ids == std::vector<std::string>{"doc-3"});

    for (const auto& s : seqs) check_invariants(s, 4096);
}

TEST_CASE("a doc of exactly L fills one sequence with no padding") {
    auto seqs = pack({make_doc(1, 4096)}, cfg());
    REQUIRE(seqs.size() == 1);
    CHECK(seqs[0].pad_len == 0);
    CHECK(seqs[0].boundaries == std::vector<uint32_t>{0, 4096});
    CHECK(seqs[0].source_ids.size() == 1);
}

TEST_CASE("oversize docs split into full parts with the tail packed onward") {
    auto seqs = pack({make_doc(1, 5000), make_doc(2, 3000)}, cfg());
    REQUIRE(seqs.size() == 2);
    CHECK(seqs[0].pad_len == 0);
    CHECK(seqs[0].boundaries == std::vector<uint32_t>{0, 4096});
    CHECK(seqs[0].source_ids == std::vector<std::string>{"doc-1"});

    CHECK(seqs[1].boundaries == std::vector<uint32_t>{0, 904, 3904});
    CHECK(seqs[1].source_ids == std::vector<std::string>{"doc-1", "doc-2"});
    CHECK(seqs[1].pad_len == 4096 - 3904);

    // the tail segment continues the source document's token sequence
    for (uint32_t i = 0; i < 904; ++i)
        CHECK(seqs[1].tokens[i] == ((1u << 16) | ((4096 + i) & 0xFFFF)));
}

TEST_CASE("token conservation and invariants hold on random streams") {
    std::mt19937_64 rng(77);
    for (int iter = 0; iter < 50; ++iter) {
        std::vector<TokenizedDoc> docs;
        uint64_t total_tokens = 0;
        size_t count = 1 + testutil::draw(rng, 30);
        for (size_t i = 0; i < count; ++i) {
            uint32_t len = uint32_t(testutil::draw(rng, 6000));
            docs.push_back(make_doc(uint32_t(i), len));
            total_tokens += len;
        }
        auto seqs = pack(docs, cfg());

        uint64_t packed_tokens = 0;
        for (const auto& s : seqs) {
            check_invariants(s, 4096);
            packed_tokens += 4096 - s.pad_len;
        }
        CHECK(packed_tokens == total_tokens);

        // each segment is a contiguous slice of exactly one document
        std::map<std::string, uint32_t> consumed;
        for (const auto& s : seqs) {
            for (size_t seg = 0; seg + 1 < s.boundaries.size(); ++seg) {
                const std::string& id = s.source_ids[seg];
                uint32_t number = uint32_t(std::stoul(id.substr(4)));
                uint32_t& offset = consumed[id];
                for (uint32_t i = s.boundaries[seg]; i < s.boundaries[seg + 1]; ++i) {
                    CHECK(s.tokens[i] == ((number << 16) | (offset & 0xFFFF)));
                    ++offset;
                }
            }
        }
        for (const auto& d : docs)
            if (!d.tokens.empty()) CHECK(consumed.at(d.id) == d.tokens.size());
    }
}

TEST_CASE("repacking the same input is identical") {
    std::mt19937_64 rng(78);
    std::vector<TokenizedDoc> docs;
    for (int i = 0; i < 40; ++i)
        docs.push_back(make_doc(uint32_t(i), uint32_t(testutil::draw(rng, 5000))));
    CHECK(pack(docs, cfg()) == pack(docs, cfg()));
}

TEST_CASE("pad_only pads each document to the full length") {
    auto seqs = pad_only({make_doc(1, 3000)}, cfg());
    REQUIRE(seqs.size() == 1);
    CHECK(seqs[0].pad_len == 1096);
    CHECK(seqs[0].boundaries == std::vector<uint32_t>{0, 3000});
    check_invariants(seqs[0], 4096);

    auto exact = pad_only({make_doc(2, 4096)}, cfg());
    CHECK(exact[0].pad_len == 0);

    try {
        pad_only({make_doc(3, 4097)}, cfg());
        FAIL("expected OversizeDocError");
    } catch (const OversizeDocError& e) {
        CHECK(e.id() == "doc-3");
    }
}

TEST_CASE("length gate keeps 16384 and drops 16385") {
    std::vector<TokenizedDoc> docs = {make_doc(1, 16384), make_doc(2, 16385), make_doc(3, 0)};
    auto [kept, report] = length_gate(docs);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == "doc-1");
    CHECK(kept[1].id == "doc-3");  // empty doc is kept
    CHECK(report.docs_in == 3);
    CHECK(report.docs_kept == 2);
    CHECK(report.dropped_ids == std::vector<std::string>{"doc-2"});
    CHECK(report.tokens_dropped == 16385);
}

TEST_CASE("route sends reasoning docs to padding and the rest to packing") {
    auto result = route({make_doc(1, 1000, true), make_doc(2, 1500), make_doc(3, 1500)},
                        cfg());
    REQUIRE(result.padded.size() == 1);
    CHECK(result.padded[0].source_ids == std::vector<std::string>{"doc-1"});
    REQUIRE(result.packed.size() == 1);
    CHECK(result.packed[0].source_ids == std::vector<std::string>{"doc-2", "doc-3"});

    auto all_plain = route({make_doc(1, 100), make_doc(2, 100)}, cfg());
    CHECK(all_plain.padded.empty());
    CHECK(all_plain.packed.size() == 1);

    auto all_reasoning = route({make_doc(1, 100, true), make_doc(2, 100, true)}, cfg());
    CHECK(all_reasoning.packed.empty());
    CHECK(all_reasoning.padded.size() == 2);
}

TEST_CASE("shards round trip through the binary format and index") {
    std::mt19937_64 rng(79);
    std::vector<TokenizedDoc> docs;
    for (int i = 0; i < 25; ++i)
        docs.push_back(make_doc(uint32_t(i), uint32_t(testutil::draw(rng, 400))));
    PackerConfig c = cfg(256);
    auto seqs = pack(docs, c);

    std::string bin = temp_path("curator_shard.bin");
    std::string index = temp_path("curator_shard_index.jsonl");
    write_shard(seqs, c, bin, index);
    auto back = read_shard(bin, index);
    CHECK(back == seqs);

    // byte-identical rewrite
    write_shard(seqs, c, bin + ".2", index + ".2");
    std::ifstream a(bin, std::ios::binary), b(bin + ".2", std::ios::binary);
    std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
    std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
    CHECK(bytes_a == bytes_b);
}
