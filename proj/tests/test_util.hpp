#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "curator/unicode.hpp"

namespace testutil {

// All randomness in tests goes through raw mt19937_64 draws so expected
// values stay stable across standard libraries.
inline uint64_t draw(std::mt19937_64& rng, uint64_t bound) { return rng() % bound; }

inline std::string random_word(std::mt19937_64& rng, size_t min_len = 1,
                               size_t max_len = 8) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz";
    size_t len = min_len + draw(rng, max_len - min_len + 1);
    std::string w;
    for (size_t i = 0; i < len; ++i) w.push_back(alphabet[draw(rng, 26)]);
    return w;
}

inline std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

inline std::string random_sentence(std::mt19937_64& rng, size_t words) {
    std::vector<std::string> ws;
    for (size_t i = 0; i < words; ++i) ws.push_back(random_word(rng));
    return join_words(ws);
}

// Valid random UTF-8 spanning ASCII, Hangul, and astral planes.
inline std::string random_utf8(std::mt19937_64& rng, size_t codepoints) {
    std::string out;
    for (size_t i = 0; i < codepoints; ++i) {
        char32_t cp;
        switch (draw(rng, 4)) {
            case 0: cp = char32_t(0x20 + draw(rng, 0x5F)); break;            // ASCII
            case 1: cp = char32_t(0xAC00 + draw(rng, 0xD7A4 - 0xAC00)); break;  // Hangul
            case 2: cp = char32_t(0x3040 + draw(rng, 0x30FF - 0x3040)); break;  // kana
            default: cp = char32_t(0x1F300 + draw(rng, 0x100)); break;       // emoji
        }
        curator::utf8_append(out, cp);
    }
    return out;
}

inline std::string random_bytes(std::mt19937_64& rng, size_t len) {
    std::string out(len, '\0');
    for (auto& c : out) c = char(draw(rng, 256));
    return out;
}

// ROC AUC via rank statistics; ties get midranks.
inline double auc(const std::vector<double>& pos_scores,
                  const std::vector<double>& neg_scores) {
    std::vector<std::pair<double, int>> all;
    for (double s : pos_scores) all.push_back({s, 1});
    for (double s : neg_scores) all.push_back({s, 0});
    std::sort(all.begin(), all.end());
    double rank_sum = 0.0;
    size_t i = 0;
    while (i < all.size()) {
        size_t j = i;
        while (j < all.size() && all[j].first == all[i].first) ++j;
        double midrank = 0.5 * double(i + j - 1) + 1.0;
        for (size_t k = i; k < j; ++k)
            if (all[k].second) rank_sum += midrank;
        i = j;
    }
    double np = double(pos_scores.size());
    double nn = double(neg_scores.size());
    return (rank_sum - np * (np + 1) / 2.0) / (np * nn);
}

}  // namespace testutil
