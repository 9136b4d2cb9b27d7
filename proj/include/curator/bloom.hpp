#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "curator/hash.hpp"

namespace curator {

// Plain Bloom filter over 64-bit key hashes. k probe positions are derived
// from one hash by double hashing, so membership never false-negatives and
// runs are reproducible given the seed.
class BloomFilter {
public:
    // Sizes the bit array from the standard optimal formulas
    //   m = ceil(-n ln p / (ln 2)^2),  k = ceil((m/n) ln 2).
    BloomFilter(uint64_t expected_items, double target_fpr, uint64_t seed);

    static BloomFilter with_geometry(uint64_t bit_count, uint32_t hash_count, uint64_t seed);

    uint64_t key(std::string_view unit) const { return hash64(unit, seed_); }

    void insert_key(uint64_t key);
    bool contains_key(uint64_t key) const;

    void insert(std::string_view unit) { insert_key(key(unit)); }
    bool contains(std::string_view unit) const { return contains_key(key(unit)); }

    uint64_t bit_count() const { return m_; }
    uint32_t hash_count() const { return k_; }
    uint64_t inserted() const { return inserted_; }
    uint64_t seed() const { return seed_; }

    // Expected FPR at the current fill: (1 - e^(-k*inserted/m))^k.
    double expected_fpr() const;

    void save(const std::string& path) const;
    static BloomFilter load(const std::string& path);

private:
    BloomFilter() = default;

    uint64_t m_ = 0;
    uint32_t k_ = 0;
    uint64_t seed_ = 0;
    uint64_t inserted_ = 0;
    std::vector<uint64_t> bits_;
};

}  // namespace curator
