#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace curator {

// 64-bit MurmurHash64A. Seeded, stable across runs and platforms.
inline uint64_t hash64(const void* data, size_t len, uint64_t seed) {
    const uint64_t m = 0xc6a4a7935bd1e995ULL;
    const int r = 47;
    uint64_t h = seed ^ (len * m);

    const auto* p = static_cast<const unsigned char*>(data);
    const unsigned char* end = p + (len & ~size_t(7));
    while (p != end) {
        uint64_t k;
        std::memcpy(&k, p, 8);
        p += 8;
        k *= m;
        k ^= k >> r;
        k *= m;
        h ^= k;
        h *= m;
    }

    switch (len & 7) {
        case 7: h ^= uint64_t(p[6]) << 48; [[fallthrough]];
        case 6: h ^= uint64_t(p[5]) << 40; [[fallthrough]];
        case 5: h ^= uint64_t(p[4]) << 32; [[fallthrough]];
        case 4: h ^= uint64_t(p[3]) << 24; [[fallthrough]];
        case 3: h ^= uint64_t(p[2]) << 16; [[fallthrough]];
        case 2: h ^= uint64_t(p[1]) << 8; [[fallthrough]];
        case 1: h ^= uint64_t(p[0]); h *= m;
    }

    h ^= h >> r;
    h *= m;
    h ^= h >> r;
    return h;
}

inline uint64_t hash64(std::string_view s, uint64_t seed = 0) {
    return hash64(s.data(), s.size(), seed);
}

// splitmix64; used to derive secondary seeds and cheap value mixing.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace curator
