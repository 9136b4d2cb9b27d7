#include "curator/bloom.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace curator {

namespace {

constexpr char kMagic[4] = {'C', 'B', 'F', '1'};
constexpr uint64_t kMaxBits = uint64_t(1) << 43;  // 1 TiB of filter

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
}

}  // namespace

BloomFilter::BloomFilter(uint64_t expected_items, double target_fpr, uint64_t seed) {
    if (expected_items == 0) throw std::invalid_argument("expected_items must be > 0");
    if (!(target_fpr > 0.0 && target_fpr < 1.0))
        throw std::invalid_argument("target_fpr must be in (0,1)");

    const double ln2 = std::log(2.0);
    double m = std::ceil(-double(expected_items) * std::log(target_fpr) / (ln2 * ln2));
    if (!(m > 0) || m > double(kMaxBits))
        throw std::length_error("bloom filter size exceeds addressable memory");
    m_ = uint64_t(m);
    k_ = uint32_t(std::ceil(m / double(expected_items) * ln2));
    if (k_ == 0) k_ = 1;
    seed_ = seed;
    bits_.assign((m_ + 63) / 64, 0);
}

BloomFilter BloomFilter::with_geometry(uint64_t bit_count, uint32_t hash_count,
                                       uint64_t seed) {
    if (bit_count == 0 || hash_count == 0)
        throw std::invalid_argument("bloom geometry must be positive");
    if (bit_count > kMaxBits)
        throw std::length_error("bloom filter size exceeds addressable memory");
    BloomFilter f;
    f.m_ = bit_count;
    f.k_ = hash_count;
    f.seed_ = seed;
    f.bits_.assign((bit_count + 63) / 64, 0);
    return f;
}

void BloomFilter::insert_key(uint64_t key) {
    uint64_t h1 = mix64(key);
    uint64_t h2 = mix64(key ^ 0x9e3779b97f4a7c15ULL) | 1;
    for (uint32_t i = 0; i < k_; ++i) {
        uint64_t idx = (h1 + uint64_t(i) * h2) % m_;
        bits_[idx >> 6] |= (uint64_t(1) << (idx & 63));
    }
    ++inserted_;
}

bool BloomFilter::contains_key(uint64_t key) const {
    uint64_t h1 = mix64(key);
    uint64_t h2 = mix64(key ^ 0x9e3779b97f4a7c15ULL) | 1;
    for (uint32_t i = 0; i < k_; ++i) {
        uint64_t idx = (h1 + uint64_t(i) * h2) % m_;
        if (!(bits_[idx >> 6] & (uint64_t(1) << (idx & 63)))) return false;
    }
    return true;
}

double BloomFilter::expected_fpr() const {
    double exponent = -double(k_) * double(inserted_) / double(m_);
    return std::pow(1.0 - std::exp(exponent), double(k_));
}

void BloomFilter::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(kMagic, 4);
    write_pod(os, m_);
    write_pod(os, k_);
    write_pod(os, seed_);
    write_pod(os, inserted_);
    os.write(reinterpret_cast<const char*>(bits_.data()),
             std::streamsize(bits_.size() * sizeof(uint64_t)));
    if (!os) throw std::runtime_error("write failed: " + path);
}

BloomFilter BloomFilter::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a bloom filter file: " + path);
    BloomFilter f;
    read_pod(is, f.m_);
    read_pod(is, f.k_);
    read_pod(is, f.seed_);
    read_pod(is, f.inserted_);
    if (!is || f.m_ == 0 || f.m_ > kMaxBits || f.k_ == 0)
        throw std::runtime_error("corrupt bloom filter header: " + path);
    f.bits_.resize((f.m_ + 63) / 64);
    is.read(reinterpret_cast<char*>(f.bits_.data()),
            std::streamsize(f.bits_.size() * sizeof(uint64_t)));
    if (!is) throw std::runtime_error("truncated bloom filter file: " + path);
    return f;
}

}  // namespace curator
