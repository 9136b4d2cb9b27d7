#include "curator/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "curator/document.hpp"
#include "curator/hash.hpp"

namespace curator {

namespace {

constexpr char kMagic[4] = {'C', 'Q', 'M', '1'};
constexpr uint64_t kNgramCombine = 116049371ULL;

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
}

void write_string(std::ostream& os, const std::string& s) {
    uint32_t len = uint32_t(s.size());
    write_pod(os, len);
    os.write(s.data(), len);
}

std::string read_string(std::istream& is) {
    uint32_t len = 0;
    read_pod(is, len);
    std::string s(len, '\0');
    is.read(s.data(), len);
    return s;
}

struct Softmax {
    std::array<float, 2> p;
};

Softmax softmax2(float s0, float s1) {
    float m = std::max(s0, s1);
    float e0 = std::exp(s0 - m);
    float e1 = std::exp(s1 - m);
    float sum = e0 + e1;
    return {{e0 / sum, e1 / sum}};
}

}  // namespace

void LinearTextClassifier::features(std::string_view text, std::vector<uint32_t>& out) const {
    out.clear();
    TextStats st = stats(text);
    if (st.word_count == 0) return;

    std::vector<uint64_t> word_hashes(st.word_count);
    for (size_t i = 0; i < st.word_count; ++i) {
        const auto& w = st.words[i];
        word_hashes[i] = hash64(text.substr(w.begin, w.size()), seed_);
    }

    for (size_t n = ngram_min_; n <= ngram_max_; ++n) {
        if (st.word_count < n || n == 0) continue;
        for (size_t i = 0; i + n <= st.word_count; ++i) {
            uint64_t h = word_hashes[i];
            for (size_t j = 1; j < n; ++j) h = h * kNgramCombine + word_hashes[i + j];
            out.push_back(uint32_t(h % bucket_count_));
        }
    }
}

double LinearTextClassifier::score(std::string_view text) const {
    return class_scores(text)[0];
}

std::array<double, 2> LinearTextClassifier::class_scores(std::string_view text) const {
    std::vector<uint32_t> feats;
    features(text, feats);

    std::vector<float> hidden(dim_, 0.0f);
    if (!feats.empty()) {
        for (uint32_t f : feats) {
            const float* row = &embeddings_[size_t(f) * dim_];
            for (size_t d = 0; d < dim_; ++d) hidden[d] += row[d];
        }
        float inv = 1.0f / float(feats.size());
        for (size_t d = 0; d < dim_; ++d) hidden[d] *= inv;
    }

    float s0 = output_bias_[0];
    float s1 = output_bias_[1];
    for (size_t d = 0; d < dim_; ++d) {
        s0 += output_weights_[d * 2] * hidden[d];
        s1 += output_weights_[d * 2 + 1] * hidden[d];
    }
    Softmax sm = softmax2(s0, s1);
    return {double(sm.p[0]), double(sm.p[1])};
}

namespace {

struct Example {
    const std::string* text;
    int label;  // 0 = positive, 1 = negative
};

}  // namespace

class ClassifierTrainer {
public:
    static LinearTextClassifier run(const std::vector<std::string>& positives,
                                    const std::vector<std::string>& negatives,
                                    const TrainOptions& opts, TrainStats* stats_out) {
        if (positives.empty()) throw std::invalid_argument("positive class is empty");
        if (negatives.empty()) throw std::invalid_argument("negative class is empty");
        if (opts.bucket_count == 0 || opts.dim == 0)
            throw std::invalid_argument("bucket_count and dim must be > 0");

        LinearTextClassifier model;
        model.bucket_count_ = opts.bucket_count;
        model.dim_ = opts.dim;
        model.ngram_min_ = opts.ngram_min;
        model.ngram_max_ = opts.ngram_max;
        model.seed_ = opts.seed;
        model.label_names_ = opts.label_names;
        model.output_weights_.assign(opts.dim * 2, 0.0f);

        // Embedding init is a fixed function of the seed alone, independent
        // of the data, so swapping the two input streams cannot change it.
        model.embeddings_.resize(opts.bucket_count * opts.dim);
        std::mt19937_64 rng(opts.seed);
        const float scale = 1.0f / float(opts.dim);
        for (auto& v : model.embeddings_) {
            double u = double(rng() >> 11) * 0x1.0p-53;  // [0,1)
            v = float((2.0 * u - 1.0) * scale);
        }

        std::vector<Example> examples;
        examples.reserve(positives.size() + negatives.size());
        for (const auto& t : positives) examples.push_back({&t, 0});
        for (const auto& t : negatives) examples.push_back({&t, 1});

        const uint64_t total_updates = uint64_t(opts.epochs) * examples.size();
        uint64_t update = 0;
        double epoch_loss = 0.0;
        double first_epoch_loss = 0.0;

        std::vector<uint32_t> feats;
        std::vector<float> hidden(opts.dim);
        std::vector<size_t> order(examples.size());
        std::iota(order.begin(), order.end(), size_t(0));

        for (size_t epoch = 0; epoch < opts.epochs; ++epoch) {
            // Canonical shuffle: sort by a seeded content hash. The order is
            // a function of the texts only, never of the class they came in
            // as, which is what makes label-swap symmetry exact.
            std::vector<uint64_t> keys(examples.size());
            for (size_t i = 0; i < examples.size(); ++i)
                keys[i] = hash64(*examples[i].text, opts.seed ^ (epoch + 1));
            std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                if (keys[a] != keys[b]) return keys[a] < keys[b];
                return *examples[a].text < *examples[b].text;
            });

            epoch_loss = 0.0;
            for (size_t idx : order) {
                const Example& ex = examples[idx];
                model.features(*ex.text, feats);

                std::fill(hidden.begin(), hidden.end(), 0.0f);
                if (!feats.empty()) {
                    for (uint32_t f : feats) {
                        const float* row = &model.embeddings_[size_t(f) * opts.dim];
                        for (size_t d = 0; d < opts.dim; ++d) hidden[d] += row[d];
                    }
                    float inv = 1.0f / float(feats.size());
                    for (size_t d = 0; d < opts.dim; ++d) hidden[d] *= inv;
                }

                float s0 = model.output_bias_[0];
                float s1 = model.output_bias_[1];
                for (size_t d = 0; d < opts.dim; ++d) {
                    s0 += model.output_weights_[d * 2] * hidden[d];
                    s1 += model.output_weights_[d * 2 + 1] * hidden[d];
                }
                Softmax sm = softmax2(s0, s1);

                double loss = -std::log(std::max(1e-12, double(sm.p[ex.label])));
                if (!std::isfinite(loss)) throw DivergenceError(update);
                epoch_loss += loss;

                const float lr =
                    float(opts.learning_rate * (1.0 - double(update) / double(total_updates)));
                ++update;

                float g0 = sm.p[0] - (ex.label == 0 ? 1.0f : 0.0f);
                float g1 = sm.p[1] - (ex.label == 1 ? 1.0f : 0.0f);

                model.output_bias_[0] -= lr * g0;
                model.output_bias_[1] -= lr * g1;

                if (!feats.empty()) {
                    const float feat_lr = lr / float(feats.size());
                    for (size_t d = 0; d < opts.dim; ++d) {
                        float w0 = model.output_weights_[d * 2];
                        float w1 = model.output_weights_[d * 2 + 1];
                        float gh = w0 * g0 + w1 * g1;
                        model.output_weights_[d * 2] = w0 - lr * g0 * hidden[d];
                        model.output_weights_[d * 2 + 1] = w1 - lr * g1 * hidden[d];
                        hidden[d] = gh * feat_lr;  // reuse as embedding gradient
                    }
                    for (uint32_t f : feats) {
                        float* row = &model.embeddings_[size_t(f) * opts.dim];
                        for (size_t d = 0; d < opts.dim; ++d) row[d] -= hidden[d];
                    }
                }
            }
            epoch_loss /= double(examples.size());
            if (epoch == 0) first_epoch_loss = epoch_loss;
        }

        if (stats_out) {
            stats_out->initial_loss = first_epoch_loss;
            stats_out->final_loss = epoch_loss;
            stats_out->examples = examples.size();
        }
        return model;
    }
};

LinearTextClassifier LinearTextClassifier::train(const std::vector<std::string>& positives,
                                                 const std::vector<std::string>& negatives,
                                                 const TrainOptions& opts,
                                                 TrainStats* stats) {
    return ClassifierTrainer::run(positives, negatives, opts, stats);
}

void LinearTextClassifier::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(kMagic, 4);
    write_pod(os, uint64_t(bucket_count_));
    write_pod(os, uint32_t(dim_));
    write_pod(os, uint32_t(ngram_min_));
    write_pod(os, uint32_t(ngram_max_));
    write_pod(os, seed_);
    write_string(os, label_names_[0]);
    write_string(os, label_names_[1]);
    os.write(reinterpret_cast<const char*>(output_bias_.data()), sizeof(output_bias_));
    os.write(reinterpret_cast<const char*>(output_weights_.data()),
             std::streamsize(output_weights_.size() * sizeof(float)));
    os.write(reinterpret_cast<const char*>(embeddings_.data()),
             std::streamsize(embeddings_.size() * sizeof(float)));
    if (!os) throw std::runtime_error("write failed: " + path);
}

LinearTextClassifier LinearTextClassifier::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a classifier model file: " + path);

    LinearTextClassifier m;
    uint64_t buckets = 0;
    uint32_t dim = 0, nmin = 0, nmax = 0;
    read_pod(is, buckets);
    read_pod(is, dim);
    read_pod(is, nmin);
    read_pod(is, nmax);
    read_pod(is, m.seed_);
    m.bucket_count_ = size_t(buckets);
    m.dim_ = dim;
    m.ngram_min_ = nmin;
    m.ngram_max_ = nmax;
    m.label_names_[0] = read_string(is);
    m.label_names_[1] = read_string(is);
    is.read(reinterpret_cast<char*>(m.output_bias_.data()), sizeof(m.output_bias_));
    m.output_weights_.resize(size_t(dim) * 2);
    is.read(reinterpret_cast<char*>(m.output_weights_.data()),
            std::streamsize(m.output_weights_.size() * sizeof(float)));
    m.embeddings_.resize(size_t(buckets) * dim);
    is.read(reinterpret_cast<char*>(m.embeddings_.data()),
            std::streamsize(m.embeddings_.size() * sizeof(float)));
    if (!is) throw std::runtime_error("truncated classifier model file: " + path);
    return m;
}

}  // namespace curator
