#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace curator {

// Hyperparameters for the linear bag-of-n-grams quality classifier.
struct TrainOptions {
    size_t bucket_count = 2'000'000;  // hashed feature space
    size_t dim = 16;
    size_t ngram_min = 1;
    size_t ngram_max = 2;  // word n-gram orders {1,2}
    size_t epochs = 5;
    double learning_rate = 0.1;  // decays linearly to 0
    uint64_t seed = 42;
    std::array<std::string, 2> label_names = {"positive", "negative"};
};

struct TrainStats {
    double initial_loss = 0.0;  // mean loss over the first epoch
    double final_loss = 0.0;    // mean loss over the last epoch
    uint64_t examples = 0;
};

class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(uint64_t step)
        : std::runtime_error("training diverged (non-finite loss) at update " +
                             std::to_string(step)),
          step_(step) {}
    uint64_t step() const { return step_; }

private:
    uint64_t step_;
};

// Averaged hashed-n-gram embeddings into a linear softmax over two classes.
// Inference is pure and thread-safe; training is single-threaded and
// deterministic given the seed.
class LinearTextClassifier {
public:
    static LinearTextClassifier train(const std::vector<std::string>& positives,
                                      const std::vector<std::string>& negatives,
                                      const TrainOptions& opts,
                                      TrainStats* stats = nullptr);

    // P(positive) in [0,1]; P(negative) = 1 - score.
    double score(std::string_view text) const;

    // Both class probabilities, {P(positive), P(negative)}.
    std::array<double, 2> class_scores(std::string_view text) const;

    size_t bucket_count() const { return bucket_count_; }
    size_t dim() const { return dim_; }
    const std::array<std::string, 2>& label_names() const { return label_names_; }

    void save(const std::string& path) const;
    static LinearTextClassifier load(const std::string& path);

private:
    friend class ClassifierTrainer;
    LinearTextClassifier() = default;

    void features(std::string_view text, std::vector<uint32_t>& out) const;

    size_t bucket_count_ = 0;
    size_t dim_ = 0;
    size_t ngram_min_ = 1;
    size_t ngram_max_ = 2;
    uint64_t seed_ = 0;
    std::array<std::string, 2> label_names_;
    std::vector<float> embeddings_;      // bucket_count x dim, row-major
    std::vector<float> output_weights_;  // dim x 2, row-major
    std::array<float, 2> output_bias_ = {0.0f, 0.0f};
};

}  // namespace curator
