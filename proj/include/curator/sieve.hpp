#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace curator {

enum class Domain { Code, Math, Stem, Chat, Tool };
enum class Difficulty { Easy, Medium, Hard };

std::string_view domain_name(Domain d);
std::optional<Domain> domain_from_name(std::string_view name);
std::string_view difficulty_name(Difficulty d);
std::optional<Difficulty> difficulty_from_name(std::string_view name);

// One annotated sample: per-judge answer correctness and difficulty labels.
struct AnnotationRecord {
    std::string id;
    Domain domain = Domain::Chat;
    std::map<std::string, bool> correctness;
    std::map<std::string, Difficulty> difficulty;
};

class MissingJudgeError : public std::runtime_error {
public:
    MissingJudgeError(const std::string& id, const std::string& judge,
                      const std::string& field)
        : std::runtime_error("record '" + id + "' missing " + field + " annotation from '" +
                             judge + "'"),
          id_(id) {}
    const std::string& id() const { return id_; }

private:
    std::string id_;
};

struct SieveConfig {
    std::array<std::string, 2> judges;
    // Domains whose records skip the stage-1 correctness test and go
    // straight into the candidate pool.
    std::set<Domain> stage1_bypass = {Domain::Chat, Domain::Tool};
    bool skip_missing = false;  // false = error on a missing judge annotation
};

// Stage 1: keep records both judges answered incorrectly.
std::vector<AnnotationRecord> stage1_filter(const std::vector<AnnotationRecord>& records,
                                            const SieveConfig& cfg);

// Stage 2: keep records both judges labeled hard.
std::vector<AnnotationRecord> stage2_consensus(const std::vector<AnnotationRecord>& pool,
                                               const SieveConfig& cfg);

struct DomainCounts {
    uint64_t input = 0;
    uint64_t stage1 = 0;
    uint64_t final_count = 0;

    double reduction_fraction() const {
        return input ? double(input - final_count) / double(input) : 0.0;
    }
    double retained_fraction() const {
        return input ? double(final_count) / double(input) : 0.0;
    }
};

struct SieveReport {
    uint64_t input_count = 0;
    uint64_t stage1_count = 0;
    uint64_t final_count = 0;
    uint64_t skipped_missing = 0;
    std::map<std::string, DomainCounts> per_domain;
};

std::pair<std::vector<AnnotationRecord>, SieveReport> sieve(
    const std::vector<AnnotationRecord>& records, const SieveConfig& cfg);

// Indices (ascending) of a 1:1 class-balanced subsample: min(n_true, n_false)
// of each class, drawn uniformly without replacement. Deterministic given
// the seed; throws when either class is empty.
std::vector<size_t> balance_sample_indices(const std::vector<char>& flags, uint64_t seed);

// JSONL ingest: {id, domain, correctness: {judge: bool},
//                difficulty: {judge: "easy"|"medium"|"hard"}}.
std::vector<AnnotationRecord> read_annotations(const std::string& path);
void write_annotations(const std::vector<AnnotationRecord>& records,
                       const std::string& path);

}  // namespace curator
