#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace curator {

enum class SourceKind { Web, Synthetic, Reasoning, Opensource };

std::string_view source_kind_name(SourceKind kind);
std::optional<SourceKind> source_kind_from_name(std::string_view name);

// stage 0 = available to both stages.
struct SourceSpec {
    std::string name;
    std::string language;  // "en", "ko", ...
    SourceKind kind = SourceKind::Web;
    uint64_t available_tokens = 0;
    int stage = 1;  // 1, 2, or 0 for both
    double max_epochs = 1.0;
};

struct PlanConstraints {
    std::optional<uint64_t> total_tokens;          // must equal the sum of stage totals
    std::map<std::string, double> min_lang_share;  // overall floor per language
    std::map<int, uint64_t> stage_totals;          // absent stage -> natural sum
};

struct PlannedSource {
    std::string name;
    int stage = 1;
    uint64_t tokens = 0;
    double epochs = 0.0;
    std::string language;
    SourceKind kind = SourceKind::Web;

    bool operator==(const PlannedSource&) const = default;
};

struct MixturePlan {
    std::vector<PlannedSource> budgets;  // stage-major, then input source order
    std::map<int, uint64_t> stage_totals;
    std::map<int, std::map<std::string, double>> language_shares;
    std::map<std::string, double> overall_language_shares;
    double synthetic_share_korean = 0.0;  // synthetic fraction of the "ko" budget
    bool feasible = true;

    uint64_t total_tokens() const;
};

class InfeasiblePlanError : public std::runtime_error {
public:
    InfeasiblePlanError(std::string constraint, const std::string& detail)
        : std::runtime_error("infeasible plan: " + constraint + ": " + detail),
          constraint_(std::move(constraint)) {}

    const std::string& binding_constraint() const { return constraint_; }

private:
    std::string constraint_;
};

// Budgets are proportional to availability within each (stage, language)
// group, scaled to meet the stage totals; language floors are met by
// up-weighting that language with upsampling capped at max_epochs.
// Throws InfeasiblePlanError naming the binding constraint.
MixturePlan plan(const std::vector<SourceSpec>& sources, const PlanConstraints& constraints);

// Every invariant violation, empty when the plan is valid.
std::vector<std::string> validate(const MixturePlan& plan,
                                  const std::vector<SourceSpec>& sources);

struct ManifestRow {
    std::string name;
    int stage = 1;
    uint64_t tokens = 0;
    double epochs = 0.0;
    uint64_t shuffle_seed = 0;

    bool operator==(const ManifestRow&) const = default;
};

void emit_manifest(const MixturePlan& plan, const std::string& path, uint64_t seed);
std::vector<ManifestRow> read_manifest(const std::string& path);

}  // namespace curator
