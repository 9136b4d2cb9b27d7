#include "curator/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>

#include "curator/hash.hpp"
#include "curator/jsonl.hpp"

namespace curator {

namespace {

constexpr double kEps = 1e-9;

struct Cell {
    size_t source_index;
    double budget = 0.0;  // tokens, fractional until final rounding
};

struct StageState {
    int stage;
    uint64_t total = 0;
    std::vector<Cell> cells;
};

// Proportional-to-availability allocation of `total` across cells, capping
// each at available*max_epochs and redistributing the excess.
void water_fill(std::vector<Cell*>& cells, const std::vector<SourceSpec>& sources,
                double total, const std::string& constraint_label) {
    for (Cell* c : cells) c->budget = 0.0;
    std::vector<Cell*> open = cells;
    double remaining = total;
    while (remaining > kEps && !open.empty()) {
        double avail_sum = 0.0;
        for (Cell* c : open) avail_sum += double(sources[c->source_index].available_tokens);
        std::vector<Cell*> still_open;
        double placed = 0.0;
        for (Cell* c : open) {
            const SourceSpec& s = sources[c->source_index];
            double want = remaining * double(s.available_tokens) / avail_sum;
            double cap = double(s.available_tokens) * s.max_epochs - c->budget;
            if (want >= cap - kEps) {
                c->budget += cap;
                placed += cap;
            } else {
                c->budget += want;
                placed += want;
                still_open.push_back(c);
            }
        }
        remaining -= placed;
        if (still_open.size() == open.size()) break;  // nothing saturated; done
        open = std::move(still_open);
    }
    if (remaining > 0.5)
        throw InfeasiblePlanError(constraint_label,
                                  "even max upsampling leaves " +
                                      std::to_string(uint64_t(remaining)) +
                                      " tokens unassigned");
}

// Largest-remainder rounding to integer tokens summing exactly to total.
void round_stage(StageState& st) {
    std::vector<uint64_t> floors(st.cells.size());
    std::vector<double> remainders(st.cells.size());
    uint64_t assigned = 0;
    for (size_t i = 0; i < st.cells.size(); ++i) {
        double b = std::max(0.0, st.cells[i].budget);
        floors[i] = uint64_t(b);
        remainders[i] = b - double(floors[i]);
        assigned += floors[i];
    }
    uint64_t leftover = st.total > assigned ? st.total - assigned : 0;
    std::vector<size_t> order(st.cells.size());
    std::iota(order.begin(), order.end(), size_t(0));
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return remainders[a] > remainders[b]; });
    for (size_t i = 0; i < order.size() && leftover > 0; ++i, --leftover)
        ++floors[order[i]];
    for (size_t i = 0; i < st.cells.size(); ++i) st.cells[i].budget = double(floors[i]);
}

}  // namespace

std::string_view source_kind_name(SourceKind kind) {
    switch (kind) {
        case SourceKind::Web: return "web";
        case SourceKind::Synthetic: return "synthetic";
        case SourceKind::Reasoning: return "reasoning";
        case SourceKind::Opensource: return "opensource";
    }
    return "web";
}

std::optional<SourceKind> source_kind_from_name(std::string_view name) {
    if (name == "web") return SourceKind::Web;
    if (name == "synthetic") return SourceKind::Synthetic;
    if (name == "reasoning") return SourceKind::Reasoning;
    if (name == "opensource") return SourceKind::Opensource;
    return std::nullopt;
}

uint64_t MixturePlan::total_tokens() const {
    uint64_t total = 0;
    for (const auto& [stage, t] : stage_totals) total += t;
    return total;
}

MixturePlan plan(const std::vector<SourceSpec>& sources, const PlanConstraints& constraints) {
    if (sources.empty()) throw std::invalid_argument("no sources given");
    for (const auto& s : sources) {
        if (s.available_tokens == 0)
            throw std::invalid_argument("source '" + s.name + "' has zero availability");
        if (s.max_epochs < 1.0)
            throw std::invalid_argument("source '" + s.name + "' has max_epochs < 1");
        if (s.stage != 0 && s.stage != 1 && s.stage != 2)
            throw std::invalid_argument("source '" + s.name + "' has invalid stage");
    }

    // Stage participation; stage 0 sources join both stages.
    std::map<int, StageState> stages;
    for (size_t i = 0; i < sources.size(); ++i) {
        for (int stage : {1, 2}) {
            if (sources[i].stage == stage || sources[i].stage == 0) {
                auto& st = stages[stage];
                st.stage = stage;
                st.cells.push_back({i, 0.0});
            }
        }
    }
    for (auto it = stages.begin(); it != stages.end();) {
        if (it->second.cells.empty())
            it = stages.erase(it);
        else
            ++it;
    }

    for (auto& [stage, st] : stages) {
        auto given = constraints.stage_totals.find(stage);
        if (given != constraints.stage_totals.end()) {
            st.total = given->second;
        } else {
            uint64_t natural = 0;
            for (const auto& c : st.cells) natural += sources[c.source_index].available_tokens;
            st.total = natural;
        }
    }

    uint64_t grand_total = 0;
    for (const auto& [stage, st] : stages) grand_total += st.total;
    if (constraints.total_tokens && *constraints.total_tokens != grand_total)
        throw std::invalid_argument("total_tokens (" +
                                    std::to_string(*constraints.total_tokens) +
                                    ") does not equal the sum of stage totals (" +
                                    std::to_string(grand_total) + ")");

    // Base allocation: proportional to availability within the stage.
    for (auto& [stage, st] : stages) {
        std::vector<Cell*> cells;
        for (auto& c : st.cells) cells.push_back(&c);
        water_fill(cells, sources, double(st.total),
                   "stage_total(" + std::to_string(stage) + ")");
    }

    auto lang_of = [&](const Cell& c) -> const std::string& {
        return sources[c.source_index].language;
    };

    // Language floors, applied on the overall share.
    for (const auto& [lang, floor] : constraints.min_lang_share) {
        if (grand_total == 0) break;
        double current = 0.0;
        for (const auto& [stage, st] : stages)
            for (const auto& c : st.cells)
                if (lang_of(c) == lang) current += c.budget;
        const double need = floor * double(grand_total);
        double deficit = need - current;
        if (deficit <= kEps) continue;

        std::map<int, double> headroom;
        double headroom_sum = 0.0;
        for (const auto& [stage, st] : stages) {
            double cap = 0.0;
            double lang_budget = 0.0;
            for (const auto& c : st.cells) {
                if (lang_of(c) != lang) continue;
                const SourceSpec& s = sources[c.source_index];
                cap += double(s.available_tokens) * s.max_epochs;
                lang_budget += c.budget;
            }
            double h = std::min(cap - lang_budget, double(st.total) - lang_budget);
            h = std::max(0.0, h);
            headroom[stage] = h;
            headroom_sum += h;
        }
        if (headroom_sum < deficit - 0.5)
            throw InfeasiblePlanError(
                "min_lang_share(" + lang + ")",
                "floor of " + std::to_string(floor) + " needs " +
                    std::to_string(uint64_t(deficit)) + " more '" + lang +
                    "' tokens but only " + std::to_string(uint64_t(headroom_sum)) +
                    " of upsampling headroom exists");

        for (auto& [stage, st] : stages) {
            double add = deficit * headroom[stage] / headroom_sum;
            if (add <= kEps) continue;
            double lang_budget = 0.0;
            std::vector<Cell*> lang_cells;
            std::vector<Cell*> other_cells;
            for (auto& c : st.cells) {
                if (lang_of(c) == lang) {
                    lang_budget += c.budget;
                    lang_cells.push_back(&c);
                } else {
                    other_cells.push_back(&c);
                }
            }
            water_fill(lang_cells, sources, lang_budget + add,
                       "min_lang_share(" + lang + ")");
            // Scale the other languages down proportionally to restore the
            // stage total; scaling down never violates an epoch cap.
            double other_before = 0.0;
            for (Cell* c : other_cells) other_before += c->budget;
            double other_after = double(st.total) - (lang_budget + add);
            if (other_before > kEps) {
                double scale = other_after / other_before;
                for (Cell* c : other_cells) c->budget *= scale;
            }
        }
    }

    for (auto& [stage, st] : stages) round_stage(st);

    MixturePlan result;
    for (auto& [stage, st] : stages) {
        result.stage_totals[stage] = st.total;
        uint64_t check = 0;
        for (const auto& c : st.cells) {
            const SourceSpec& s = sources[c.source_index];
            uint64_t tokens = uint64_t(c.budget);
            check += tokens;
            if (tokens == 0) continue;
            result.budgets.push_back({s.name, stage, tokens,
                                      double(tokens) / double(s.available_tokens),
                                      s.language, s.kind});
        }
        if (check != st.total)
            throw std::logic_error("stage rounding mismatch");  // should be unreachable
    }

    // Shares per stage and overall.
    uint64_t total = result.total_tokens();
    std::map<std::string, uint64_t> overall_lang;
    for (const auto& [stage, st] : stages) {
        std::map<std::string, uint64_t> lang_tokens;
        for (const auto& c : st.cells)
            lang_tokens[lang_of(c)] += uint64_t(c.budget);
        for (const auto& [lang, tokens] : lang_tokens) {
            if (st.total > 0)
                result.language_shares[stage][lang] = double(tokens) / double(st.total);
            overall_lang[lang] += tokens;
        }
    }
    uint64_t ko_total = 0, ko_synth = 0;
    for (const auto& b : result.budgets) {
        if (b.language == "ko") {
            ko_total += b.tokens;
            if (b.kind == SourceKind::Synthetic) ko_synth += b.tokens;
        }
    }
    if (total > 0)
        for (const auto& [lang, tokens] : overall_lang)
            result.overall_language_shares[lang] = double(tokens) / double(total);
    result.synthetic_share_korean = ko_total ? double(ko_synth) / double(ko_total) : 0.0;
    result.feasible = true;
    return result;
}

std::vector<std::string> validate(const MixturePlan& plan,
                                  const std::vector<SourceSpec>& sources) {
    std::vector<std::string> violations;

    std::map<std::string, const SourceSpec*> by_name;
    for (const auto& s : sources) by_name[s.name] = &s;

    std::map<std::string, uint64_t> per_source_total;
    std::map<int, uint64_t> per_stage_sum;
    for (const auto& b : plan.budgets) {
        per_source_total[b.name] += b.tokens;
        per_stage_sum[b.stage] += b.tokens;
        if (!by_name.count(b.name))
            violations.push_back("budget references unknown source '" + b.name + "'");
    }

    for (const auto& [name, total] : per_source_total) {
        auto it = by_name.find(name);
        if (it == by_name.end()) continue;
        const SourceSpec& s = *it->second;
        double cap = double(s.available_tokens) * s.max_epochs;
        if (double(total) > cap + 0.5)
            violations.push_back("source '" + name + "' budget " + std::to_string(total) +
                                 " exceeds availability x max_epochs (" +
                                 std::to_string(uint64_t(cap)) + ")");
    }

    for (const auto& [stage, total] : plan.stage_totals) {
        uint64_t sum = per_stage_sum.count(stage) ? per_stage_sum.at(stage) : 0;
        if (sum != total)
            violations.push_back("stage " + std::to_string(stage) + " budgets sum to " +
                                 std::to_string(sum) + ", expected " + std::to_string(total));
    }

    for (const auto& [stage, shares] : plan.language_shares) {
        double sum = 0.0;
        for (const auto& [lang, share] : shares) sum += share;
        if (std::abs(sum - 1.0) > 1e-6)
            violations.push_back("stage " + std::to_string(stage) +
                                 " language shares sum to " + std::to_string(sum));
    }

    if (!plan.feasible) violations.push_back("plan is flagged infeasible");
    return violations;
}

void emit_manifest(const MixturePlan& plan, const std::string& path, uint64_t seed) {
    if (plan.budgets.empty()) throw std::invalid_argument("cannot emit an empty plan");
    JsonlWriter writer(path);
    std::string line;
    for (const auto& b : plan.budgets) {
        uint64_t row_seed = mix64(seed ^ hash64(b.name) ^ uint64_t(b.stage));
        line.clear();
        line += "{\"name\":";
        append_json_string(line, b.name);
        line += ",\"stage\":" + std::to_string(b.stage);
        line += ",\"tokens\":" + std::to_string(b.tokens);
        char epochs[32];
        std::snprintf(epochs, sizeof(epochs), "%.9g", b.epochs);
        line += ",\"epochs\":" + std::string(epochs);
        line += ",\"shuffle_seed\":" + std::to_string(row_seed);
        line += "}";
        writer.write_line(line);
    }
    writer.close();
}

std::vector<ManifestRow> read_manifest(const std::string& path) {
    LineReader reader(path);
    std::vector<ManifestRow> rows;
    std::string line;
    while (reader.next(line)) {
        rapidjson::Document d;
        d.ParseInsitu(line.data());
        if (d.HasParseError() || !d.IsObject())
            throw JsonlError(path, reader.line_number(), "malformed manifest row");
        ManifestRow row;
        if (!d.HasMember("name") || !d["name"].IsString())
            throw JsonlError(path, reader.line_number(), "manifest row missing 'name'");
        row.name = d["name"].GetString();
        auto require_field = [&](const char* field, auto check) {
            if (!d.HasMember(field) || !check(d[field]))
                throw JsonlError(path, reader.line_number(),
                                 std::string("manifest field '") + field + "' malformed");
        };
        if (d.HasMember("stage")) {
            require_field("stage", [](const auto& v) { return v.IsInt(); });
            row.stage = d["stage"].GetInt();
        }
        if (d.HasMember("tokens")) {
            require_field("tokens", [](const auto& v) { return v.IsUint64(); });
            row.tokens = d["tokens"].GetUint64();
        }
        if (d.HasMember("epochs")) {
            require_field("epochs", [](const auto& v) { return v.IsNumber(); });
            row.epochs = d["epochs"].GetDouble();
        }
        if (d.HasMember("shuffle_seed")) {
            require_field("shuffle_seed", [](const auto& v) { return v.IsUint64(); });
            row.shuffle_seed = d["shuffle_seed"].GetUint64();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace curator
