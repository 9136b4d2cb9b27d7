#include <doctest.h>

#include <filesystem>

#include "curator/mixture.hpp"

using namespace curator;

namespace {

constexpr uint64_t B = 1'000'000'000ULL;  // one billion tokens

std::vector<SourceSpec> stage1_sources() {
    return {
        {"dclm", "en", SourceKind::Web, 960 * B, 1, 1.0},
        {"korean-web", "ko", SourceKind::Web, uint64_t(36.3 * double(B)), 1, 4.0},
        {"korean-cc", "ko", SourceKind::Web, uint64_t(6.2 * double(B)), 1, 4.0},
    };
}

std::vector<SourceSpec> two_stage_sources() {
    auto sources = stage1_sources();
    sources.push_back({"en-hq", "en", SourceKind::Web, 1700 * B, 2, 1.0});
    sources.push_back({"ko-hq", "ko", SourceKind::Synthetic, 100 * B, 2, 4.0});
    return sources;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("natural stage-1 proportions give the documented totals and shares") {
    auto result = plan(stage1_sources(), PlanConstraints{});
    CHECK(result.stage_totals.at(1) == uint64_t(1002.5 * double(B)));

    double ko_share = result.language_shares.at(1).at("ko");
    CHECK(ko_share * 100.0 == doctest::Approx(4.24).epsilon(0.002));

    // natural allocation reproduces the availabilities exactly
    for (const auto& b : result.budgets) {
        if (b.name == "dclm") CHECK(b.tokens == 960 * B);
        CHECK(b.epochs == doctest::Approx(1.0));
    }
}

TEST_CASE("adding stage 2 yields an overall Korean share of 5.08%") {
    auto result = plan(two_stage_sources(), PlanConstraints{});
    CHECK(result.total_tokens() == uint64_t(2802.5 * double(B)));
    double ko = result.overall_language_shares.at("ko");
    CHECK(ko * 100.0 == doctest::Approx(5.08).epsilon(0.002));
    CHECK(ko >= 0.05);

    // the Korean synthetic share is reported, not constrained
    CHECK(result.synthetic_share_korean ==
          doctest::Approx(100.0 * double(B) / (142.5 * double(B))));
}

TEST_CASE("an unreachable language floor raises an infeasibility error") {
    std::vector<SourceSpec> sources = {
        {"big-en", "en", SourceKind::Web, 950, 1, 1.0},
        {"small-ko", "ko", SourceKind::Web, 50, 1, 1.0},
    };
    PlanConstraints constraints;
    constraints.min_lang_share["ko"] = 0.5;
    try {
        plan(sources, constraints);
        FAIL("expected InfeasiblePlanError");
    } catch (const InfeasiblePlanError& e) {
        CHECK(e.binding_constraint() == "min_lang_share(ko)");
    }
}

TEST_CASE("feasible language floors are met via upsampling") {
    std::vector<SourceSpec> sources = {
        {"en", "en", SourceKind::Web, 900, 1, 1.0},
        {"ko", "ko", SourceKind::Web, 100, 1, 4.0},
    };
    PlanConstraints constraints;
    constraints.stage_totals[1] = 1000;
    constraints.min_lang_share["ko"] = 0.2;
    auto result = plan(sources, constraints);
    CHECK(result.overall_language_shares.at("ko") == doctest::Approx(0.2).epsilon(1e-6));
    CHECK(result.stage_totals.at(1) == 1000);
    uint64_t total = 0;
    for (const auto& b : result.budgets) total += b.tokens;
    CHECK(total == 1000);
    CHECK(validate(result, sources).empty());
}

TEST_CASE("raising the floor never lowers the language share") {
    std::vector<SourceSpec> sources = {
        {"en", "en", SourceKind::Web, 900, 1, 1.0},
        {"ko", "ko", SourceKind::Web, 100, 1, 8.0},
    };
    PlanConstraints constraints;
    constraints.stage_totals[1] = 1000;
    double prev = 0.0;
    for (double floor : {0.0, 0.1, 0.2, 0.4, 0.6}) {
        constraints.min_lang_share.clear();
        if (floor > 0.0) constraints.min_lang_share["ko"] = floor;
        auto result = plan(sources, constraints);
        double share = result.overall_language_shares.at("ko");
        CHECK(share >= prev - 1e-9);
        CHECK(share >= floor - 1e-9);
        prev = share;
    }
}

TEST_CASE("scaling availabilities leaves the planned shares unchanged") {
    auto base = plan(two_stage_sources(), PlanConstraints{});
    auto scaled_sources = two_stage_sources();
    for (auto& s : scaled_sources) s.available_tokens *= 7;
    auto scaled = plan(scaled_sources, PlanConstraints{});
    for (const auto& [lang, share] : base.overall_language_shares)
        CHECK(scaled.overall_language_shares.at(lang) == doctest::Approx(share).epsilon(1e-12));
}

TEST_CASE("stage sums are exact under largest-remainder rounding") {
    std::vector<SourceSpec> sources = {
        {"a", "en", SourceKind::Web, 1, 1, 101.0},
        {"b", "en", SourceKind::Web, 1, 1, 101.0},
        {"c", "en", SourceKind::Web, 1, 1, 101.0},
    };
    PlanConstraints constraints;
    constraints.stage_totals[1] = 101;
    auto result = plan(sources, constraints);
    uint64_t total = 0;
    for (const auto& b : result.budgets) total += b.tokens;
    CHECK(total == 101);
    CHECK(result.stage_totals.at(1) == 101);
}

TEST_CASE("plans produced by plan() always pass validate()") {
    auto sources = two_stage_sources();
    PlanConstraints constraints;
    constraints.min_lang_share["ko"] = 0.05;
    auto result = plan(sources, constraints);
    CHECK(validate(result, sources).empty());
}

TEST_CASE("validate flags budgets over the epoch cap and bad shares") {
    auto sources = stage1_sources();
    auto result = plan(sources, PlanConstraints{});

    auto corrupted = result;
    for (auto& b : corrupted.budgets)
        if (b.name == "dclm") b.tokens = 2000 * B;  // above availability x 1.0
    auto violations = validate(corrupted, sources);
    CHECK(violations.size() >= 1);

    auto bad_shares = result;
    bad_shares.language_shares[1]["en"] = 0.5;
    bad_shares.language_shares[1]["ko"] = 0.1;
    CHECK(!validate(bad_shares, sources).empty());
}

TEST_CASE("total_tokens constraint must match the stage sums") {
    auto sources = stage1_sources();
    PlanConstraints constraints;
    constraints.total_tokens = 12345;
    CHECK_THROWS_AS(plan(sources, constraints), std::invalid_argument);
}

TEST_CASE("manifest rows round trip") {
    auto result = plan(two_stage_sources(), PlanConstraints{});
    std::string path = temp_path("curator_manifest.jsonl");
    emit_manifest(result, path, 42);
    auto rows = read_manifest(path);
    REQUIRE(rows.size() == result.budgets.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].name == result.budgets[i].name);
        CHECK(rows[i].stage == result.budgets[i].stage);
        CHECK(rows[i].tokens == result.budgets[i].tokens);
        CHECK(rows[i].epochs == doctest::Approx(result.budgets[i].epochs));
    }

    // same seed, same manifest; emitting twice is byte-stable
    emit_manifest(result, path, 42);
    auto rows2 = read_manifest(path);
    CHECK(rows2 == rows);

    MixturePlan empty;
    CHECK_THROWS_AS(emit_manifest(empty, path, 1), std::invalid_argument);
}

TEST_CASE("source specs are validated") {
    CHECK_THROWS_AS(plan({}, PlanConstraints{}), std::invalid_argument);
    CHECK_THROWS_AS(plan({{"x", "en", SourceKind::Web, 0, 1, 1.0}}, PlanConstraints{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(plan({{"x", "en", SourceKind::Web, 10, 1, 0.5}}, PlanConstraints{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(plan({{"x", "en", SourceKind::Web, 10, 7, 1.0}}, PlanConstraints{}),
                    std::invalid_argument);
}
