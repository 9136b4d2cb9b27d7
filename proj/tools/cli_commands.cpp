#include "cli_commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <random>

#include "curator/classifier.hpp"
#include "curator/dedup.hpp"
#include "curator/filters.hpp"
#include "curator/jsonl.hpp"
#include "curator/normalize.hpp"
#include "curator/quality.hpp"

namespace curator::cli {

namespace {

using nlohmann::json;

struct StageCounts {
    uint64_t docs_in = 0;
    uint64_t docs_out = 0;
    uint64_t bytes_in = 0;
    uint64_t bytes_out = 0;

    json to_json() const {
        return {{"docs_in", docs_in},
                {"docs_out", docs_out},
                {"bytes_in", bytes_in},
                {"bytes_out", bytes_out}};
    }
};

OnBadLine bad_line_policy(bool skip) { return skip ? OnBadLine::Skip : OnBadLine::Abort; }

// --- shared stage drivers (curate reuses these verbatim) -------------------

struct NormalizeStage {
    uint64_t dropped_empty = 0;
    uint64_t bad_utf8 = 0;
    bool skip_bad = false;

    std::optional<Document> process(Document&& doc) {
        try {
            auto out = normalize(std::move(doc));
            if (!out) ++dropped_empty;
            return out;
        } catch (const Utf8Error&) {
            if (!skip_bad) throw;
            ++bad_utf8;
            return std::nullopt;
        }
    }

    json to_json() const {
        return {{"dropped_empty", dropped_empty}, {"bad_utf8", bad_utf8}};
    }
};

struct FilterStage {
    explicit FilterStage(FilterPipeline p) : pipeline(std::move(p)) {}

    FilterPipeline pipeline;
    PipelineReport report;

    std::optional<Document> process(const Document& doc) {
        ++report.docs_in;
        report.bytes_in += doc.text.size();
        auto rejection = pipeline.evaluate(doc.text);
        if (rejection) {
            ++report.rejected_by_rule[std::string(rule_name(rejection->rule))];
            return std::nullopt;
        }
        ++report.docs_kept;
        report.bytes_kept += doc.text.size();
        return doc;
    }

    json to_json() const {
        json rejected = json::object();
        for (const auto& [rule, count] : report.rejected_by_rule) rejected[rule] = count;
        return {{"docs_in", report.docs_in},
                {"docs_kept", report.docs_kept},
                {"bytes_in", report.bytes_in},
                {"bytes_kept", report.bytes_kept},
                {"rejected_by_rule", rejected}};
    }
};

json dedup_report_json(const DedupReport& r) {
    return {{"docs_in", r.docs_in},
            {"docs_kept", r.docs_kept},
            {"bytes_in", r.bytes_in},
            {"bytes_kept", r.bytes_kept},
            {"tokens_in", r.tokens_in},
            {"tokens_kept", r.tokens_kept},
            {"paragraphs_removed", r.paragraphs_removed},
            {"removal_fraction", r.removal_fraction()},
            {"pass_mode", "sequential"}};
}

// Options shared between `filter` and `curate`.
struct FilterFlags {
    FilterConfig cfg;
    std::vector<std::string> rule_names;

    void attach(CLI::App* cmd) {
        cmd->add_option("--min-words", cfg.min_words, "Minimum word count")
            ->capture_default_str();
        cmd->add_option("--max-words", cfg.max_words, "Maximum word count")
            ->capture_default_str();
        cmd->add_option("--non-alpha-word-ratio-max", cfg.non_alpha_word_ratio_max,
                        "Reject above this non-alphabetic word fraction")
            ->capture_default_str();
        cmd->add_option("--alnum-char-ratio-min", cfg.alnum_char_ratio_min,
                        "Reject below this letter+digit character fraction")
            ->capture_default_str();
        cmd->add_option("--symbol-ratio-max", cfg.symbol_ratio_max,
                        "Reject above this symbol-per-word fraction")
            ->capture_default_str();
        cmd->add_option("--ngram-repetition-max", cfg.ngram_repetition_max,
                        "Reject above this duplicated n-gram character fraction")
            ->capture_default_str();
        cmd->add_option("--ellipsis-line-ratio-max", cfg.ellipsis_line_ratio_max,
                        "Reject above this fraction of ellipsis-terminated lines")
            ->capture_default_str();
        cmd->add_option("--bullet-line-ratio-max", cfg.bullet_line_ratio_max,
                        "Reject above this fraction of bullet-led lines")
            ->capture_default_str();
        cmd->add_flag_callback(
            "--repetition-by-ngram-fraction",
            [this] {
                cfg.repetition_metric =
                    FilterConfig::RepetitionMetric::DuplicateNgramFraction;
            },
            "Score repetition as duplicated n-grams over total n-grams");
        cmd->add_option("--rules", rule_names,
                        "Rule order (comma-separated names; default all)")
            ->delimiter(',');
    }

    FilterPipeline build() const {
        std::vector<Rule> order;
        if (rule_names.empty()) {
            order = default_rule_order();
        } else {
            for (const auto& name : rule_names) {
                auto rule = rule_from_name(name);
                if (!rule) throw UsageError("unknown filter rule: " + name);
                order.push_back(*rule);
            }
        }
        return FilterPipeline(cfg, order);
    }

    json to_json() const {
        json rules = json::array();
        for (const auto& name : rule_names) rules.push_back(name);
        return {{"min_words", cfg.min_words},
                {"max_words", cfg.max_words},
                {"non_alpha_word_ratio_max", cfg.non_alpha_word_ratio_max},
                {"alnum_char_ratio_min", cfg.alnum_char_ratio_min},
                {"symbol_ratio_max", cfg.symbol_ratio_max},
                {"ngram_repetition_max", cfg.ngram_repetition_max},
                {"ellipsis_line_ratio_max", cfg.ellipsis_line_ratio_max},
                {"bullet_line_ratio_max", cfg.bullet_line_ratio_max},
                {"rules", rules}};
    }
};

struct DedupFlags {
    DedupConfig cfg;
    std::string mode_name = "document";
    std::string load_filter;
    std::string save_filter;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mode", mode_name, "Dedup mode: document or old-both")
            ->check(CLI::IsMember({"document", "old-both"}))
            ->capture_default_str();
        cmd->add_option("--ngram-words", cfg.ngram_words,
                        "Words per n-gram (0 = whole-unit hashing)")
            ->capture_default_str();
        cmd->add_option("--containment-threshold", cfg.containment_threshold,
                        "Drop units at or above this containment")
            ->capture_default_str();
        cmd->add_option("--expected-items", cfg.expected_items,
                        "Expected insertions for Bloom sizing")
            ->capture_default_str();
        cmd->add_option("--target-fpr", cfg.target_fpr, "Bloom false-positive target")
            ->capture_default_str();
        cmd->add_option("--dedup-seed", cfg.seed, "Hash seed")->capture_default_str();
        cmd->add_option("--load-filter", load_filter, "Resume from a saved Bloom filter");
        cmd->add_option("--save-filter", save_filter, "Write the Bloom filter state here");
    }

    DedupConfig build() const {
        DedupConfig out = cfg;
        out.mode = *dedup_mode_from_name(mode_name);
        return out;
    }

    json to_json() const {
        return {{"mode", mode_name},
                {"ngram_words", cfg.ngram_words},
                {"containment_threshold", cfg.containment_threshold},
                {"expected_items", cfg.expected_items},
                {"target_fpr", cfg.target_fpr},
                {"seed", cfg.seed}};
    }
};

struct NormalizeArgs {
    std::string input, output;
    bool skip_bad = false;
};

void register_normalize(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<NormalizeArgs>();
    auto* cmd = app.add_subcommand("normalize",
                                   "Whitespace-normalize documents, dropping empty ones");
    cmd->add_option("-i,--input", opts->input, "Input JSONL ('-' = stdin)")->required();
    cmd->add_option("-o,--output", opts->output, "Output JSONL ('-' = stdout)")->required();
    cmd->add_flag("--skip-bad", opts->skip_bad,
                  "Skip malformed or non-UTF-8 records instead of aborting");

    cmd->callback([&global, opts] {
        require_input(opts->input);
        JsonlReader reader(opts->input, bad_line_policy(opts->skip_bad));
        JsonlWriter writer(opts->output);
        NormalizeStage stage;
        stage.skip_bad = opts->skip_bad;
        StageCounts counts;
        while (auto doc = reader.next()) {
            ++counts.docs_in;
            counts.bytes_in += doc->text.size();
            if (auto out = stage.process(std::move(*doc))) {
                ++counts.docs_out;
                counts.bytes_out += out->text.size();
                writer.write(*out);
            }
        }
        writer.close();
        json c = counts.to_json();
        c.update(stage.to_json());
        c["bad_lines_skipped"] = reader.skipped();
        append_report(global, "normalize",
                      {{"input", opts->input}, {"skip_bad", opts->skip_bad}}, c);
    });
}

struct FilterArgs {
    std::string input, output;
    FilterFlags flags;
};

void register_filter(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<FilterArgs>();
    auto* cmd = app.add_subcommand("filter", "Apply the rule-based heuristic filters");
    cmd->add_option("-i,--input", opts->input, "Normalized input JSONL")->required();
    cmd->add_option("-o,--output", opts->output, "Output JSONL")->required();
    opts->flags.attach(cmd);

    cmd->callback([&global, opts] {
        require_input(opts->input);
        FilterStage stage(opts->flags.build());
        JsonlReader reader(opts->input);
        JsonlWriter writer(opts->output);
        while (auto doc = reader.next()) {
            if (auto out = stage.process(*doc)) writer.write(*out);
        }
        writer.close();
        append_report(global, "filter", opts->flags.to_json(), stage.to_json());
    });
}

struct DedupArgs {
    std::vector<std::string> inputs;
    std::string output;
    std::string output_dir;
    DedupFlags flags;
};

void register_dedup(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<DedupArgs>();
    auto* cmd = app.add_subcommand(
        "dedup", "Bloom-filter dedup; multiple inputs cross-dedup in priority order");
    cmd->add_option("-i,--input", opts->inputs, "Input JSONL (repeatable, priority order)")
        ->required();
    cmd->add_option("-o,--output", opts->output, "Output JSONL (single input only)");
    cmd->add_option("--output-dir", opts->output_dir,
                    "Output directory (per-corpus files, multi-input)");
    opts->flags.attach(cmd);

    cmd->callback([&global, opts] {
        require_inputs(opts->inputs);
        const bool multi = opts->inputs.size() > 1;
        if (multi && opts->output_dir.empty())
            throw UsageError("--output-dir is required with multiple inputs");
        if (!multi && opts->output.empty() && opts->output_dir.empty())
            throw UsageError("--output or --output-dir is required");

        DedupConfig cfg = opts->flags.build();
        std::unique_ptr<Deduper> deduper;
        if (!opts->flags.load_filter.empty())
            deduper =
                std::make_unique<Deduper>(cfg, BloomFilter::load(opts->flags.load_filter));
        else
            deduper = std::make_unique<Deduper>(cfg);

        json per_corpus = json::array();
        for (const auto& input : opts->inputs) {
            std::string out_path = opts->output;
            if (out_path.empty()) {
                auto name = std::filesystem::path(input).filename().string();
                if (name == "-") name = "stdin.jsonl";
                out_path = (std::filesystem::path(opts->output_dir) / name).string();
            }
            deduper->reset_report();
            JsonlReader reader(input);
            JsonlWriter writer(out_path);
            while (auto doc = reader.next()) {
                if (auto kept = deduper->process(*doc)) writer.write(*kept);
            }
            writer.close();
            json entry = dedup_report_json(deduper->report());
            entry["corpus"] = input;
            per_corpus.push_back(std::move(entry));
        }
        if (!opts->flags.save_filter.empty()) deduper->filter().save(opts->flags.save_filter);

        append_report(global, "dedup", opts->flags.to_json(), {{"corpora", per_corpus}});
    });
}

struct LangGateArgs {
    std::string input, output;
    LangGateConfig cfg;
    bool no_fallback = false;
    bool skip_bad = false;
};

void register_lang_gate(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<LangGateArgs>();
    auto* cmd = app.add_subcommand("lang-gate",
                                   "Keep documents whose language probability clears the bar");
    cmd->add_option("-i,--input", opts->input, "Input JSONL")->required();
    cmd->add_option("-o,--output", opts->output, "Output JSONL")->required();
    cmd->add_option("--lang", opts->cfg.target_lang, "Target language code")
        ->capture_default_str();
    cmd->add_option("--threshold", opts->cfg.threshold, "Probability threshold")
        ->capture_default_str();
    cmd->add_option("--scores-field", opts->cfg.scores_field,
                    "Meta key holding the probability (default p_<lang>)");
    cmd->add_flag("--no-fallback", opts->no_fallback,
                  "Disable the Hangul-fraction fallback probability");
    cmd->add_flag("--skip-bad", opts->skip_bad, "Skip records lacking a probability");

    cmd->callback([&global, opts] {
        require_input(opts->input);
        LangGateConfig cfg = opts->cfg;
        cfg.hangul_fallback = !opts->no_fallback;
        JsonlReader reader(opts->input);
        JsonlWriter writer(opts->output);
        StageCounts counts;
        uint64_t skipped = 0;
        while (auto doc = reader.next()) {
            ++counts.docs_in;
            counts.bytes_in += doc->text.size();
            bool keep;
            try {
                keep = lang_gate_keep(*doc, cfg);
            } catch (const AnnotationError&) {
                if (!opts->skip_bad) throw;
                ++skipped;
                continue;
            }
            if (keep) {
                ++counts.docs_out;
                counts.bytes_out += doc->text.size();
                writer.write(*doc);
            }
        }
        writer.close();
        json c = counts.to_json();
        c["records_skipped"] = skipped;
        append_report(global, "lang-gate",
                      {{"lang", cfg.target_lang},
                       {"threshold", cfg.threshold},
                       {"field", cfg.field_name()},
                       {"fallback", cfg.hangul_fallback}},
                      c);
    });
}

struct QualityTrainArgs {
    std::vector<std::string> positives, negatives;
    std::string annotations;
    int pos_min_score = 3;
    int neg_max_score = 0;
    std::string model_out;
    TrainOptions train;
};

void register_quality_train(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<QualityTrainArgs>();
    auto* cmd = app.add_subcommand("quality-train", "Train the linear quality classifier");
    cmd->add_option("--positives", opts->positives, "Positive-class JSONL (repeatable)");
    cmd->add_option("--negatives", opts->negatives, "Negative-class JSONL (repeatable)");
    cmd->add_option("--annotations", opts->annotations,
                    "Scored {id,text,score} JSONL to split into classes");
    cmd->add_option("--pos-min-score", opts->pos_min_score,
                    "Annotation scores at or above this are positives")
        ->capture_default_str();
    cmd->add_option("--neg-max-score", opts->neg_max_score,
                    "Annotation scores at or below this are negatives")
        ->capture_default_str();
    cmd->add_option("--model-out", opts->model_out, "Model file to write")->required();
    cmd->add_option("--buckets", opts->train.bucket_count, "Hashed feature buckets")
        ->capture_default_str();
    cmd->add_option("--dim", opts->train.dim, "Embedding width")->capture_default_str();
    cmd->add_option("--epochs", opts->train.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--lr", opts->train.learning_rate, "Initial learning rate")
        ->capture_default_str();
    cmd->add_option("--ngram-max", opts->train.ngram_max, "Highest word n-gram order")
        ->capture_default_str();
    cmd->add_option("--train-seed", opts->train.seed, "Training seed")->capture_default_str();

    cmd->callback([&global, opts] {
        require_inputs(opts->positives);
        require_inputs(opts->negatives);

        std::vector<std::string> pos, neg;
        auto slurp = [](const std::vector<std::string>& paths, std::vector<std::string>& out) {
            for (const auto& path : paths) {
                JsonlReader reader(path);
                while (auto doc = reader.next()) out.push_back(std::move(doc->text));
            }
        };
        slurp(opts->positives, pos);
        slurp(opts->negatives, neg);
        if (!opts->annotations.empty()) {
            require_input(opts->annotations);
            auto annotated = annotation_ingest(opts->annotations);
            auto [apos, aneg] =
                split_by_score(annotated, opts->pos_min_score, opts->neg_max_score);
            pos.insert(pos.end(), apos.begin(), apos.end());
            neg.insert(neg.end(), aneg.begin(), aneg.end());
        }
        if (pos.empty() || neg.empty())
            throw UsageError("both classes need at least one document");

        if (global.seed != 0) opts->train.seed = global.seed;
        TrainStats train_stats;
        auto model = LinearTextClassifier::train(pos, neg, opts->train, &train_stats);
        model.save(opts->model_out);

        append_report(global, "quality-train",
                      {{"buckets", opts->train.bucket_count},
                       {"dim", opts->train.dim},
                       {"epochs", opts->train.epochs},
                       {"lr", opts->train.learning_rate},
                       {"seed", opts->train.seed}},
                      {{"positives", pos.size()},
                       {"negatives", neg.size()},
                       {"initial_loss", train_stats.initial_loss},
                       {"final_loss", train_stats.final_loss}});
    });
}

struct QualityScoreArgs {
    std::string input, output, model;
};

void register_quality_score(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<QualityScoreArgs>();
    auto* cmd = app.add_subcommand("quality-score", "Annotate documents with P(high quality)");
    cmd->add_option("-i,--input", opts->input, "Input JSONL")->required();
    cmd->add_option("-o,--output", opts->output, "Output JSONL")->required();
    cmd->add_option("--model", opts->model, "Classifier model file")->required();

    cmd->callback([&global, opts] {
        require_input(opts->input);
        require_input(opts->model);
        auto model = LinearTextClassifier::load(opts->model);
        JsonlReader reader(opts->input);
        JsonlWriter writer(opts->output);
        StageCounts counts;
        while (auto doc = reader.next()) {
            ++counts.docs_in;
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6f", model.score(doc->text));
            doc->meta["quality_score"] = buf;
            writer.write(*doc);
            ++counts.docs_out;
        }
        writer.close();
        append_report(global, "quality-score", {{"model", opts->model}}, counts.to_json());
    });
}

json quality_report_json(const QualityReport& r) {
    json hist = json::array();
    for (uint64_t c : r.score_histogram) hist.push_back(c);
    return {{"docs_in", r.docs_in}, {"docs_kept", r.docs_kept}, {"score_histogram", hist}};
}

struct QualityFilterArgs {
    std::string input, output, model;
    double min_score = -1.0;
    double keep_fraction = -1.0;
};

void register_quality_filter(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<QualityFilterArgs>();
    auto* cmd = app.add_subcommand("quality-filter",
                                   "Keep documents by score threshold or top fraction");
    cmd->add_option("-i,--input", opts->input, "Input JSONL")->required();
    cmd->add_option("-o,--output", opts->output, "Output JSONL")->required();
    cmd->add_option("--model", opts->model, "Classifier model file")->required();
    cmd->add_option("--min-score", opts->min_score, "Keep scores at or above this");
    cmd->add_option("--keep-fraction", opts->keep_fraction,
                    "Keep the top-scoring fraction of documents");

    cmd->callback([&global, opts] {
        require_input(opts->input);
        require_input(opts->model);
        QualityPolicy policy;
        if (opts->min_score >= 0.0) policy.min_score = opts->min_score;
        if (opts->keep_fraction >= 0.0) policy.keep_fraction = opts->keep_fraction;
        if (policy.min_score.has_value() == policy.keep_fraction.has_value())
            throw UsageError("set exactly one of --min-score / --keep-fraction");

        auto model = LinearTextClassifier::load(opts->model);
        JsonlReader reader(opts->input);
        std::vector<Document> docs;
        while (auto doc = reader.next()) docs.push_back(std::move(*doc));

        auto [kept, report] = quality_filter(docs, model, policy);
        JsonlWriter writer(opts->output);
        for (const auto& doc : kept) writer.write(doc);
        writer.close();

        append_report(global, "quality-filter",
                      {{"model", opts->model},
                       {"min_score", opts->min_score},
                       {"keep_fraction", opts->keep_fraction}},
                      quality_report_json(report));
    });
}

struct CurateArgs {
    std::string input, output, model;
    FilterFlags filter_flags;
    DedupFlags dedup_flags;
    double min_score = -1.0;
    double keep_fraction = -1.0;
    bool skip_bad = false;
};

void register_curate(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<CurateArgs>();
    auto* cmd = app.add_subcommand(
        "curate", "normalize -> filter -> dedup [-> quality-filter] in one pass");
    cmd->add_option("-i,--input", opts->input, "Input JSONL")->required();
    cmd->add_option("-o,--output", opts->output, "Output JSONL")->required();
    cmd->add_option("--model", opts->model,
                    "Quality classifier; omitting it skips the quality stage");
    cmd->add_option("--min-score", opts->min_score, "Quality threshold policy");
    cmd->add_option("--keep-fraction", opts->keep_fraction, "Quality top-fraction policy");
    cmd->add_flag("--skip-bad", opts->skip_bad, "Skip malformed records");
    opts->filter_flags.attach(cmd);
    opts->dedup_flags.attach(cmd);

    cmd->callback([&global, opts] {
        require_input(opts->input);
        QualityPolicy policy;
        if (opts->min_score >= 0.0) policy.min_score = opts->min_score;
        if (opts->keep_fraction >= 0.0) policy.keep_fraction = opts->keep_fraction;
        std::unique_ptr<LinearTextClassifier> model;
        if (!opts->model.empty()) {
            require_input(opts->model);
            if (policy.min_score.has_value() == policy.keep_fraction.has_value())
                throw UsageError("set exactly one of --min-score / --keep-fraction");
            model = std::make_unique<LinearTextClassifier>(
                LinearTextClassifier::load(opts->model));
        }

        NormalizeStage normalize_stage;
        normalize_stage.skip_bad = opts->skip_bad;
        FilterStage filter_stage(opts->filter_flags.build());
        Deduper deduper(opts->dedup_flags.build());

        JsonlReader reader(opts->input, bad_line_policy(opts->skip_bad));
        std::vector<Document> survivors;
        StageCounts counts;
        while (auto doc = reader.next()) {
            ++counts.docs_in;
            counts.bytes_in += doc->text.size();
            auto normalized = normalize_stage.process(std::move(*doc));
            if (!normalized) continue;
            auto filtered = filter_stage.process(*normalized);
            if (!filtered) continue;
            auto deduped = deduper.process(*filtered);
            if (!deduped) continue;
            survivors.push_back(std::move(*deduped));
        }

        json quality_json;
        if (model) {
            auto [kept, report] = quality_filter(survivors, *model, policy);
            survivors = std::move(kept);
            quality_json = quality_report_json(report);
        }

        JsonlWriter writer(opts->output);
        for (const auto& doc : survivors) {
            ++counts.docs_out;
            counts.bytes_out += doc.text.size();
            writer.write(doc);
        }
        writer.close();

        json stage_counts = counts.to_json();
        stage_counts["normalize"] = normalize_stage.to_json();
        stage_counts["filter"] = filter_stage.to_json();
        stage_counts["dedup"] = dedup_report_json(deduper.report());
        if (!quality_json.is_null()) stage_counts["quality"] = quality_json;

        json config = {{"filter", opts->filter_flags.to_json()},
                       {"dedup", opts->dedup_flags.to_json()},
                       {"model", opts->model}};
        append_report(global, "curate", config, stage_counts);
    });
}

struct StatsArgs {
    std::string input;
};

void register_stats(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<StatsArgs>();
    auto* cmd = app.add_subcommand("stats", "Aggregate corpus statistics");
    cmd->add_option("-i,--input", opts->input, "Input JSONL")->required();

    cmd->callback([&global, opts] {
        require_input(opts->input);
        JsonlReader reader(opts->input);
        uint64_t docs = 0, bytes = 0, chars = 0, words = 0, lines = 0;
        while (auto doc = reader.next()) {
            TextStats st = stats(doc->text);
            ++docs;
            bytes += st.byte_count;
            chars += st.char_count;
            words += st.word_count;
            lines += st.line_count;
        }
        json out = {{"docs", docs},
                    {"bytes", bytes},
                    {"chars", chars},
                    {"words", words},
                    {"lines", lines}};
        std::printf("%s\n", out.dump(2).c_str());
        append_report(global, "stats", {{"input", opts->input}}, out);
    });
}

struct BenchArgs {
    std::string input;
    uint64_t size_mb = 64;
};

void register_bench(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<BenchArgs>();
    auto* cmd = app.add_subcommand(
        "bench", "Measure heuristic-filter pipeline throughput on JSONL input");
    cmd->add_option("-i,--input", opts->input,
                    "Existing JSONL corpus (default: generate ASCII synthetically)");
    cmd->add_option("--size-mb", opts->size_mb, "Size of the generated corpus")
        ->capture_default_str();

    cmd->callback([&global, opts] {
        namespace fs = std::filesystem;
        std::string path = opts->input;
        fs::path generated;
        if (path.empty()) {
            generated = fs::temp_directory_path() / "curator_bench.jsonl";
            path = generated.string();
            std::mt19937_64 rng(4242);
            static const char* kWords[] = {"the",  "data",  "filter", "corpus", "model",
                                           "web",  "clean", "train",  "token",  "text",
                                           "page", "line",  "batch",  "byte",   "word"};
            JsonlWriter writer(path);
            Document doc;
            uint64_t target = opts->size_mb * 1024 * 1024;
            uint64_t id = 0;
            while (writer.bytes_written() < target) {
                doc.id = "bench-" + std::to_string(id++);
                doc.text.clear();
                size_t word_count = 64 + rng() % 448;
                for (size_t w = 0; w < word_count; ++w) {
                    if (w) doc.text.push_back(w % 13 == 0 ? '\n' : ' ');
                    doc.text += kWords[rng() % 15];
                }
                writer.write(doc);
            }
            writer.close();
        } else {
            require_input(path);
        }

        const uint64_t input_bytes = fs::file_size(path);
        FilterPipeline pipeline{FilterConfig{}};
        NormalizeStage normalize_stage;

        auto start = std::chrono::steady_clock::now();
        JsonlReader reader(path);
        uint64_t docs = 0, kept = 0;
        while (auto doc = reader.next()) {
            ++docs;
            auto normalized = normalize_stage.process(std::move(*doc));
            if (!normalized) continue;
            if (!pipeline.evaluate(normalized->text)) ++kept;
        }
        auto elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        double mb_per_s = double(input_bytes) / (1024.0 * 1024.0) / elapsed;
        std::printf("bytes=%llu docs=%llu kept=%llu seconds=%.3f mb_per_s=%.1f\n",
                    (unsigned long long)input_bytes, (unsigned long long)docs,
                    (unsigned long long)kept, elapsed, mb_per_s);

        append_report(global, "bench", {{"size_mb", opts->size_mb}},
                      {{"bytes", input_bytes},
                       {"docs", docs},
                       {"seconds", elapsed},
                       {"mb_per_s", mb_per_s}});
        if (!generated.empty()) fs::remove(generated);
    });
}

}  // namespace

void register_pipeline_commands(CLI::App& app, GlobalOptions& global) {
    register_normalize(app, global);
    register_filter(app, global);
    register_dedup(app, global);
    register_lang_gate(app, global);
    register_quality_train(app, global);
    register_quality_score(app, global);
    register_quality_filter(app, global);
    register_curate(app, global);
    register_stats(app, global);
    register_bench(app, global);
}

}  // namespace curator::cli
