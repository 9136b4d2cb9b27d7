#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include <rapidjson/document.h>

#include "cli_commands.hpp"
#include "curator/bpe.hpp"
#include "curator/jsonl.hpp"
#include "curator/mixture.hpp"
#include "curator/packer.hpp"
#include "curator/sft.hpp"
#include "curator/sieve.hpp"

namespace curator::cli {

namespace {

using nlohmann::json;

std::vector<std::string> read_texts(const std::vector<std::string>& paths) {
    std::vector<std::string> texts;
    for (const auto& path : paths) {
        JsonlReader reader(path);
        while (auto doc = reader.next()) texts.push_back(std::move(doc->text));
    }
    return texts;
}

// "name=path" pairs for eval sets and sweep sources.
std::map<std::string, std::vector<std::string>> read_named_sets(
    const std::vector<std::string>& specs) {
    std::map<std::string, std::vector<std::string>> sets;
    for (const auto& spec : specs) {
        size_t eq = spec.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("expected name=path, got: " + spec);
        std::string name = spec.substr(0, eq);
        std::string path = spec.substr(eq + 1);
        require_input(path);
        auto texts = read_texts({path});
        auto& slot = sets[name];
        slot.insert(slot.end(), std::make_move_iterator(texts.begin()),
                    std::make_move_iterator(texts.end()));
    }
    return sets;
}

struct TokTrainArgs {
    std::vector<std::string> inputs;
    std::string model_out;
    size_t vocab = 0;
    std::vector<std::string> specials;
    bool pre_split = false;
};

void register_tok_train(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<TokTrainArgs>();
    auto* cmd = app.add_subcommand("tok-train", "Train a byte-level BPE tokenizer");
    cmd->add_option("-i,--input", opts->inputs, "Training JSONL (repeatable)")->required();
    cmd->add_option("--vocab", opts->vocab, "Target vocabulary size (>= 256)")->required();
    cmd->add_option("--model-out", opts->model_out, "Model file to write")->required();
    cmd->add_option("--special", opts->specials, "Special token (repeatable)");
    cmd->add_flag("--pre-split", opts->pre_split,
                  "Keep merges within whitespace/non-whitespace runs");

    cmd->callback([&global, opts] {
        require_inputs(opts->inputs);
        BpeTrainOptions train;
        train.target_vocab = opts->vocab;
        train.special_tokens = opts->specials;
        train.pre_split = opts->pre_split;
        auto corpus = read_texts(opts->inputs);
        auto model = bpe_train(corpus, train);
        model.save(opts->model_out);
        append_report(global, "tok-train",
                      {{"vocab", opts->vocab},
                       {"pre_split", opts->pre_split},
                       {"specials", opts->specials}},
                      {{"docs", corpus.size()},
                       {"merges", model.merges().size()},
                       {"vocab_size", model.vocab_size()}});
    });
}

struct TokEncodeArgs {
    std::string input, output, model;
};

void register_tok_encode(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<TokEncodeArgs>();
    auto* cmd = app.add_subcommand("tok-encode",
                                   "Encode documents to token ids ({id, ids, reasoning})");
    cmd->add_option("-i,--input", opts->input, "Input JSONL")->required();
    cmd->add_option("-o,--output", opts->output, "Output JSONL of token ids")->required();
    cmd->add_option("--model", opts->model, "Tokenizer model file")->required();

    cmd->callback([&global, opts] {
        require_input(opts->input);
        require_input(opts->model);
        auto model = BpeModel::load(opts->model);
        JsonlReader reader(opts->input);
        JsonlWriter writer(opts->output);
        uint64_t docs = 0, tokens = 0, bytes = 0;
        std::vector<uint32_t> ids;
        std::string line;
        while (auto doc = reader.next()) {
            ids.clear();
            model.encode_into(doc->text, ids);
            ++docs;
            tokens += ids.size();
            bytes += doc->text.size();
            line.clear();
            line += "{\"id\":";
            append_json_string(line, doc->id);
            line += ",\"ids\":[";
            for (size_t i = 0; i < ids.size(); ++i) {
                if (i) line.push_back(',');
                line += std::to_string(ids[i]);
            }
            line += "]";
            auto reasoning = doc->meta.find("reasoning");
            if (reasoning != doc->meta.end() &&
                (reasoning->second == "true" || reasoning->second == "1"))
                line += ",\"reasoning\":true";
            line += "}";
            writer.write_line(line);
        }
        writer.close();
        append_report(global, "tok-encode", {{"model", opts->model}},
                      {{"docs", docs}, {"tokens", tokens}, {"bytes", bytes}});
    });
}

struct BptEvalArgs {
    std::string model;
    std::vector<std::string> eval_specs;
    std::string csv_out;
};

void register_bpt_eval(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<BptEvalArgs>();
    auto* cmd = app.add_subcommand("bpt-eval", "Bytes-per-token over per-domain eval sets");
    cmd->add_option("--model", opts->model, "Tokenizer model file")->required();
    cmd->add_option("--eval", opts->eval_specs, "Eval set as name=path (repeatable)")
        ->required();
    cmd->add_option("--csv", opts->csv_out, "Also write rows as CSV");

    cmd->callback([&global, opts] {
        require_input(opts->model);
        auto model = BpeModel::load(opts->model);
        auto report = bpt_eval(model, read_named_sets(opts->eval_specs));

        json domains = json::object();
        for (const auto& [domain, acc] : report.per_domain) {
            domains[domain] = {{"bytes", acc.bytes}, {"tokens", acc.tokens},
                               {"bpt", acc.bpt()}};
            std::printf("%-16s bytes=%llu tokens=%llu bpt=%.4f\n", domain.c_str(),
                        (unsigned long long)acc.bytes, (unsigned long long)acc.tokens,
                        acc.bpt());
        }
        std::printf("%-16s bytes=%llu tokens=%llu bpt=%.4f\n", "overall",
                    (unsigned long long)report.overall.bytes,
                    (unsigned long long)report.overall.tokens, report.overall.bpt());
        for (const auto& warning : report.warnings)
            std::fprintf(stderr, "warning: %s\n", warning.c_str());

        if (!opts->csv_out.empty()) {
            std::ofstream csv(opts->csv_out);
            csv << "domain,bytes,tokens,bpt\n";
            for (const auto& [domain, acc] : report.per_domain)
                csv << domain << ',' << acc.bytes << ',' << acc.tokens << ',' << acc.bpt()
                    << '\n';
            csv << "overall," << report.overall.bytes << ',' << report.overall.tokens << ','
                << report.overall.bpt() << '\n';
        }

        append_report(global, "bpt-eval", {{"model", opts->model}},
                      {{"domains", domains},
                       {"overall_bpt", report.overall.bpt()},
                       {"warnings", report.warnings}});
    });
}

struct TokSweepArgs {
    std::vector<std::string> source_specs;
    std::vector<std::string> ratio_specs;
    std::vector<std::string> eval_specs;
    size_t vocab = 0;
    uint64_t budget_mb = 8;
    std::string csv_out;
};

// Ratio spec: "synthetic=0.8,crawl=0.2".
std::map<std::string, double> parse_ratio(const std::string& spec) {
    std::map<std::string, double> ratio;
    size_t start = 0;
    while (start < spec.size()) {
        size_t comma = spec.find(',', start);
        std::string part = spec.substr(start, comma - start);
        size_t eq = part.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("expected name=fraction, got: " + part);
        try {
            ratio[part.substr(0, eq)] = std::stod(part.substr(eq + 1));
        } catch (const std::exception&) {
            throw UsageError("bad fraction in ratio spec: " + part);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return ratio;
}

void register_tok_sweep(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<TokSweepArgs>();
    auto* cmd = app.add_subcommand(
        "tok-sweep", "Train one tokenizer per mixture ratio and tabulate BPT");
    cmd->add_option("--source", opts->source_specs, "Corpus source as name=path (repeatable)")
        ->required();
    cmd->add_option("--ratio", opts->ratio_specs,
                    "Mixture as name=frac,name=frac (repeatable; fractions sum to 1)")
        ->required();
    cmd->add_option("--eval", opts->eval_specs, "Eval set as name=path (repeatable)")
        ->required();
    cmd->add_option("--vocab", opts->vocab, "Target vocabulary per tokenizer")->required();
    cmd->add_option("--budget-mb", opts->budget_mb, "Training sample bytes per ratio")
        ->capture_default_str();
    cmd->add_option("--csv", opts->csv_out, "Write ratio,domain,bytes,tokens,bpt rows");

    cmd->callback([&global, opts] {
        auto sources = read_named_sets(opts->source_specs);
        auto evals = read_named_sets(opts->eval_specs);
        std::vector<std::map<std::string, double>> ratios;
        for (const auto& spec : opts->ratio_specs) ratios.push_back(parse_ratio(spec));

        auto rows = mixture_sweep(sources, ratios, opts->vocab,
                                  opts->budget_mb * 1024 * 1024, evals);
        if (!opts->csv_out.empty()) {
            std::ofstream csv(opts->csv_out);
            csv << "ratio,domain,bytes,tokens,bpt\n";
            for (const auto& row : rows)
                csv << '"' << row.ratio_label << "\"," << row.domain << ',' << row.bytes
                    << ',' << row.tokens << ',' << row.bpt << '\n';
        }
        json rows_json = json::array();
        for (const auto& row : rows) {
            std::printf("%-32s %-12s bpt=%.4f\n", row.ratio_label.c_str(),
                        row.domain.c_str(), row.bpt);
            rows_json.push_back({{"ratio", row.ratio_label},
                                 {"domain", row.domain},
                                 {"bytes", row.bytes},
                                 {"tokens", row.tokens},
                                 {"bpt", row.bpt}});
        }
        append_report(global, "tok-sweep",
                      {{"vocab", opts->vocab}, {"budget_mb", opts->budget_mb}},
                      {{"rows", rows_json}});
    });
}

struct VocabAuditArgs {
    std::string model;
    std::string lexicon;
};

void register_vocab_audit(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<VocabAuditArgs>();
    auto* cmd = app.add_subcommand("vocab-audit",
                                   "Korean-share and harmful-token audit of a vocabulary");
    cmd->add_option("--model", opts->model, "Tokenizer model file")->required();
    cmd->add_option("--lexicon", opts->lexicon,
                    "Harmful-term lexicon, one UTF-8 string per line");

    cmd->callback([&global, opts] {
        require_input(opts->model);
        auto model = BpeModel::load(opts->model);
        std::vector<std::string> lexicon;
        if (!opts->lexicon.empty()) {
            require_input(opts->lexicon);
            LineReader reader(opts->lexicon);
            std::string line;
            while (reader.next(line))
                if (!line.empty()) lexicon.push_back(line);
        }
        auto audit = vocab_audit(model, lexicon);
        std::printf("kr_tokens=%llu other_tokens=%llu kr_share=%.4f harmful_hits=%zu\n",
                    (unsigned long long)audit.kr_tokens,
                    (unsigned long long)audit.other_tokens, audit.kr_share,
                    audit.harmful_hits.size());

        json hits = json::array();
        for (const auto& hit : audit.harmful_hits)
            hits.push_back({{"token_id", hit.token_id},
                            {"token", hit.token},
                            {"entry", hit.lexicon_entry}});
        append_report(global, "vocab-audit",
                      {{"model", opts->model}, {"lexicon", opts->lexicon}},
                      {{"kr_tokens", audit.kr_tokens},
                       {"other_tokens", audit.other_tokens},
                       {"kr_share", audit.kr_share},
                       {"harmful_hits", hits}});
    });
}

struct MixPlanArgs {
    std::string sources_path;
    std::string manifest_out;
};

void register_mix_plan(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<MixPlanArgs>();
    auto* cmd = app.add_subcommand("mix-plan",
                                   "Per-source token budgets under language constraints");
    cmd->add_option("--sources", opts->sources_path,
                    "JSON file: {sources: [...], constraints: {...}}")
        ->required();
    cmd->add_option("--manifest-out", opts->manifest_out, "Manifest JSONL to write");

    cmd->callback([&global, opts] {
        require_input(opts->sources_path);
        std::ifstream in(opts->sources_path);
        json spec = json::parse(in);

        std::vector<SourceSpec> sources;
        for (const auto& s : spec.at("sources")) {
            SourceSpec src;
            src.name = s.at("name").get<std::string>();
            src.language = s.at("language").get<std::string>();
            auto kind = source_kind_from_name(s.value("kind", "web"));
            if (!kind) throw UsageError("unknown source kind in " + src.name);
            src.kind = *kind;
            src.available_tokens = s.at("available_tokens").get<uint64_t>();
            src.stage = s.value("stage", 1);
            src.max_epochs = s.value("max_epochs", 1.0);
            sources.push_back(std::move(src));
        }
        PlanConstraints constraints;
        if (spec.contains("constraints")) {
            const auto& c = spec["constraints"];
            if (c.contains("total_tokens"))
                constraints.total_tokens = c["total_tokens"].get<uint64_t>();
            if (c.contains("stage_totals"))
                for (const auto& [stage, total] : c["stage_totals"].items())
                    constraints.stage_totals[std::stoi(stage)] = total.get<uint64_t>();
            if (c.contains("min_lang_share"))
                for (const auto& [lang, share] : c["min_lang_share"].items())
                    constraints.min_lang_share[lang] = share.get<double>();
        }

        auto result = plan(sources, constraints);
        auto violations = validate(result, sources);
        if (!violations.empty()) {
            for (const auto& v : violations) std::fprintf(stderr, "violation: %s\n", v.c_str());
            throw std::runtime_error("planned mixture failed validation");
        }
        if (!opts->manifest_out.empty())
            emit_manifest(result, opts->manifest_out, global.seed);

        json budgets = json::array();
        for (const auto& b : result.budgets)
            budgets.push_back({{"name", b.name},
                               {"stage", b.stage},
                               {"tokens", b.tokens},
                               {"epochs", b.epochs},
                               {"language", b.language},
                               {"kind", std::string(source_kind_name(b.kind))}});
        json shares = json::object();
        for (const auto& [lang, share] : result.overall_language_shares)
            shares[lang] = share;
        json stage_totals = json::object();
        for (const auto& [stage, total] : result.stage_totals)
            stage_totals[std::to_string(stage)] = total;

        std::printf("total_tokens=%llu\n", (unsigned long long)result.total_tokens());
        for (const auto& [lang, share] : result.overall_language_shares)
            std::printf("share[%s]=%.4f\n", lang.c_str(), share);

        append_report(global, "mix-plan", {{"sources", opts->sources_path}},
                      {{"budgets", budgets},
                       {"stage_totals", stage_totals},
                       {"overall_language_shares", shares},
                       {"synthetic_share_korean", result.synthetic_share_korean}});
    });
}

struct PackArgs {
    std::string input;
    std::string output_prefix;
    std::string model;
    std::string mode = "route";
    uint32_t length = 4096;
    int64_t pad_id = -1;
    uint64_t gate_max_tokens = 0;
};

std::vector<TokenizedDoc> read_tokenized(const std::string& path) {
    LineReader reader(path);
    std::vector<TokenizedDoc> docs;
    std::string line;
    while (reader.next(line)) {
        rapidjson::Document d;
        d.ParseInsitu(line.data());
        if (d.HasParseError() || !d.IsObject() || !d.HasMember("id") ||
            !d["id"].IsString() || !d.HasMember("ids") || !d["ids"].IsArray())
            throw JsonlError(path, reader.line_number(), "expected {id, ids, reasoning?}");
        TokenizedDoc doc;
        doc.id = d["id"].GetString();
        for (const auto& v : d["ids"].GetArray()) {
            if (!v.IsUint())
                throw JsonlError(path, reader.line_number(), "token id is not a uint32");
            doc.tokens.push_back(v.GetUint());
        }
        doc.reasoning = d.HasMember("reasoning") && d["reasoning"].IsBool() &&
                        d["reasoning"].GetBool();
        docs.push_back(std::move(doc));
    }
    return docs;
}

void register_pack(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<PackArgs>();
    auto* cmd = app.add_subcommand(
        "pack", "Pack token-id documents into fixed-length training sequences");
    cmd->add_option("-i,--input", opts->input, "Token-id JSONL from tok-encode")->required();
    cmd->add_option("-o,--output-prefix", opts->output_prefix,
                    "Writes <prefix>.bin/.idx.jsonl (+ .padded.* in route mode)")
        ->required();
    cmd->add_option("--mode", opts->mode, "route | pack | pad-only")
        ->check(CLI::IsMember({"route", "pack", "pad-only"}))
        ->capture_default_str();
    cmd->add_option("--length", opts->length, "Sequence length")->capture_default_str();
    cmd->add_option("--pad-id", opts->pad_id, "Pad token id (or use --model's <pad>)");
    cmd->add_option("--model", opts->model, "Tokenizer model providing the <pad> id");
    cmd->add_option("--gate-max-tokens", opts->gate_max_tokens,
                    "Drop documents over this many tokens first (0 = off)")
        ->capture_default_str();

    cmd->callback([&global, opts] {
        require_input(opts->input);
        PackerConfig cfg;
        cfg.sequence_length = opts->length;
        if (opts->pad_id >= 0) {
            cfg.pad_id = uint32_t(opts->pad_id);
        } else if (!opts->model.empty()) {
            require_input(opts->model);
            cfg.pad_id = BpeModel::load(opts->model).pad_id_or_throw();
        } else {
            throw UsageError("set --pad-id or --model");
        }

        auto docs = read_tokenized(opts->input);
        json gate_json;
        if (opts->gate_max_tokens > 0) {
            auto [kept, gate_report] = length_gate(docs, opts->gate_max_tokens);
            docs = std::move(kept);
            gate_json = {{"docs_in", gate_report.docs_in},
                         {"docs_kept", gate_report.docs_kept},
                         {"tokens_dropped", gate_report.tokens_dropped}};
        }

        auto write_set = [&](const std::vector<PackedSequence>& seqs,
                             const std::string& prefix) {
            write_shard(seqs, cfg, prefix + ".bin", prefix + ".idx.jsonl");
        };

        json counts;
        if (opts->mode == "pack") {
            auto seqs = pack(docs, cfg);
            write_set(seqs, opts->output_prefix);
            counts["sequences"] = seqs.size();
        } else if (opts->mode == "pad-only") {
            auto seqs = pad_only(docs, cfg);
            write_set(seqs, opts->output_prefix);
            counts["sequences"] = seqs.size();
        } else {
            auto result = route(docs, cfg);
            write_set(result.packed, opts->output_prefix);
            write_set(result.padded, opts->output_prefix + ".padded");
            counts["packed_sequences"] = result.packed.size();
            counts["padded_sequences"] = result.padded.size();
        }
        if (!gate_json.is_null()) counts["length_gate"] = gate_json;
        counts["docs"] = docs.size();

        append_report(global, "pack",
                      {{"mode", opts->mode},
                       {"length", opts->length},
                       {"pad_id", opts->pad_id},
                       {"gate_max_tokens", opts->gate_max_tokens}},
                      counts);
    });
}

struct SieveArgs {
    std::string input, output;
    std::vector<std::string> judges;
    std::vector<std::string> bypass = {"chat", "tool"};
    bool skip_missing = false;
};

void register_sieve(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<SieveArgs>();
    auto* cmd = app.add_subcommand(
        "sieve", "Two-stage difficulty-consensus filtering of annotation records");
    cmd->add_option("-i,--input", opts->input, "Annotation JSONL")->required();
    cmd->add_option("-o,--output", opts->output, "Selected records JSONL")->required();
    cmd->add_option("--judge", opts->judges, "Judge model name (exactly two)")
        ->expected(2)
        ->required();
    cmd->add_option("--bypass", opts->bypass,
                    "Domains that skip the stage-1 correctness test")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_flag("--skip-missing", opts->skip_missing,
                  "Skip records missing a judge annotation instead of aborting");

    cmd->callback([&global, opts] {
        require_input(opts->input);
        SieveConfig cfg;
        cfg.judges = {opts->judges[0], opts->judges[1]};
        cfg.skip_missing = opts->skip_missing;
        cfg.stage1_bypass.clear();
        for (const auto& name : opts->bypass) {
            auto domain = domain_from_name(name);
            if (!domain) throw UsageError("unknown domain: " + name);
            cfg.stage1_bypass.insert(*domain);
        }

        auto records = read_annotations(opts->input);
        auto [selected, report] = sieve(records, cfg);
        write_annotations(selected, opts->output);

        json per_domain = json::object();
        for (const auto& [domain, counts] : report.per_domain)
            per_domain[domain] = {{"input", counts.input},
                                  {"stage1", counts.stage1},
                                  {"final", counts.final_count},
                                  {"reduction_fraction", counts.reduction_fraction()},
                                  {"retained_fraction", counts.retained_fraction()}};
        std::printf("input=%llu stage1=%llu final=%llu\n",
                    (unsigned long long)report.input_count,
                    (unsigned long long)report.stage1_count,
                    (unsigned long long)report.final_count);
        append_report(global, "sieve",
                      {{"judges", opts->judges}, {"bypass", opts->bypass}},
                      {{"input", report.input_count},
                       {"stage1", report.stage1_count},
                       {"final", report.final_count},
                       {"skipped_missing", report.skipped_missing},
                       {"per_domain", per_domain}});
    });
}

struct SftPrepArgs {
    std::string input, output;
    bool no_dedup = false;
    bool no_balance = false;
    bool no_render = false;
    bool medium_non_reasoning = false;
};

void register_sft_prep(CLI::App& app, GlobalOptions& global) {
    auto opts = std::make_shared<SftPrepArgs>();
    auto* cmd = app.add_subcommand(
        "sft-prep", "uuid-dedup, 1:1 mode balancing, and hybrid-format rendering");
    cmd->add_option("-i,--input", opts->input, "Chat-sample JSONL")->required();
    cmd->add_option("-o,--output", opts->output, "Output JSONL")->required();
    cmd->add_flag("--no-dedup", opts->no_dedup, "Keep duplicate ids");
    cmd->add_flag("--no-balance", opts->no_balance,
                  "Keep existing modes instead of difficulty-based assignment");
    cmd->add_flag("--no-render", opts->no_render, "Skip the rendered text field");
    cmd->add_flag("--medium-non-reasoning", opts->medium_non_reasoning,
                  "Route medium difficulty to non-reasoning mode");

    cmd->callback([&global, opts] {
        require_input(opts->input);
        auto records = read_chat_samples(opts->input);
        const size_t docs_in = records.size();

        if (!opts->no_dedup) {
            std::vector<ChatSample> samples;
            samples.reserve(records.size());
            for (auto& r : records) samples.push_back(r.sample);
            auto kept = uuid_dedup(samples);
            std::vector<TaggedChatSample> deduped;
            size_t cursor = 0;
            for (auto& r : records) {
                if (cursor < kept.size() && r.sample.id == kept[cursor].id &&
                    r.sample == kept[cursor]) {
                    deduped.push_back(std::move(r));
                    ++cursor;
                }
            }
            records = std::move(deduped);
        }

        if (!opts->no_balance) {
            ModeAssignOptions assign;
            assign.medium_to_reasoning = !opts->medium_non_reasoning;
            assign.seed = global.seed;
            records = mode_assign(records, assign);
        }

        write_chat_samples(records, opts->output, !opts->no_render);
        append_report(global, "sft-prep",
                      {{"dedup", !opts->no_dedup},
                       {"balance", !opts->no_balance},
                       {"render", !opts->no_render},
                       {"seed", global.seed}},
                      {{"docs_in", docs_in}, {"docs_out", records.size()}});
    });
}

}  // namespace

void register_data_commands(CLI::App& app, GlobalOptions& global) {
    register_tok_train(app, global);
    register_tok_encode(app, global);
    register_bpt_eval(app, global);
    register_tok_sweep(app, global);
    register_vocab_audit(app, global);
    register_mix_plan(app, global);
    register_pack(app, global);
    register_sieve(app, global);
    register_sft_prep(app, global);
}

}  // namespace curator::cli
