#pragma once

#include <CLI11.hpp>

#include "cli_common.hpp"

namespace curator::cli {

// Corpus pipeline stages: normalize, filter, dedup, lang-gate, quality-*,
// curate, stats, bench.
void register_pipeline_commands(CLI::App& app, GlobalOptions& global);

// Tokenizer, packing, and SFT stages: tok-*, bpt-eval, vocab-audit,
// mix-plan, pack, sieve, sft-prep.
void register_data_commands(CLI::App& app, GlobalOptions& global);

}  // namespace curator::cli
