#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "cli_commands.hpp"
#include "cli_common.hpp"
#include "curator/jsonl.hpp"

using namespace curator;
using namespace curator::cli;

int main(int argc, char** argv) {
    CLI::App app{"corpus curation toolkit: filtering, dedup, quality models, "
                 "tokenizers, mixtures, packing"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    GlobalOptions global;
    app.set_config("--config", "", "Key-value config file; explicit flags win");
    app.add_option("--report", global.report_path,
                   "Append one run-report JSON object per stage to this file");
    app.add_option("--threads", global.threads,
                   "Worker threads (stages currently run in sequential mode)");
    app.add_option("--seed", global.seed, "Global seed for seeded stages");
    app.add_flag("--deterministic", global.deterministic,
                 "Force sequential, order-stable processing everywhere");

    register_pipeline_commands(app, global);
    register_data_commands(app, global);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}
