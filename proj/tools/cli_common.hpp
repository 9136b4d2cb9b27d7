#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curator/hash.hpp"

namespace curator::cli {

inline constexpr const char* kToolName = "curator";
inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes: 0 success, 1 data error, 2 usage/config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

struct GlobalOptions {
    std::string config_path;
    std::string report_path;
    int threads = 1;
    uint64_t seed = 0;
    bool deterministic = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inputs must exist up front so a missing path is a usage error, not a
// mid-run data error. "-" (stdin) is always acceptable.
inline void require_inputs(const std::vector<std::string>& paths) {
    for (const auto& path : paths) {
        if (path == "-") continue;
        if (!std::filesystem::exists(path))
            throw UsageError("input does not exist: " + path);
    }
}

inline void require_input(const std::string& path) { require_inputs({path}); }

// One report object appended per run, so a corpus keeps its full chain of
// custody across stages.
inline void append_report(const GlobalOptions& global, const std::string& subcommand,
                          const nlohmann::json& config, nlohmann::json counts) {
    if (global.report_path.empty()) return;
    nlohmann::json report;
    report["tool"] = kToolName;
    report["version"] = kToolVersion;
    report["subcommand"] = subcommand;
    std::string config_dump = config.dump();
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(hash64(config_dump)));
    report["config_hash"] = hex;
    report["config"] = config;
    report["counts"] = std::move(counts);

    FILE* f = std::fopen(global.report_path.c_str(), "ab");
    if (!f) throw std::runtime_error("cannot open report file: " + global.report_path);
    std::string line = report.dump();
    line.push_back('\n');
    std::fwrite(line.data(), 1, line.size(), f);
    std::fclose(f);
}

}  // namespace curator::cli
