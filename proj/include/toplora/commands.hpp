#pragma once

#include <string>

#include <json.hpp>

namespace toplora::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes shared with the binary: 0 success, 1 threshold failure,
// 2 usage/config error, 3 numeric failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitThreshold = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

struct CommandResult {
    nlohmann::json report;
    int exit_code = kExitOk;
};

nlohmann::json load_config_file(const std::string& path);

// Pulls the one section named after the command; rejects unknown
// top-level keys other than the known subcommand names.
nlohmann::json command_section(const nlohmann::json& doc, const std::string& command);

CommandResult run_gradcheck(const nlohmann::json& config);
CommandResult run_analyze(const nlohmann::json& config, const std::string& weights_path = "");
CommandResult run_train(const nlohmann::json& config);
CommandResult run_params(const nlohmann::json& config);
CommandResult run_sweep(const nlohmann::json& config);

}  // namespace toplora::cli
