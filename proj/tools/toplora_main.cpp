#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "toplora/commands.hpp"
#include "toplora/errors.hpp"

namespace {

using toplora::cli::CommandResult;

void emit(const nlohmann::json& report, const std::string& out_path) {
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(out_path, std::ios::trunc);
        if (!f) throw toplora::ConfigError("cannot open output file: " + out_path);
        f << text;
    }
}

void apply_seed_override(nlohmann::json& section, std::optional<std::uint64_t> seed) {
    if (!seed) return;
    section["seeds"] = nlohmann::json::array({*seed});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TopLoRA experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string weights_path;
    std::optional<std::uint64_t> seed_override;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        auto* opt = cmd->add_option("--config", config_path, "JSON config file");
        if (config_required) opt->required();
        cmd->add_option("--out", out_path, "write the JSON report here (default stdout)");
        cmd->add_option("--seed-override", seed_override,
                        "replace the config's seed list with this single seed");
    };

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "verify gradients vs finite differences");
    add_common(gradcheck, true);
    CLI::App* analyze = app.add_subcommand("analyze", "projection-space and gate diagnostics");
    add_common(analyze, false);
    analyze->add_option("--weights", weights_path, "TPLW1 weight file to analyze");
    CLI::App* train = app.add_subcommand("train", "train adapters on the synthetic teacher task");
    add_common(train, true);
    CLI::App* params = app.add_subcommand("params", "trainable parameter accounting");
    add_common(params, true);
    CLI::App* sweep = app.add_subcommand("sweep", "loss-vs-rank sweep");
    add_common(sweep, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : toplora::cli::kExitUsage;
    }

    try {
        CommandResult result;
        if (gradcheck->parsed()) {
            nlohmann::json section = toplora::cli::command_section(
                toplora::cli::load_config_file(config_path), "gradcheck");
            apply_seed_override(section, seed_override);
            result = toplora::cli::run_gradcheck(section);
        } else if (analyze->parsed()) {
            nlohmann::json section = nlohmann::json::object();
            if (!config_path.empty()) {
                section = toplora::cli::command_section(
                    toplora::cli::load_config_file(config_path), "analyze");
            } else if (weights_path.empty()) {
                throw toplora::ConfigError("analyze needs --config and/or --weights");
            }
            if (seed_override) section["seed"] = *seed_override;
            result = toplora::cli::run_analyze(section, weights_path);
        } else if (train->parsed()) {
            nlohmann::json section = toplora::cli::command_section(
                toplora::cli::load_config_file(config_path), "train");
            apply_seed_override(section, seed_override);
            result = toplora::cli::run_train(section);
        } else if (params->parsed()) {
            nlohmann::json section = toplora::cli::command_section(
                toplora::cli::load_config_file(config_path), "params");
            result = toplora::cli::run_params(section);
        } else {
            nlohmann::json section = toplora::cli::command_section(
                toplora::cli::load_config_file(config_path), "sweep");
            apply_seed_override(section, seed_override);
            result = toplora::cli::run_sweep(section);
        }
        emit(result.report, out_path);
        return result.exit_code;
    } catch (const toplora::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return toplora::cli::kExitUsage;
    } catch (const toplora::FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return toplora::cli::kExitUsage;
    } catch (const toplora::DivergenceError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return toplora::cli::kExitNumeric;
    } catch (const toplora::FactorizationError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return toplora::cli::kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return toplora::cli::kExitNumeric;
    }
}
