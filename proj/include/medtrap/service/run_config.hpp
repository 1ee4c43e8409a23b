/// @file run_config.hpp
/// @brief Run configuration file: backends, model roles, stage configs, paths.
///
/// Layout (JSON, relative paths resolve against the config file's directory):
///
///     {"backend": {"scripted": "fixtures.json"}
///               | {"endpoints": [{"base_url": "...", "api_key_env": "VAR",
///                                 "models": ["id", ...], "timeout_s": 120}]},
///      "models": {"generator": "id", "judge": "id", "candidates": ["id"]},
///      "generation": {...}, "evaluation": {...},
///      "paths": {"knowledge": "dir", "prompts": "dir", "cache": "dir", "output": "dir"},
///      "language": "en", "max_in_flight": 8}
///
/// API keys are read from the named environment variables at gateway
/// construction and never stored in the config object.

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "medtrap/evaluate/config.hpp"
#include "medtrap/gateway/gateway.hpp"
#include "medtrap/generate/config.hpp"

namespace medtrap::service {

struct EndpointConfig {
    std::string base_url;
    std::string api_key_env;  // empty: no key
    std::vector<std::string> models;  // empty: fallback for every model
    int timeout_s = 120;
};

struct RunConfig {
    std::filesystem::path source;  // the config file, when loaded from disk
    std::optional<std::filesystem::path> scripted_fixtures;
    std::vector<EndpointConfig> endpoints;
    std::string generator_model = "generator";
    std::string judge_model = "judge";
    std::vector<std::string> candidate_models;
    generate::GenConfig gen;
    evaluate::EvalConfig eval;
    std::filesystem::path knowledge_dir;
    std::filesystem::path prompt_dir;
    std::optional<std::filesystem::path> cache_dir;
    std::optional<std::filesystem::path> output_dir;  // default for command outputs
    std::string language = "en";
    int max_in_flight = 8;

    /// Checks that the knowledge and prompt directories (and the fixture file,
    /// if any) exist and that a backend is configured. Throws ValidationError
    /// naming the missing path.
    void validate() const;
};

/// Parses `j` with relative paths resolved against `base_dir`, applies the
/// model roles to the stage configs, validates, and creates the cache and
/// output directories when given.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
/// `scripted` replaces whatever backend the file configures (CLI
/// `--backend scripted:<path>`).
RunConfig load_run_config(const std::filesystem::path& path,
                          const std::optional<std::filesystem::path>& scripted = std::nullopt);

/// Canonical encoding for manifests: paths as given, environment variable
/// names but never their values.
nlohmann::json to_json(const RunConfig& cfg);

/// Builds a gateway with every configured backend registered.
std::unique_ptr<gateway::Gateway> make_gateway(const RunConfig& cfg);

}  // namespace medtrap::service
