/// @file seed.hpp
/// @brief Seed-case validation and the severity-to-word scale.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "medtrap/core/types.hpp"

namespace medtrap {

struct SeedParse {
    std::optional<SeedCase> seed;
    std::vector<std::string> errors;

    bool ok() const { return seed.has_value(); }
};

/// Checks a raw seed record against every SeedCase invariant and collects
/// all violations rather than stopping at the first.
SeedParse validate_seed(const nlohmann::json& raw);

/// Parses a seeds JSONL file; throws ValidationError listing every bad line.
std::vector<SeedCase> load_seeds(const std::filesystem::path& path);

/// Maps integer severities (0..10) to descriptive band words. The table is
/// data: catalogs may ship a per-language `severity.json` override.
class SeverityScale {
public:
    struct Band {
        int min;
        int max;
        std::string word;
    };

    static SeverityScale english();
    /// Reads `[{"min":0,"max":0,"word":"mild"}, ...]`; must cover 0..10.
    static SeverityScale from_json(const nlohmann::json& j);

    const std::string& word_for(int severity) const;
    const std::vector<Band>& bands() const { return bands_; }

private:
    explicit SeverityScale(std::vector<Band> bands);
    std::vector<Band> bands_;
};

}  // namespace medtrap
