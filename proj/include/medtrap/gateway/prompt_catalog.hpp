/// @file prompt_catalog.hpp
/// @brief Prompt templates loaded from a directory, one file per stage tag.
///
/// Layout:
///
///     <root>/<lang>/<tag>.txt     template text with {placeholder} variables
///     <root>/<lang>/traps.json    per-trap display name, description, task text
///     <root>/<lang>/severity.json optional severity band override
///
/// Lookups fall back to <root>/en when the language directory lacks a file.
/// A brace group is a placeholder only when it holds an identifier
/// ([A-Za-z_][A-Za-z0-9_]*), so JSON examples in templates pass through.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "medtrap/core/seed.hpp"
#include "medtrap/core/types.hpp"

namespace medtrap {

using PromptVars = std::map<std::string, std::string>;

struct TrapText {
    std::string name;
    std::string description;
    std::string task;
};

class PromptCatalog {
public:
    /// Throws std::runtime_error when the directory or traps.json is missing.
    static PromptCatalog load(const std::filesystem::path& root, const std::string& lang = "en");

    bool has(const std::string& tag) const { return templates_.count(tag) > 0; }
    std::vector<std::string> tags() const;
    const std::string& raw(const std::string& tag) const;

    /// Substitutes every placeholder. Throws std::invalid_argument naming the
    /// tag and variable when a placeholder has no value.
    std::string render(const std::string& tag, const PromptVars& vars) const;

    const TrapText& trap(TrapKind kind) const;
    const SeverityScale& severity() const { return severity_; }
    const std::string& language() const { return lang_; }

    /// Content digest over every file under the catalog root.
    const std::string& digest() const { return digest_; }

    /// Placeholder names appearing in `text`, in order of first appearance.
    static std::vector<std::string> placeholders(const std::string& text);

private:
    PromptCatalog() : severity_(SeverityScale::english()) {}

    std::map<std::string, std::string> templates_;
    std::map<TrapKind, TrapText> traps_;
    SeverityScale severity_;
    std::string lang_;
    std::string digest_;
};

/// $MEDTRAP_PROMPT_DIR when set, else the catalog location baked in at compile time.
std::filesystem::path default_prompt_dir();

}  // namespace medtrap
