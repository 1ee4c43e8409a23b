/// @file knowledge_base.hpp
/// @brief File-backed reference articles keyed by diagnosis or entity name.

#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace medtrap::knowledge {

/// One UTF-8 article per file; the file stem is the entity name with spaces
/// written as underscores ("iron_deficiency_anemia.txt"). Keys are compared
/// after lowercasing and whitespace collapsing.
class KnowledgeBase {
public:
    KnowledgeBase() = default;

    /// Loads every regular file under `dir`. Throws std::runtime_error naming
    /// the path when `dir` does not exist.
    static KnowledgeBase load(const std::filesystem::path& dir);

    void add(const std::string& name, std::string article);

    /// Exact key match first, then the longest key that contains or is
    /// contained in `name`. Returns "" when nothing matches.
    std::string lookup(const std::string& name) const;

    std::size_t size() const { return articles_.size(); }

    static std::string key_for(const std::string& name);

private:
    std::map<std::string, std::string> articles_;
};

}  // namespace medtrap::knowledge
