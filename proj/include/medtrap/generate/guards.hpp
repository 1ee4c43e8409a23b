/// @file guards.hpp
/// @brief Mechanical checks run on every model-produced question text.
///
/// Each guard returns a list of human-readable problems; empty means pass.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "medtrap/core/seed.hpp"
#include "medtrap/core/types.hpp"

namespace medtrap::generate {

struct SymptomLexicon {
    std::map<std::string, std::vector<std::string>> synonyms;  // keyed by normalized symptom name
    std::vector<std::string> heldout;
};

/// Every seed symptom (or a synonym) appears; no held-out symptom that the
/// seed does not list appears.
std::vector<std::string> check_symptoms(const std::string& text, const SeedCase& seed, const SymptomLexicon& lex);

/// Rumor text present and fact text absent (case and whitespace folded,
/// trailing punctuation ignored).
std::vector<std::string> check_rumor(const std::string& text, const RumorFactPair& pair);

/// None of `terms` appears as a whole word.
std::vector<std::string> check_persona_leak(const std::string& text, const std::vector<std::string>& terms);

/// Each graded symptom is described by its band word and no numeric score
/// ("7/10", "7 out of 10", "severity 7", "7 points") survives.
std::vector<std::string> check_severity(const std::string& text, const SeedCase& seed, const SeverityScale& scale);

/// The distractor diagnosis is named (required for the self-diagnosis trap).
std::vector<std::string> check_distractor(const std::string& text, const std::string& distractor);

}  // namespace medtrap::generate
