/// @file config.hpp
/// @brief Generation settings and persona descriptors.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "medtrap/core/types.hpp"
#include "medtrap/gateway/ask.hpp"

namespace medtrap::generate {

/// A persona from the pool. `identity_terms` lists words that would reveal
/// who the persona is (name, occupation...). When absent they are derived
/// from the description: words of four or more letters minus style vocabulary.
struct PersonaDescriptor {
    std::string id;
    std::string description;
    std::optional<std::vector<std::string>> identity_terms;

    std::vector<std::string> leak_terms() const;
    bool operator==(const PersonaDescriptor&) const = default;
};

enum class GenMode { Benchmark, Challenge };

struct GenConfig {
    int max_refine_iterations = 3;
    std::vector<double> eta_schedule{0.3, 0.6, 0.9};
    int scorepoint_count = 3;
    int rumor_pool_size = 10;
    int differential_count = 3;
    std::vector<TrapKind> traps{kAllTraps.begin(), kAllTraps.end()};
    GenMode mode = GenMode::Benchmark;
    std::vector<PersonaDescriptor> persona_pool;
    std::uint64_t rng_seed = 0;
    std::string pronoun_tone = "Write in the first person, as the patient speaking";
    /// Accepted alternative spellings per symptom name for containment checks.
    std::map<std::string, std::vector<std::string>> symptom_synonyms;
    /// Symptom names that must not appear unless the seed lists them.
    std::vector<std::string> heldout_symptoms;
    int workers = 1;
    gateway::CallSettings generator{"generator", 0.7, 1024, 3};
    gateway::CallSettings judge{"judge", 0.0, 1024, 3};

    /// Throws ValidationError naming the offending field.
    void validate() const;

    /// Personas in use: the configured pool, or one neutral default.
    std::vector<PersonaDescriptor> personas() const;
};

nlohmann::json to_json(const GenConfig& cfg);
GenConfig gen_config_from_json(const nlohmann::json& j, GenConfig base = {});

/// SHA-256 of the canonical JSON encoding.
std::string config_digest(const GenConfig& cfg);

}  // namespace medtrap::generate
