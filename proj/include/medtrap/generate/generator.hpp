/// @file generator.hpp
/// @brief Seed-to-question pipeline: raw question, trap, persona style,
/// rumor embedding, then the validate / refine loop and score-point derivation.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "medtrap/core/rng.hpp"
#include "medtrap/core/types.hpp"
#include "medtrap/gateway/gateway.hpp"
#include "medtrap/gateway/prompt_catalog.hpp"
#include "medtrap/generate/config.hpp"
#include "medtrap/generate/guards.hpp"
#include "medtrap/knowledge/deriver.hpp"
#include "medtrap/knowledge/knowledge_base.hpp"

namespace medtrap::generate {

/// Output of one text-producing stage plus any guard flags it raised.
struct StageText {
    std::string text;
    std::vector<std::string> flags;
};

struct StyledText {
    std::string text;
    PersonaStyle style;
    std::vector<std::string> flags;
};

struct ExtractedStyle {
    PersonaStyle style;
    std::vector<std::string> flags;
};

/// Everything the validator and refiner need to know about a candidate.
struct CandidateBundle {
    SeedCase seed;
    std::string question;
    std::string trapped_question;
    TrapKind trap = TrapKind::SelfDiagnosis;
    knowledge::DiagnosisProfile distractor;
    PersonaDescriptor persona;
    PersonaStyle style;
    RumorFactPair rumor;
};

struct RefineOutcome {
    std::string text;
    std::string explanation;
    std::vector<std::string> flags;
};

struct OptimizeResult {
    std::string text;
    std::vector<RefineIteration> iterations;
    bool validated = false;
    std::vector<std::string> flags;
};

struct TrapDraw {
    TrapKind trap;
    std::size_t distractor_index;
};

/// Trap and distractor choices for one seed. Benchmark mode yields every
/// configured trap once, challenge mode one trap drawn uniformly; each
/// question gets a distractor drawn uniformly from `differential_size`.
std::vector<TrapDraw> sample_trap_and_distractor(const std::vector<TrapKind>& traps, GenMode mode,
                                                 std::size_t differential_size, Rng& rng);

/// Edit guidance matching an intensity in [0,1].
std::string refinement_instruction(double eta);

/// Shortest decimal rendering ("0.3", "1").
std::string format_eta(double eta);

struct GenerationResult {
    std::vector<BenchQuestion> questions;
    nlohmann::json manifest;
};

class Generator {
public:
    /// Validates `cfg`; throws ValidationError.
    Generator(gateway::Gateway& gw, const PromptCatalog& prompts, const knowledge::KnowledgeBase& kb, GenConfig cfg);

    const GenConfig& config() const { return cfg_; }
    const knowledge::KnowledgeDeriver& deriver() const { return deriver_; }

    StageText synthesize_raw_question(const SeedCase& seed) const;
    StageText apply_trap(const std::string& question, TrapKind trap, const knowledge::DiagnosisProfile& distractor,
                         const SeedCase& seed) const;
    ExtractedStyle extract_persona(const PersonaDescriptor& persona) const;
    StyledText apply_style(const std::string& question, const PersonaDescriptor& persona, const SeedCase& seed) const;
    /// Requires pair.valid.
    StageText insert_rumor(const std::string& question, const RumorFactPair& pair, const SeedCase& seed) const;

    /// Judge verdict on five dimensions. An unreadable verdict fails every
    /// dimension with a "validator unreadable" assessment.
    ValidationReport validate(const CandidateBundle& bundle) const;

    /// One refinement step. Requires a failing report and eta in [0,1]. When
    /// the refined text breaks a local guard twice the previous text is kept.
    RefineOutcome refine(const CandidateBundle& bundle, const ValidationReport& report, double eta) const;

    /// Validate, refine on failure, repeat up to max_refine_iterations. The
    /// trap, persona and rumor stay fixed; only the question text changes.
    OptimizeResult pgd_optimize(const CandidateBundle& bundle) const;

    /// First rumor-fact pair for `entity` that passes the validity check.
    std::optional<RumorFactPair> select_rumor(const std::string& entity, nlohmann::json* audit = nullptr) const;

    /// Questions for one seed. Per-question failures are appended to
    /// `failures` and do not stop the remaining traps.
    std::vector<BenchQuestion> generate_seed(const SeedCase& seed, nlohmann::json& audit,
                                             std::vector<std::string>& failures) const;

    /// Runs every seed (across cfg.workers threads) and builds the manifest.
    /// Output order follows seed order regardless of scheduling.
    GenerationResult generate_benchmark(const std::vector<SeedCase>& seeds) const;

private:
    StageText guarded_stage(const std::string& tag, const std::string& prompt, const gateway::JsonShape& shape,
                            const std::function<std::string(const nlohmann::json&)>& extract,
                            const std::function<std::vector<std::string>(const std::string&)>& guard) const;
    SymptomLexicon lexicon() const;
    std::string symptom_list(const SeedCase& seed) const;

    gateway::Gateway& gw_;
    const PromptCatalog& prompts_;
    GenConfig cfg_;
    knowledge::KnowledgeDeriver deriver_;
};

}  // namespace medtrap::generate
