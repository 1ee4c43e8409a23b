/// @file types.hpp
/// @brief Domain types shared by generation, evaluation and analytics.
///
/// All values are plain aggregates; once built they are never mutated by the
/// library and can be shared freely across worker threads.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace medtrap {

/// Raised when a value violates a field-level invariant. The message starts
/// with the offending field name.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SeedSource { DxBench, DDXPlus, Dxy, Custom };

struct SymptomRecord {
    std::string name;
    std::optional<int> severity;  // 0..10
    std::optional<std::string> duration;
    std::optional<std::string> frequency;
    std::optional<std::string> triggers;

    bool operator==(const SymptomRecord&) const = default;
};

struct SeedCase {
    std::string id;
    std::vector<SymptomRecord> symptoms;
    std::string true_diagnosis;
    std::string medical_entity;  // one of symptoms[].name, anchors the rumor
    SeedSource source = SeedSource::Custom;
    std::string language_tag = "en";

    bool operator==(const SeedCase&) const = default;
};

enum class TrapKind { SelfDiagnosis, DistractingHistory, ExternalNoise, SymptomMisplaced };

inline constexpr std::array<TrapKind, 4> kAllTraps{TrapKind::SelfDiagnosis, TrapKind::DistractingHistory,
                                                   TrapKind::ExternalNoise, TrapKind::SymptomMisplaced};

enum class Level { Low, Medium, High };
enum class CommStyle { Indirect, Neutral, Direct };

struct PersonaStyle {
    Level medical_knowledge = Level::Medium;
    Level clarity = Level::Medium;
    CommStyle communication_style = CommStyle::Neutral;

    bool operator==(const PersonaStyle&) const = default;
};

struct RumorFactPair {
    std::string entity;
    std::string rumor;
    std::string fact;
    bool valid = false;

    bool operator==(const RumorFactPair&) const = default;
};

enum class Criterion { Evidence, Treatment, Lifestyle };

inline constexpr std::array<Criterion, 3> kAllCriteria{Criterion::Evidence, Criterion::Treatment,
                                                       Criterion::Lifestyle};

struct ScorePoints {
    std::vector<std::string> evidence;
    std::vector<std::string> treatment;
    std::vector<std::string> lifestyle;

    const std::vector<std::string>& at(Criterion c) const;
    std::vector<std::string>& at(Criterion c);
    bool complete(size_t per_criterion) const;

    bool operator==(const ScorePoints&) const = default;
};

struct DimensionVerdict {
    std::string assessment;
    bool pass = false;

    bool operator==(const DimensionVerdict&) const = default;
};

/// Five-dimension validator verdict. Overall pass iff every dimension passes.
struct ValidationReport {
    DimensionVerdict challenge;
    DimensionVerdict rationality;
    DimensionVerdict trap_integrity;
    DimensionVerdict style_consistency;
    DimensionVerdict misleading_embedding;

    bool pass() const;
    /// "dimension: assessment" lines for each failing dimension.
    std::string failure_summary() const;

    static constexpr std::array<std::string_view, 5> kDimensions{
        "challenge", "rationality", "trap_integrity", "style_consistency", "misleading_embedding"};
    const DimensionVerdict& dimension(std::string_view name) const;
    DimensionVerdict& dimension(std::string_view name);

    bool operator==(const ValidationReport&) const = default;
};

struct RefineIteration {
    ValidationReport report;
    std::optional<std::string> refined_text;  // absent when the report passed
    std::optional<double> eta;

    bool operator==(const RefineIteration&) const = default;
};

inline constexpr std::string_view kFlagUnvalidated = "unvalidated";

struct PipelineTrace {
    std::string raw_text;
    std::string trapped_text;
    std::string styled_text;
    std::string rumored_text;
    std::vector<RefineIteration> iterations;
    bool validated = false;
    std::vector<std::string> flags;

    bool has_flag(std::string_view flag) const;
    bool operator==(const PipelineTrace&) const = default;
};

struct BenchQuestion {
    std::string id;
    std::string seed_id;
    std::string text;
    std::string true_diagnosis;
    std::string distractor_diagnosis;
    TrapKind trap = TrapKind::SelfDiagnosis;
    PersonaStyle persona;
    RumorFactPair rumor_pair;
    ScorePoints score_points;
    PipelineTrace provenance;

    /// Unvalidated questions are excluded from scoring by default.
    bool flagged() const { return provenance.has_flag(kFlagUnvalidated); }

    bool operator==(const BenchQuestion&) const = default;
};

struct ModelAnswer {
    std::string question_id;
    std::string model_id;
    std::string text;
    std::vector<std::string> ranked_diagnoses;  // challenge mode only
    bool missing = false;
    std::string error;

    bool operator==(const ModelAnswer&) const = default;
};

enum class Stance { Supports, Opposes, Undetermined };

struct HelpScores {
    int evidence = 0;
    int treatment = 0;
    int lifestyle = 0;

    int at(Criterion c) const;
    int& at(Criterion c);
    bool operator==(const HelpScores&) const = default;
};

struct EvalRecord {
    std::string question_id;
    std::string model_id;
    std::string seed_id;
    int acc_sub = 0;  // 0, 50 or 100
    bool ver_rectified = false;
    HelpScores help_sub;
    std::string primary_diagnosis;
    Stance rumor_stance = Stance::Undetermined;
    Stance fact_stance = Stance::Undetermined;
    std::vector<std::string> judge_rationales;
    std::vector<std::string> flags;

    bool operator==(const EvalRecord&) const = default;
};

struct PredictionGroup {
    std::string seed_id;
    std::string model_id;
    std::vector<std::string> normalized_diagnoses;
    double entropy = 0.0;  // bits
    double score = 0.0;    // 0..100

    bool operator==(const PredictionGroup&) const = default;
};

struct ScoreCard {
    std::string model_id;
    double acc = 0.0;
    double ver = 0.0;
    double help = 0.0;
    double cons = 0.0;
    double avg = 0.0;
    size_t questions = 0;
    size_t groups = 0;

    bool operator==(const ScoreCard&) const = default;
};

// Enum spellings used on the wire and in prompts.
std::string_view to_string(SeedSource v);
std::string_view to_string(TrapKind v);
std::string_view to_string(Level v);
std::string_view to_string(CommStyle v);
std::string_view to_string(Criterion v);
std::string_view to_string(Stance v);

/// Kebab-case trap slug used in question ids and CLI flags ("self-diagnosis").
std::string_view trap_slug(TrapKind v);

std::optional<SeedSource> parse_seed_source(std::string_view s);
std::optional<TrapKind> parse_trap(std::string_view s);  // accepts name or slug
std::optional<Level> parse_level(std::string_view s);
std::optional<CommStyle> parse_comm_style(std::string_view s);
std::optional<Criterion> parse_criterion(std::string_view s);

}  // namespace medtrap
