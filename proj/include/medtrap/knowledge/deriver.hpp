/// @file deriver.hpp
/// @brief Knowledge-grounded derivation of differentials, rumor-fact pairs
/// and score-points through the generator model.

#pragma once

#include <string>
#include <vector>

#include "medtrap/core/types.hpp"
#include "medtrap/gateway/ask.hpp"
#include "medtrap/gateway/gateway.hpp"
#include "medtrap/gateway/prompt_catalog.hpp"
#include "medtrap/knowledge/knowledge_base.hpp"

namespace medtrap::knowledge {

struct DiagnosisProfile {
    std::string name;
    std::vector<std::string> symptoms;

    bool operator==(const DiagnosisProfile&) const = default;
};

struct DifferentialSet {
    DiagnosisProfile root;
    std::vector<DiagnosisProfile> similar;
    std::vector<std::string> flags;
    /// Accepted names that share a substring with the root and may be a
    /// parent or subtype of it. Kept, but listed for review.
    std::vector<std::string> suspect_hierarchy;
};

struct RumorSet {
    std::vector<RumorFactPair> pairs;
    std::vector<std::string> flags;
};

struct PointList {
    std::vector<std::string> points;
    std::vector<std::string> flags;
};

inline constexpr std::string_view kFlagPartialDifferential = "partial-differential";
inline constexpr std::string_view kFlagRootInDifferential = "root-in-differential";
inline constexpr std::string_view kFlagRumorShortfall = "rumor-shortfall";
inline constexpr std::string_view kFlagScorepointShortfall = "scorepoint-shortfall";
inline constexpr int kMaxRumorPairs = 10;

/// JSON key carrying each criterion's list in judge replies.
std::string_view score_point_key(Criterion c);

class KnowledgeDeriver {
public:
    KnowledgeDeriver(gateway::Gateway& gw, const PromptCatalog& prompts, const KnowledgeBase& kb,
                     gateway::CallSettings generator, gateway::CallSettings judge)
        : gw_(gw), prompts_(prompts), kb_(kb), generator_(std::move(generator)), judge_(std::move(judge)) {}

    /// `n` similar diagnoses. The root name itself is always filtered out
    /// locally; fewer than `n` usable names after one re-ask flags the set.
    DifferentialSet differential_diagnoses(const std::string& root, int n) const;

    /// Up to `n` (1..10) pairs for `entity`, each with valid = false.
    RumorSet rumor_fact_pairs(const std::string& entity, int n) const;

    /// Judge check that the rumor is false-but-plausible and the fact refutes
    /// it. Identical rumor and fact fail without a model call; an
    /// indeterminate or unreadable verdict counts as invalid.
    bool validity_check(const RumorFactPair& pair) const;

    /// Exactly `k` distinct points in importance order, or fewer with a
    /// shortfall flag.
    PointList derive_score_points(const std::string& diagnosis, const std::string& question, Criterion criterion,
                                  int k) const;

    std::string context_for(const std::string& name) const;

private:
    gateway::Gateway& gw_;
    const PromptCatalog& prompts_;
    const KnowledgeBase& kb_;
    gateway::CallSettings generator_;
    gateway::CallSettings judge_;
};

}  // namespace medtrap::knowledge
