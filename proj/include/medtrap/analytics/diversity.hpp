/// @file diversity.hpp
/// @brief Expression diversity over persona-style histograms and
/// unique-diagnosis counting.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medtrap/core/types.hpp"
#include "medtrap/gateway/ask.hpp"
#include "medtrap/gateway/gateway.hpp"
#include "medtrap/gateway/prompt_catalog.hpp"

namespace medtrap::analytics {

/// One 3-level histogram per style dimension (medical knowledge, clarity,
/// communication style), indexed by the enum's ordinal.
struct StyleDistribution {
    std::array<std::array<std::size_t, 3>, 3> counts{};
    std::size_t total = 0;

    void add(const PersonaStyle& s);
    static StyleDistribution from_styles(std::span<const PersonaStyle> styles);
    /// Throws ValidationError when a histogram does not sum to total.
    void validate() const;
};

/// Base-2 entropy of a histogram; empty bins contribute 0.
double histogram_entropy(std::span<const std::size_t> hist);

/// Mean base-2 entropy of the three histograms. Requires total >= 1.
double expression_diversity(const StyleDistribution& dist);

struct StyleExtraction {
    std::optional<PersonaStyle> style;
    std::vector<std::string> flags;
};

struct DiagnosisDiversity {
    std::size_t unique = 0;
    std::vector<std::string> diagnoses;  // canonical, sorted
    std::vector<std::string> flags;
};

/// Judge-backed corpus statistics.
class StyleAnalyzer {
public:
    StyleAnalyzer(gateway::Gateway& gw, const PromptCatalog& prompts, gateway::CallSettings judge);

    /// Unreadable judge output yields no style and a flag; such texts are
    /// left out of histograms.
    StyleExtraction extract_style(const std::string& question) const;

    /// Distribution over every readable text plus the flags raised.
    std::pair<StyleDistribution, std::vector<std::string>> style_distribution(
        const std::vector<std::string>& texts) const;

    /// Number of distinct disease names across `texts` after canonical
    /// normalization.
    DiagnosisDiversity diagnosis_diversity(const std::vector<std::string>& texts) const;

private:
    gateway::Gateway& gw_;
    const PromptCatalog& prompts_;
    gateway::CallSettings judge_;
};

}  // namespace medtrap::analytics
