/// @file types.cpp

#include "medtrap/core/types.hpp"

#include <algorithm>

#include "medtrap/core/text.hpp"

namespace medtrap {

const std::vector<std::string>& ScorePoints::at(Criterion c) const {
    switch (c) {
        case Criterion::Evidence: return evidence;
        case Criterion::Treatment: return treatment;
        case Criterion::Lifestyle: return lifestyle;
    }
    throw std::logic_error("bad criterion");
}

std::vector<std::string>& ScorePoints::at(Criterion c) {
    return const_cast<std::vector<std::string>&>(std::as_const(*this).at(c));
}

bool ScorePoints::complete(size_t per_criterion) const {
    return evidence.size() == per_criterion && treatment.size() == per_criterion &&
           lifestyle.size() == per_criterion;
}

bool ValidationReport::pass() const {
    return challenge.pass && rationality.pass && trap_integrity.pass && style_consistency.pass &&
           misleading_embedding.pass;
}

const DimensionVerdict& ValidationReport::dimension(std::string_view name) const {
    if (name == "challenge") return challenge;
    if (name == "rationality") return rationality;
    if (name == "trap_integrity") return trap_integrity;
    if (name == "style_consistency") return style_consistency;
    if (name == "misleading_embedding") return misleading_embedding;
    throw std::out_of_range("unknown validation dimension: " + std::string(name));
}

DimensionVerdict& ValidationReport::dimension(std::string_view name) {
    return const_cast<DimensionVerdict&>(std::as_const(*this).dimension(name));
}

std::string ValidationReport::failure_summary() const {
    std::string out;
    for (auto name : kDimensions) {
        const auto& d = dimension(name);
        if (d.pass) continue;
        if (!out.empty()) out.push_back('\n');
        out.append(name);
        out.append(": Fail - ");
        out.append(d.assessment);
    }
    return out;
}

bool PipelineTrace::has_flag(std::string_view flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

int HelpScores::at(Criterion c) const {
    switch (c) {
        case Criterion::Evidence: return evidence;
        case Criterion::Treatment: return treatment;
        case Criterion::Lifestyle: return lifestyle;
    }
    throw std::logic_error("bad criterion");
}

int& HelpScores::at(Criterion c) {
    switch (c) {
        case Criterion::Evidence: return evidence;
        case Criterion::Treatment: return treatment;
        case Criterion::Lifestyle: return lifestyle;
    }
    throw std::logic_error("bad criterion");
}

std::string_view to_string(SeedSource v) {
    switch (v) {
        case SeedSource::DxBench: return "DxBench";
        case SeedSource::DDXPlus: return "DDXPlus";
        case SeedSource::Dxy: return "Dxy";
        case SeedSource::Custom: return "Custom";
    }
    return "Custom";
}

std::string_view to_string(TrapKind v) {
    switch (v) {
        case TrapKind::SelfDiagnosis: return "SelfDiagnosis";
        case TrapKind::DistractingHistory: return "DistractingHistory";
        case TrapKind::ExternalNoise: return "ExternalNoise";
        case TrapKind::SymptomMisplaced: return "SymptomMisplaced";
    }
    return "SelfDiagnosis";
}

std::string_view trap_slug(TrapKind v) {
    switch (v) {
        case TrapKind::SelfDiagnosis: return "self-diagnosis";
        case TrapKind::DistractingHistory: return "distracting-history";
        case TrapKind::ExternalNoise: return "external-noise";
        case TrapKind::SymptomMisplaced: return "symptom-misplaced";
    }
    return "self-diagnosis";
}

std::string_view to_string(Level v) {
    switch (v) {
        case Level::Low: return "Low";
        case Level::Medium: return "Medium";
        case Level::High: return "High";
    }
    return "Medium";
}

std::string_view to_string(CommStyle v) {
    switch (v) {
        case CommStyle::Indirect: return "Indirect";
        case CommStyle::Neutral: return "Neutral";
        case CommStyle::Direct: return "Direct";
    }
    return "Neutral";
}

std::string_view to_string(Criterion v) {
    switch (v) {
        case Criterion::Evidence: return "evidence";
        case Criterion::Treatment: return "treatment";
        case Criterion::Lifestyle: return "lifestyle";
    }
    return "evidence";
}

std::string_view to_string(Stance v) {
    switch (v) {
        case Stance::Supports: return "Supports";
        case Stance::Opposes: return "Opposes";
        case Stance::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

std::optional<SeedSource> parse_seed_source(std::string_view s) {
    const auto n = text::normalize(s);
    if (n == "dxbench") return SeedSource::DxBench;
    if (n == "ddxplus") return SeedSource::DDXPlus;
    if (n == "dxy") return SeedSource::Dxy;
    if (n == "custom") return SeedSource::Custom;
    return std::nullopt;
}

std::optional<TrapKind> parse_trap(std::string_view s) {
    const auto n = text::normalize(s);
    for (auto t : kAllTraps) {
        if (n == text::to_lower(to_string(t)) || n == trap_slug(t)) return t;
    }
    return std::nullopt;
}

std::optional<Level> parse_level(std::string_view s) {
    const auto n = text::normalize(s);
    if (n == "low") return Level::Low;
    if (n == "medium") return Level::Medium;
    if (n == "high") return Level::High;
    return std::nullopt;
}

std::optional<CommStyle> parse_comm_style(std::string_view s) {
    const auto n = text::normalize(s);
    if (n == "indirect") return CommStyle::Indirect;
    if (n == "neutral") return CommStyle::Neutral;
    if (n == "direct") return CommStyle::Direct;
    return std::nullopt;
}

std::optional<Criterion> parse_criterion(std::string_view s) {
    const auto n = text::normalize(s);
    if (n == "evidence") return Criterion::Evidence;
    if (n == "treatment") return Criterion::Treatment;
    if (n == "lifestyle") return Criterion::Lifestyle;
    return std::nullopt;
}

}  // namespace medtrap
