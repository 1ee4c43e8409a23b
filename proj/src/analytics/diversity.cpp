/// @file diversity.cpp

#include "medtrap/analytics/diversity.hpp"

#include <cmath>
#include <map>
#include <set>

#include "medtrap/core/text.hpp"
#include "medtrap/evaluate/evaluator.hpp"

namespace medtrap::analytics {

using gateway::FieldKind;
using gateway::JsonShape;
using nlohmann::json;

void StyleDistribution::add(const PersonaStyle& s) {
    ++counts[0][static_cast<std::size_t>(s.medical_knowledge)];
    ++counts[1][static_cast<std::size_t>(s.clarity)];
    ++counts[2][static_cast<std::size_t>(s.communication_style)];
    ++total;
}

StyleDistribution StyleDistribution::from_styles(std::span<const PersonaStyle> styles) {
    StyleDistribution d;
    for (const auto& s : styles) d.add(s);
    return d;
}

void StyleDistribution::validate() const {
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::size_t sum = 0;
        for (auto c : counts[i]) sum += c;
        if (sum != total) throw ValidationError("counts[" + std::to_string(i) + "]: does not sum to total");
    }
}

double histogram_entropy(std::span<const std::size_t> hist) {
    std::size_t n = 0;
    for (auto c : hist) n += c;
    if (n == 0) return 0.0;
    double h = 0.0;
    for (auto c : hist) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log2(p);
    }
    return h;
}

double expression_diversity(const StyleDistribution& dist) {
    if (dist.total < 1) throw std::invalid_argument("expression_diversity: empty distribution");
    dist.validate();
    double sum = 0.0;
    for (const auto& hist : dist.counts) sum += histogram_entropy(hist);
    return sum / 3.0;
}

StyleAnalyzer::StyleAnalyzer(gateway::Gateway& gw, const PromptCatalog& prompts, gateway::CallSettings judge)
    : gw_(gw), prompts_(prompts), judge_(std::move(judge)) {}

StyleExtraction StyleAnalyzer::extract_style(const std::string& question) const {
    if (text::trim(question).empty()) throw std::invalid_argument("extract_style: empty text");
    const auto prompt = prompts_.render("diversity_expression", {{"question", question}});
    const auto shape = JsonShape()
                           .require("medical_knowledge", FieldKind::String)
                           .require("clarity", FieldKind::String)
                           .require("communication_style", FieldKind::String);
    try {
        const auto reply = gw_.complete_json(gateway::single_turn(judge_, "diversity_expression", prompt), shape,
                                             judge_.json_attempts);
        const auto mk = parse_level(reply.at("medical_knowledge").get<std::string>());
        const auto cl = parse_level(reply.at("clarity").get<std::string>());
        const auto cs = parse_comm_style(reply.at("communication_style").get<std::string>());
        if (!mk || !cl || !cs) return {std::nullopt, {"style-unreadable"}};
        return {PersonaStyle{*mk, *cl, *cs}, {}};
    } catch (const gateway::JsonShapeFailure&) {
        return {std::nullopt, {"style-unreadable"}};
    }
}

std::pair<StyleDistribution, std::vector<std::string>> StyleAnalyzer::style_distribution(
    const std::vector<std::string>& texts) const {
    StyleDistribution dist;
    std::vector<std::string> flags;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto e = extract_style(texts[i]);
        if (e.style) {
            dist.add(*e.style);
        } else {
            flags.push_back("text " + std::to_string(i) + ": style-unreadable");
        }
    }
    return {dist, flags};
}

DiagnosisDiversity StyleAnalyzer::diagnosis_diversity(const std::vector<std::string>& texts) const {
    DiagnosisDiversity out;
    std::vector<std::string> raw;
    std::set<std::string> seen;
    const auto shape = JsonShape().require("diseases", FieldKind::StringArray);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto prompt = prompts_.render("diversity_diagnosis", {{"text", texts[i]}});
        try {
            const auto reply = gw_.complete_json(gateway::single_turn(judge_, "diversity_diagnosis", prompt), shape,
                                                 judge_.json_attempts);
            for (const auto& d : reply.at("diseases")) {
                const auto name = text::trim(d.get<std::string>());
                if (!name.empty() && seen.insert(text::normalize(name)).second) raw.push_back(name);
            }
        } catch (const gateway::JsonShapeFailure&) {
            out.flags.push_back("text " + std::to_string(i) + ": diagnosis-extraction-unreadable");
        }
    }
    if (raw.empty()) return out;

    evaluate::EvalConfig cfg;
    cfg.judge = judge_;
    const evaluate::Evaluator normalizer(gw_, prompts_, cfg);
    const auto canon = normalizer.normalize_diagnoses(raw);
    out.flags.insert(out.flags.end(), canon.flags.begin(), canon.flags.end());
    std::map<std::string, std::string> unique;
    for (const auto& n : canon.names) unique.emplace(text::normalize(n), n);
    for (const auto& [key, name] : unique) out.diagnoses.push_back(name);
    out.unique = unique.size();
    return out;
}

}  // namespace medtrap::analytics
