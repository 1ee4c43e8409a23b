/// @file deriver.cpp

#include "medtrap/knowledge/deriver.hpp"

#include <algorithm>
#include <set>

#include "medtrap/core/text.hpp"

namespace medtrap::knowledge {

using gateway::FieldKind;
using gateway::JsonShape;
using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& j) {
    std::vector<std::string> out;
    if (!j.is_array()) return out;
    for (const auto& e : j) {
        if (e.is_string()) out.push_back(e.get<std::string>());
    }
    return out;
}

JsonShape differential_shape() {
    return JsonShape().require("similar_diagnoses", FieldKind::Array).check("entries", [](const json& j) {
        for (const auto& e : j.at("similar_diagnoses")) {
            if (!e.is_object() || !e.contains("name") || !e.at("name").is_string()) {
                return std::optional<std::string>("each similar_diagnoses entry needs a string \"name\"");
            }
        }
        return std::optional<std::string>();
    });
}

}  // namespace

std::string_view score_point_key(Criterion c) {
    switch (c) {
        case Criterion::Evidence: return "diagnosis_evidences";
        case Criterion::Treatment: return "treatment_suggestions";
        case Criterion::Lifestyle: return "lifestyle_suggestions";
    }
    return "diagnosis_evidences";
}

std::string KnowledgeDeriver::context_for(const std::string& name) const {
    auto article = kb_.lookup(name);
    return article.empty() ? "(none)" : text::trim(article);
}

DifferentialSet KnowledgeDeriver::differential_diagnoses(const std::string& root, int n) const {
    if (n < 1) throw std::invalid_argument("differential_diagnoses: n must be >= 1");
    const auto prompt = prompts_.render(
        "differential", {{"root_diagnosis", root}, {"n", std::to_string(n)}, {"knowledge_context", context_for(root)}});
    const auto shape = differential_shape();

    DifferentialSet out;
    out.root.name = root;
    const auto root_key = text::normalize(root);
    std::set<std::string> seen;

    auto absorb = [&](const json& reply) {
        if (const auto r = reply.find("root_diagnosis"); r != reply.end() && r->is_object()) {
            if (out.root.symptoms.empty()) out.root.symptoms = string_list(r->value("symptoms", json::array()));
        }
        for (const auto& e : reply.at("similar_diagnoses")) {
            DiagnosisProfile p{text::trim(e.at("name").get<std::string>()), string_list(e.value("symptoms", json::array()))};
            const auto key = text::normalize(p.name);
            if (key.empty() || seen.count(key)) continue;
            if (key == root_key) {
                if (std::find(out.flags.begin(), out.flags.end(), kFlagRootInDifferential) == out.flags.end()) {
                    out.flags.emplace_back(kFlagRootInDifferential);
                }
                continue;
            }
            seen.insert(key);
            if (key.find(root_key) != std::string::npos || root_key.find(key) != std::string::npos) {
                out.suspect_hierarchy.push_back(p.name);
            }
            out.similar.push_back(std::move(p));
        }
    };

    const auto first = gw_.complete_json(gateway::single_turn(generator_, "differential", prompt), shape,
                                         generator_.json_attempts);
    absorb(first);
    if (static_cast<int>(out.similar.size()) < n) {
        const auto note = "Only " + std::to_string(out.similar.size()) + " of your entries were usable. Provide " +
                          std::to_string(n) + " similar diagnoses, none of which is " + root +
                          " itself, in the same JSON format.";
        try {
            absorb(gw_.complete_json(gateway::follow_up(generator_, "differential", prompt, first.dump(), note), shape,
                                     generator_.json_attempts));
        } catch (const gateway::JsonShapeFailure&) {
        }
    }
    if (static_cast<int>(out.similar.size()) > n) out.similar.resize(static_cast<size_t>(n));
    if (static_cast<int>(out.similar.size()) < n) out.flags.emplace_back(kFlagPartialDifferential);
    std::erase_if(out.suspect_hierarchy, [&](const std::string& name) {
        return std::none_of(out.similar.begin(), out.similar.end(),
                            [&](const DiagnosisProfile& p) { return p.name == name; });
    });
    return out;
}

RumorSet KnowledgeDeriver::rumor_fact_pairs(const std::string& entity, int n) const {
    if (n < 1 || n > kMaxRumorPairs) throw std::invalid_argument("rumor_fact_pairs: n must be in [1,10]");
    const auto prompt = prompts_.render(
        "rumor", {{"symptom", entity}, {"n", std::to_string(n)}, {"knowledge_context", context_for(entity)}});
    const auto shape = JsonShape().require("statement_pairs", FieldKind::Array);
    const auto reply =
        gw_.complete_json(gateway::single_turn(generator_, "rumor", prompt), shape, generator_.json_attempts);

    RumorSet out;
    for (const auto& e : reply.at("statement_pairs")) {
        if (!e.is_object()) continue;
        const auto rumor = e.value("incorrect_statement", std::string{});
        const auto fact = e.value("correct_statement", std::string{});
        if (text::trim(rumor).empty() || text::trim(fact).empty()) continue;
        out.pairs.push_back({entity, text::trim(rumor), text::trim(fact), false});
        if (static_cast<int>(out.pairs.size()) == n) break;
    }
    if (static_cast<int>(out.pairs.size()) < n) out.flags.emplace_back(kFlagRumorShortfall);
    return out;
}

bool KnowledgeDeriver::validity_check(const RumorFactPair& pair) const {
    const auto rumor = text::normalize(text::strip_sentence(pair.rumor));
    const auto fact = text::normalize(text::strip_sentence(pair.fact));
    if (rumor.empty() || fact.empty() || rumor == fact) return false;
    const auto prompt =
        prompts_.render("rumor_check", {{"entity", pair.entity}, {"rumor", pair.rumor}, {"fact", pair.fact}});
    const auto shape = JsonShape().require("verdict", FieldKind::String);
    try {
        const auto reply =
            gw_.complete_json(gateway::single_turn(judge_, "rumor_check", prompt), shape, judge_.json_attempts);
        return text::normalize(reply.at("verdict").get<std::string>()) == "valid";
    } catch (const gateway::JsonShapeFailure&) {
        return false;
    }
}

PointList KnowledgeDeriver::derive_score_points(const std::string& diagnosis, const std::string& question,
                                                Criterion criterion, int k) const {
    if (k < 1) throw std::invalid_argument("derive_score_points: k must be >= 1");
    const auto tag = std::string(to_string(criterion));
    const auto key = std::string(score_point_key(criterion));
    const auto prompt = prompts_.render(tag, {{"refer_diagnosis", diagnosis},
                                              {"question", question},
                                              {"n", std::to_string(k)},
                                              {"knowledge_context", context_for(diagnosis)}});
    const auto shape = JsonShape().require(key, FieldKind::StringArray);

    PointList out;
    std::set<std::string> seen;
    bool had_duplicates = false;
    auto absorb = [&](const json& reply) {
        for (const auto& p : string_list(reply.at(key))) {
            const auto norm = text::normalize(p);
            if (norm.empty()) continue;
            if (!seen.insert(norm).second) {
                had_duplicates = true;
                continue;
            }
            out.points.push_back(text::trim(p));
        }
    };

    const auto first =
        gw_.complete_json(gateway::single_turn(generator_, tag, prompt), shape, generator_.json_attempts);
    absorb(first);
    if (static_cast<int>(out.points.size()) < k) {
        const auto note = std::string(had_duplicates ? "Some items repeated each other. " : "Too few items. ") +
                          "Provide " + std::to_string(k) + " items with distinct meanings, in the same JSON format.";
        try {
            absorb(gw_.complete_json(gateway::follow_up(generator_, tag, prompt, first.dump(), note), shape,
                                     generator_.json_attempts));
        } catch (const gateway::JsonShapeFailure&) {
        }
    }
    if (static_cast<int>(out.points.size()) > k) out.points.resize(static_cast<size_t>(k));
    if (static_cast<int>(out.points.size()) < k) out.flags.push_back(std::string(kFlagScorepointShortfall) + ":" + tag);
    return out;
}

}  // namespace medtrap::knowledge
